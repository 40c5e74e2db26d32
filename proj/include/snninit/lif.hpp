#pragma once

#include <cmath>
#include <stdexcept>

namespace snninit {

// Leaky integrate-and-fire constants. Membrane resistance is fixed at 1 and
// the refractory period is zero throughout.
struct LifParams {
    double tau = 10e-3;   // membrane time constant [s]
    double v_th = 1.0;    // spike threshold
    double v_r = 0.0;     // reset potential
    double i_ext = 0.0;   // constant bias (voltage-equivalent, R = 1)
    double dt = 1e-3;     // simulation timestep [s]

    double alpha() const { return std::exp(-dt / tau); }

    // Mean within-step decay, E[exp(-t_i/tau)] for t_i uniform on [0, dt].
    // Kept only as a negative control; the default path never uses it.
    double alpha_bar() const { return tau / dt * (1.0 - std::exp(-dt / tau)); }

    void validate() const {
        if (!(tau > 0.0)) throw std::invalid_argument("LifParams: tau must be > 0");
        if (!(dt > 0.0)) throw std::invalid_argument("LifParams: dt must be > 0");
        if (!(v_th > v_r)) throw std::invalid_argument("LifParams: v_th must exceed v_r");
    }

    LifParams with_dt(double new_dt) const {
        LifParams p = *this;
        p.dt = new_dt;
        return p;
    }
};

}  // namespace snninit
