#pragma once

#include <cmath>
#include <stdexcept>
#include <utility>
#include <vector>

#include "snninit/lif.hpp"
#include "snninit/quadrature.hpp"
#include "snninit/special.hpp"

namespace snninit {

// Drift and noise of the equivalent Ornstein-Uhlenbeck membrane. sigma is the
// *steady-state* membrane standard deviation, sigma_v^2 = (tau/2) sum r_k w_k^2;
// the first-passage integral uses sqrt(2) * sigma internally, which is the
// same quantity the usual formulation writes as its own sigma.
struct DiffusionMoments {
    double mu = 0.0;
    double sigma = 0.0;
};

// Aggregates (rate, weight) input channels into OU moments:
// mu = I_ext + tau sum r_k w_k, sigma^2 = (tau/2) sum r_k w_k^2.
inline DiffusionMoments diffusion_moments(const LifParams& params,
                                          const std::vector<std::pair<double, double>>& inputs) {
    DiffusionMoments m;
    double drift = 0.0, diff = 0.0;
    for (const auto& [rate, weight] : inputs) {
        if (rate < 0.0) throw std::invalid_argument("diffusion_moments: rate must be >= 0");
        drift += rate * weight;
        diff += rate * weight * weight;
    }
    m.mu = params.i_ext + params.tau * drift;
    m.sigma = std::sqrt(0.5 * params.tau * diff);
    return m;
}

// Stationary first-passage rate of the OU membrane with threshold and reset
// (diffusion approximation), via the classic integral
// 1/r = tau sqrt(pi) int_{(Vr-mu)/s}^{(Vth-mu)/s} e^{x^2} (1 + erf x) dx
// with s = sqrt(2) sigma. Adaptive quadrature, relative tolerance 1e-8.
inline double siegert_rate(const LifParams& params, const DiffusionMoments& m) {
    if (!(m.sigma > 0.0))
        throw std::invalid_argument(
            "siegert_rate: sigma = 0; the deterministic mean-driven limit is not handled here");
    const double s = m.sigma * std::sqrt(2.0);
    const double lo = (params.v_r - m.mu) / s;
    const double hi = (params.v_th - m.mu) / s;
    // e^{x^2} overflows past x ~ 26.6; there 1/r exceeds ~e^700 / tau and the
    // rate is zero to double precision.
    if (hi >= 26.0) return 0.0;
    const double integral = integrate([](double x) { return siegert_integrand(x); }, lo, hi, 1e-8);
    return 1.0 / (params.tau * std::sqrt(M_PI) * integral);
}

// Excitatory/inhibitory Poisson drive with exponentially distributed
// amplitudes (means w_e > 0 and w_i < 0).
struct ShotNoiseSpec {
    double r_e = 0.0;  // Hz
    double r_i = 0.0;  // Hz
    double w_e = 0.0;
    double w_i = 0.0;

    void validate() const {
        if (r_e < 0.0 || r_i < 0.0) throw std::invalid_argument("ShotNoiseSpec: rates must be >= 0");
        if (!(w_e > 0.0 && w_i < 0.0))
            throw std::invalid_argument("ShotNoiseSpec: requires w_e > 0 > w_i");
    }
};

// Stationary rate under shot noise:
// 1/r = tau int_0^{1/w_e} Z0^{-1}(x)/x (e^{x Vth}/(1 - x w_e) - e^{x Vr}) dx,
// Z0^{-1}(x) = (1 - x w_e)^{tau r_e} (1 - x w_i)^{tau r_i}.
// A nonzero bias current shifts the threshold and reset (v -> v - I_ext).
// The x -> 1/w_e endpoint gets a power substitution so the (1-x w_e)^{tau
// r_e - 1} factor integrates cleanly even when tau r_e < 1.
inline double shot_noise_rate(const LifParams& params, const ShotNoiseSpec& spec) {
    spec.validate();
    const double vth = params.v_th - params.i_ext;
    const double vr = params.v_r - params.i_ext;
    if (!(vth > 0.0))
        throw std::invalid_argument("shot_noise_rate: effective threshold must be positive");
    const double be = params.tau * spec.r_e;  // exponent at the upper endpoint
    const double bi = params.tau * spec.r_i;
    const double we = spec.w_e, wi = spec.w_i;

    // log of the smooth part h(x), i.e. the integrand with the
    // (1 - x w_e)^(be - 1) factor left out. Everything stays in log space so
    // the large-exponent Z0 terms and e^{x vth} cancel before exponentiating.
    auto log_smooth = [&](double x) -> double {
        const double log_zi = bi * std::log1p(-x * wi);
        if (x < 1e-10) {
            // limit of (e^{x vth}/(1 - x we) - e^{x vr}) / x as x -> 0
            return log_zi + std::log(vth + we - vr);
        }
        // num = e^{x vth} (1 - e^{x (vr - vth)} (1 - x we)); the bracket is in
        // (0, 1] since vr < vth and 0 < 1 - x we <= 1.
        const double log_num =
            x * vth + std::log1p(-std::exp(x * (vr - vth)) * (1.0 - x * we));
        return log_zi + log_num - std::log(x);
    };
    auto integrand = [&](double x) -> double {
        const double one_m = 1.0 - x * we;
        if (one_m <= 0.0) return 0.0;
        const double log_val = (be - 1.0) * std::log(one_m) + log_smooth(x);
        return log_val < -745.0 ? 0.0 : std::exp(log_val);
    };

    const double xc = 0.9 / we;  // split point for the endpoint substitution
    double integral = integrate(integrand, 0.0, xc, 1e-8);

    // On [xc, 1/we): substitute s = (1 - x we)^be, x = (1 - s^(1/be))/we,
    // dx = -s^(1/be - 1)/(be we) ds; the singular factor cancels exactly.
    const double sc = std::pow(1.0 - xc * we, be);
    integral += integrate(
        [&](double s) -> double {
            if (s <= 0.0) return 0.0;
            const double x = (1.0 - std::pow(s, 1.0 / be)) / we;
            return std::exp(log_smooth(x)) / (be * we);
        },
        0.0, sc, 1e-8);

    if (!(integral > 0.0) || !std::isfinite(integral))
        throw std::runtime_error("shot_noise_rate: integral diverged at an endpoint");
    return 1.0 / (params.tau * integral);
}

// Probability density of the membrane potential on a voltage grid that ends
// exactly at the threshold.
struct MembraneDensity {
    std::vector<double> grid;     // v_0 < ... < v_G = V_th (or beyond, for
                                  // before-reset densities)
    std::vector<double> density;  // nonnegative, integrates to 1
    double lower_bound = 0.0;

    double trapz() const {
        double s = 0.0;
        for (std::size_t i = 1; i < grid.size(); ++i)
            s += 0.5 * (density[i] + density[i - 1]) * (grid[i] - grid[i - 1]);
        return s;
    }
    void normalise() {
        const double z = trapz();
        if (!(z > 0.0)) throw std::runtime_error("MembraneDensity: zero mass");
        for (auto& d : density) d /= z;
    }
    // Linear interpolation; zero outside the grid.
    double at(double v) const {
        if (grid.empty() || v <= grid.front() || v >= grid.back()) {
            if (!grid.empty() && (v == grid.front() || v == grid.back()))
                return density[v == grid.front() ? 0 : grid.size() - 1];
            return 0.0;
        }
        auto it = std::lower_bound(grid.begin(), grid.end(), v);
        const std::size_t j = static_cast<std::size_t>(it - grid.begin());
        const double t = (v - grid[j - 1]) / (grid[j] - grid[j - 1]);
        return density[j - 1] + t * (density[j] - density[j - 1]);
    }
};

// Backward threshold integration for the LIF flux operator
// J(p) = ((mu - v)/tau) p - (sigma_int^2 / 2 tau) dp/dv, integrating the pair
// (j, p) from V_th down to v_lb with j(V_th) = 1, p(V_th) = 0. Returns the
// normalised stationary density and the rate 1/int p dv. The mass below v_lb
// is checked by re-running with a doubled span.
inline std::pair<MembraneDensity, double> threshold_integration_lif(const LifParams& params,
                                                                    const DiffusionMoments& m,
                                                                    double v_lb,
                                                                    std::size_t grid_size = 2048) {
    if (!(m.sigma > 0.0)) throw std::invalid_argument("threshold_integration_lif: sigma must be > 0");
    if (!(v_lb < params.v_r)) throw std::invalid_argument("threshold_integration_lif: v_lb must be < V_r");
    if (grid_size < 512) throw std::invalid_argument("threshold_integration_lif: grid_size >= 512");

    const double s2 = 2.0 * m.sigma * m.sigma;  // sigma_int^2 in the flux operator

    auto solve = [&](double lb, std::size_t gsize) {
        // Uniform grid with V_r exactly on a node, so the flux discontinuity
        // sits on a grid point.
        std::vector<double> grid(gsize + 1), p(gsize + 1, 0.0);
        const double h = (params.v_th - lb) / gsize;
        for (std::size_t i = 0; i <= gsize; ++i) grid[i] = lb + h * i;
        std::size_t ir = static_cast<std::size_t>(std::llround((params.v_r - lb) / h));
        grid[ir] = params.v_r;

        auto dp_dv = [&](double v, double pv, double jv) {
            return (2.0 * params.tau / s2) * ((m.mu - v) / params.tau * pv - jv);
        };
        // integrate downward: p' = f(v, p); j = 1 above V_r, 0 below
        for (std::size_t i = gsize; i-- > 0;) {
            const double v1 = grid[i + 1], v0 = grid[i];
            const double hh = v0 - v1;  // negative
            const double jv = (v0 >= params.v_r - 1e-15) ? 1.0 : 0.0;
            const double jmid = (0.5 * (v0 + v1) >= params.v_r) ? 1.0 : 0.0;
            const double jv1 = (v1 > params.v_r) ? 1.0 : (v1 >= params.v_r - 1e-15 ? 1.0 : 0.0);
            const double k1 = dp_dv(v1, p[i + 1], jv1);
            const double k2 = dp_dv(v1 + 0.5 * hh, p[i + 1] + 0.5 * hh * k1, jmid);
            const double k3 = dp_dv(v1 + 0.5 * hh, p[i + 1] + 0.5 * hh * k2, jmid);
            const double k4 = dp_dv(v0, p[i + 1] + hh * k3, jv);
            p[i] = p[i + 1] + hh / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
            if (p[i] < 0.0) p[i] = 0.0;  // clip backward-integration undershoot
        }
        MembraneDensity d;
        d.grid = std::move(grid);
        d.density = std::move(p);
        d.lower_bound = lb;
        const double mass = d.trapz();
        return std::make_pair(std::move(d), 1.0 / mass);
    };

    auto [dens, rate] = solve(v_lb, grid_size);
    // Convergence in the lower bound: widen until the rate settles.
    double lb = v_lb;
    for (int it = 0; it < 8; ++it) {
        const double wider = params.v_r - 2.0 * (params.v_r - lb);
        const double span_ratio = (params.v_th - wider) / (params.v_th - v_lb);
        auto [d2, r2] = solve(wider, static_cast<std::size_t>(grid_size * span_ratio));
        if (std::abs(r2 - rate) <= 1e-6 * std::abs(r2)) {
            for (auto& x : dens.density) x *= rate;  // scale p to the density P = r p
            return {std::move(dens), rate};
        }
        dens = std::move(d2);
        rate = r2;
        lb = wider;
    }
    throw std::runtime_error("threshold_integration_lif: density mass did not converge in v_lb");
}

// Closed-form stationary density of the diffusion approximation (two branches
// split at V_r), normalised by the Siegert rate.
inline MembraneDensity stationary_distribution_diffusion(const LifParams& params,
                                                         const DiffusionMoments& m,
                                                         std::vector<double> grid) {
    if (!(m.sigma > 0.0))
        throw std::invalid_argument("stationary_distribution_diffusion: sigma must be > 0");
    const double r_out = siegert_rate(params, m);
    const double s2 = 2.0 * m.sigma * m.sigma;

    MembraneDensity d;
    d.density.resize(grid.size());
    auto inner = [&](double u) { return std::exp((u - m.mu) * (u - m.mu) / s2); };
    for (std::size_t i = 0; i < grid.size(); ++i) {
        const double v = grid[i];
        if (v >= params.v_th) {
            d.density[i] = 0.0;
            continue;
        }
        const double lo = std::max(v, params.v_r);
        const double integral = integrate(inner, lo, params.v_th, 1e-10);
        d.density[i] = r_out * (2.0 * params.tau / s2) *
                       std::exp(-(v - m.mu) * (v - m.mu) / s2) * integral;
    }
    d.lower_bound = grid.front();
    d.grid = std::move(grid);
    return d;
}

}  // namespace snninit
