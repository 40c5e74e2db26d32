#pragma once

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <vector>

#include "snninit/lif.hpp"
#include "snninit/rate_theory.hpp"

namespace snninit {

// Voltage grid for the reset-free transient solve. dt_inner is only an upper
// bound on the solver substep; the solver refines it to satisfy stability.
struct FpGrid {
    double v_min = 0.0;
    double v_max = 0.0;
    std::size_t n_points = 4096;
    double dt_inner = 1e-5;

    void validate(const LifParams& params, double surrogate_half_width = 0.0) const {
        if (!(v_max > v_min)) throw std::invalid_argument("FpGrid: v_max must exceed v_min");
        if (n_points < 1024) throw std::invalid_argument("FpGrid: n_points must be >= 1024");
        if (!(v_max > params.v_th + surrogate_half_width))
            throw std::invalid_argument("FpGrid: v_max must extend past threshold + surrogate half-width");
        if (!(dt_inner > 0.0)) throw std::invalid_argument("FpGrid: dt_inner must be > 0");
    }

    // Default span: V_r - 10 sigma up to V_th + max(10 sigma, 4 b_th).
    static FpGrid around(const LifParams& params, double sigma, double b_th = 0.0,
                         std::size_t n_points = 4096) {
        FpGrid g;
        g.v_min = params.v_r - 10.0 * sigma;
        g.v_max = params.v_th + std::max(10.0 * sigma, 4.0 * b_th);
        g.n_points = n_points;
        return g;
    }
};

// Surrogate derivative H'(v - V_th): either a boxcar of half-width b_th and
// unit height, or caller-supplied samples on a uniform offset grid.
struct SurrogateSpec {
    enum class Shape { boxcar, sampled } shape = Shape::boxcar;
    double b_th = 0.1;    // boxcar half-width
    double kappa = 1.0;   // multiplicative scale; excluded from surrogate_mass
    // sampled shape: values of H' at offsets v - V_th in [lo, hi], uniform
    std::vector<double> samples;
    double sample_lo = 0.0, sample_hi = 0.0;

    static SurrogateSpec boxcar(double half_width, double kappa = 1.0) {
        SurrogateSpec s;
        s.shape = Shape::boxcar;
        s.b_th = half_width;
        s.kappa = kappa;
        return s;
    }
    static SurrogateSpec sampled(std::vector<double> h, double lo, double hi, double kappa = 1.0) {
        SurrogateSpec s;
        s.shape = Shape::sampled;
        s.samples = std::move(h);
        s.sample_lo = lo;
        s.sample_hi = hi;
        s.kappa = kappa;
        return s;
    }

    void validate() const {
        if (shape == Shape::boxcar) {
            if (!(b_th > 0.0)) throw std::invalid_argument("SurrogateSpec: b_th must be > 0");
        } else {
            if (samples.size() < 2 || !(sample_hi > sample_lo))
                throw std::invalid_argument("SurrogateSpec: sampled shape needs >= 2 points on a span");
            for (double h : samples)
                if (h < 0.0) throw std::invalid_argument("SurrogateSpec: H' must be >= 0");
        }
    }

    double half_width() const {
        return shape == Shape::boxcar ? b_th : std::max(std::abs(sample_lo), std::abs(sample_hi));
    }

    // H'(v - v_th), without the kappa scale.
    double deriv(double v, double v_th) const {
        const double x = v - v_th;
        // tolerant edge comparison: v - v_th at the support boundary can land
        // a few ulps outside b_th and would otherwise drop quadrature weight
        if (shape == Shape::boxcar) return std::abs(x) <= b_th * (1.0 + 1e-12) ? 1.0 : 0.0;
        if (x < sample_lo || x > sample_hi) return 0.0;
        const double t = (x - sample_lo) / (sample_hi - sample_lo) * (samples.size() - 1);
        const std::size_t j = std::min(static_cast<std::size_t>(t), samples.size() - 2);
        const double f = t - static_cast<double>(j);
        return samples[j] + f * (samples[j + 1] - samples[j]);
    }
};

// Evolve a membrane density for one timestep params.dt without any reset:
// tau dP/dt = -d/dv((mu - v) P) + sigma_v^2 d^2P/dv^2, zero-flux edges.
// (The stationary variance of this operator is sigma_v^2 = moments.sigma^2.)
// Conservative finite volumes: upwinded advective flux, centred diffusive
// flux, explicit Euler with automatic substepping under the CFL bound.
inline MembraneDensity fp_before_reset(const MembraneDensity& initial,
                                       const DiffusionMoments& moments, const LifParams& params,
                                       const FpGrid& grid) {
    grid.validate(params);
    const std::size_t n = grid.n_points;
    const double h = (grid.v_max - grid.v_min) / static_cast<double>(n - 1);
    const double big_d = moments.sigma * moments.sigma / params.tau;  // diffusion coefficient

    // Resample the initial density onto this grid (cell centres = nodes).
    std::vector<double> v(n), p(n);
    for (std::size_t i = 0; i < n; ++i) {
        v[i] = grid.v_min + h * static_cast<double>(i);
        p[i] = initial.at(v[i]);
    }
    {  // renormalise after resampling
        double z = 0.0;
        for (std::size_t i = 1; i < n; ++i) z += 0.5 * (p[i] + p[i - 1]) * h;
        if (!(z > 0.0)) throw std::invalid_argument("fp_before_reset: initial density has no mass on grid");
        for (auto& x : p) x /= z;
    }
    if (params.dt == 0.0) {
        MembraneDensity out;
        out.grid = std::move(v);
        out.density = std::move(p);
        out.lower_bound = grid.v_min;
        return out;
    }

    // Stability: dt_sub <= min(h^2 / (2D), h / max|a|) with margin.
    double a_max = 0.0;
    for (std::size_t i = 0; i < n; ++i)
        a_max = std::max(a_max, std::abs((moments.mu - v[i]) / params.tau));
    double dt_stable = 0.45 * h * h / big_d;
    if (a_max > 0.0) dt_stable = std::min(dt_stable, 0.9 * h / a_max);
    dt_stable = std::min(dt_stable, grid.dt_inner);
    const std::size_t n_sub = static_cast<std::size_t>(std::ceil(params.dt / dt_stable));
    if (n_sub > (1u << 16))
        throw std::runtime_error("fp_before_reset: stability would need more than 2^16 substeps; coarsen the grid");
    const double dt_sub = params.dt / static_cast<double>(n_sub);

    std::vector<double> flux(n + 1, 0.0), pn(n);
    for (std::size_t step = 0; step < n_sub; ++step) {
        // interface fluxes; zero at both edges
        for (std::size_t f = 1; f < n; ++f) {
            const double vf = 0.5 * (v[f - 1] + v[f]);
            const double a = (moments.mu - vf) / params.tau;
            const double adv = a >= 0.0 ? a * p[f - 1] : a * p[f];
            const double dif = -big_d * (p[f] - p[f - 1]) / h;
            flux[f] = adv + dif;
        }
        for (std::size_t i = 0; i < n; ++i) pn[i] = p[i] - dt_sub / h * (flux[i + 1] - flux[i]);
        p.swap(pn);
    }

    // Clip tiny negative undershoot; anything larger is a solver bug.
    for (auto& x : p) {
        if (x < 0.0) {
            if (x < -1e-9) throw std::runtime_error("fp_before_reset: density went significantly negative");
            x = 0.0;
        }
    }

    MembraneDensity out;
    out.grid = std::move(v);
    out.density = std::move(p);
    out.lower_bound = grid.v_min;
    return out;
}

// Integral of (H')^2 against the density (kappa excluded; it enters squared
// downstream). For boxcars this is just the probability mass within b_th of
// threshold.
inline double surrogate_mass(const MembraneDensity& density, const SurrogateSpec& surrogate,
                             const LifParams& params) {
    surrogate.validate();
    if (density.grid.size() < 2) throw std::invalid_argument("surrogate_mass: density grid too small");
    const double lo = params.v_th + (surrogate.shape == SurrogateSpec::Shape::boxcar
                                         ? -surrogate.b_th
                                         : surrogate.sample_lo);
    const double hi = params.v_th + (surrogate.shape == SurrogateSpec::Shape::boxcar
                                         ? surrogate.b_th
                                         : surrogate.sample_hi);
    if (lo < density.grid.front() - 1e-12 || hi > density.grid.back() + 1e-12)
        throw std::invalid_argument("surrogate_mass: surrogate support extends outside the density grid");

    double acc = 0.0;
    for (std::size_t i = 1; i < density.grid.size(); ++i) {
        const double v0 = density.grid[i - 1], v1 = density.grid[i];
        if (v1 <= lo || v0 >= hi) continue;
        auto f = [&](double x) {
            const double hp = surrogate.deriv(x, params.v_th);
            return hp * hp * density.at(x);
        };
        // Simpson on the (possibly trimmed) cell
        const double a = std::max(v0, lo), b = std::min(v1, hi);
        acc += (b - a) / 6.0 * (f(a) + 4.0 * f(0.5 * (a + b)) + f(b));
    }
    return acc;
}

}  // namespace snninit
