#pragma once

#include <cmath>
#include <functional>
#include <future>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "snninit/brent.hpp"
#include "snninit/membrane_fp.hpp"
#include "snninit/poisson.hpp"
#include "snninit/rate_theory.hpp"
#include "snninit/sim.hpp"

namespace snninit {

// Everything the rate operator needs besides the weight scale: neuron
// parameters, the per-source input rate, the effective fan-in, and how a
// scalar scale maps to a weight distribution.
struct RateTheta {
    enum class Method { diffusion, shot_noise, threshold_integration, mc_corrected };

    LifParams params;
    double input_rate_hz = 0.0;  // rate of each upstream source
    std::size_t fan_in = 0;      // expected synapses per downstream neuron
    // scale -> per-synapse weight distribution (magnitude for two-point
    // weights, standard deviation for Gaussian, mean for exponential pairs)
    std::function<WeightSpec(double)> make_spec;
    Method method = Method::diffusion;

    // Monte-Carlo settings (mc_corrected only)
    Correction correction = Correction::none;
    std::size_t mc_n_pre = 0;       // source count; connection prob lives in the spec
    std::size_t mc_n_post = 0;
    double mc_duration_s = 1.0;
    std::size_t mc_repeats = 5;
    std::uint64_t seed = 1;

    void validate() const {
        params.validate();
        if (input_rate_hz < 0.0) throw std::invalid_argument("RateTheta: input rate must be >= 0");
        if (fan_in == 0) throw std::invalid_argument("RateTheta: fan_in must be > 0");
        if (!make_spec) throw std::invalid_argument("RateTheta: make_spec is required");
        if (method == Method::mc_corrected && (mc_n_pre == 0 || mc_n_post == 0))
            throw std::invalid_argument("RateTheta: mc_corrected needs mc_n_pre and mc_n_post");
    }

    // OU moments of the aggregate input at a given scale:
    //   mu = I_ext + tau * fan_in * r_in * E[w]
    //   sigma_v^2 = (tau/2) * fan_in * r_in * E[w^2]
    DiffusionMoments moments_for(double scale) const {
        const WeightSpec spec = make_spec(scale);
        spec.validate();
        const double rate = input_rate_hz * static_cast<double>(fan_in);
        DiffusionMoments m;
        m.mu = params.i_ext + params.tau * rate * spec.event_mean();
        m.sigma = std::sqrt(0.5 * params.tau * rate * spec.event_second_moment());
        return m;
    }
};

struct RateEstimate {
    double rate = 0.0;
    double se = 0.0;  // standard error over Monte-Carlo repeats; 0 for closed forms
};

namespace detail {

// One corrected simulation of a single layer driven by fresh Poisson sources,
// returning the population rate.
inline double mc_layer_rate(double scale, const RateTheta& theta, std::uint64_t run_seed) {
    const LayerTopology topo =
        LayerTopology::realise(theta.mc_n_pre, theta.mc_n_post, theta.make_spec(scale),
                               mix64(run_seed));
    const std::size_t steps =
        static_cast<std::size_t>(std::llround(theta.mc_duration_s / theta.params.dt));
    const double p = theta.input_rate_hz * theta.params.dt;
    SimOptions opts;
    opts.correction = theta.correction;
    auto rng = make_stream(run_seed, 0x9eb1u);
    auto input = [&](std::size_t, std::vector<std::uint32_t>& active) {
        poisson_bin(std::min(p, 1.0), static_cast<std::uint32_t>(theta.mc_n_pre), rng, active);
    };
    return run_population(theta.params, topo, steps, input, mix64(run_seed) + 17, opts, {}, false)
        .rate_hz;
}

inline RateEstimate mc_rate_estimate(double scale, const RateTheta& theta) {
    std::vector<std::future<double>> futs;
    for (std::size_t r = 0; r < theta.mc_repeats; ++r)
        futs.push_back(std::async(std::launch::async, mc_layer_rate, scale, std::cref(theta),
                                  make_stream(theta.seed, r + 1)()));
    std::vector<double> rates;
    for (auto& f : futs) rates.push_back(f.get());
    RateEstimate est;
    for (double r : rates) est.rate += r;
    est.rate /= static_cast<double>(rates.size());
    if (rates.size() > 1) {
        double ss = 0.0;
        for (double r : rates) ss += (r - est.rate) * (r - est.rate);
        est.se = std::sqrt(ss / static_cast<double>(rates.size() - 1) /
                           static_cast<double>(rates.size()));
    }
    return est;
}

}  // namespace detail

// The rate operator: predicted stationary output rate at a given weight
// scale. Closed-form methods use the input statistics only; the Monte-Carlo
// mode runs the corrected simulator (fixed budget of repeats x duration).
inline RateEstimate rate_operator_estimate(double scale, const RateTheta& theta) {
    theta.validate();
    if (!(scale > 0.0)) throw std::invalid_argument("rate_operator: scale must be > 0");
    switch (theta.method) {
        case RateTheta::Method::diffusion:
            return {siegert_rate(theta.params, theta.moments_for(scale)), 0.0};
        case RateTheta::Method::threshold_integration: {
            const DiffusionMoments m = theta.moments_for(scale);
            const double lb = std::min(theta.params.v_r, m.mu) - 6.0 * m.sigma;
            return {threshold_integration_lif(theta.params, m, lb).second, 0.0};
        }
        case RateTheta::Method::shot_noise: {
            const WeightSpec spec = theta.make_spec(scale);
            if (spec.kind != WeightKind::exponential_pair)
                throw std::invalid_argument(
                    "rate_operator: shot_noise method requires exponential_pair weights");
            ShotNoiseSpec sn;
            sn.r_e = 0.5 * theta.input_rate_hz * static_cast<double>(theta.fan_in);
            sn.r_i = sn.r_e;
            sn.w_e = spec.w_e;
            sn.w_i = spec.w_i;
            return {shot_noise_rate(theta.params, sn), 0.0};
        }
        case RateTheta::Method::mc_corrected:
            return detail::mc_rate_estimate(scale, theta);
    }
    throw std::logic_error("rate_operator: unknown method");
}

inline double rate_operator_V(double scale, const RateTheta& theta) {
    return rate_operator_estimate(scale, theta).rate;
}

// Step 1 of the pipeline: bracketed root-finding of scale such that the rate
// operator hits the target. Relative rate tolerance 1e-4 for closed forms,
// 2 standard errors for the Monte-Carlo mode.
inline double solve_weight_sigma(double target_rate_hz, const RateTheta& theta,
                                 double scale_lo = 1e-4, double scale_hi = 1.0) {
    theta.validate();
    if (!(target_rate_hz > 0.0))
        throw std::invalid_argument("solve_weight_sigma: target rate must be > 0");
    const RateEstimate lo = rate_operator_estimate(scale_lo, theta);
    const RateEstimate hi = rate_operator_estimate(scale_hi, theta);
    if (lo.rate > target_rate_hz || hi.rate < target_rate_hz) {
        std::ostringstream msg;
        msg << "solve_weight_sigma: target " << target_rate_hz
            << " Hz is outside the achievable range [" << lo.rate << ", " << hi.rate
            << "] Hz for scales in [" << scale_lo << ", " << scale_hi << "]";
        throw std::runtime_error(msg.str());
    }
    const bool mc = theta.method == RateTheta::Method::mc_corrected;
    double f_tol = 1e-4 * target_rate_hz;
    if (mc) f_tol = std::max(f_tol, 2.0 * std::max(lo.se, hi.se));
    auto f = [&](double x) { return rate_operator_V(x, theta) - target_rate_hz; };
    return brent_root(f, scale_lo, scale_hi, lo.rate - target_rate_hz, hi.rate - target_rate_hz,
                      1e-10, f_tol, 200);
}

// Diagnostic valuation of the layer configuration produced on the way to
// kappa; kept so callers (and the CSV export) can see the intermediate
// quantities.
struct KappaResult {
    double kappa = 0.0;
    double surrogate_integral = 0.0;  // the density mass the surrogate sees
    MembraneDensity before_reset;     // P-hat
    MembraneDensity stationary;
};

// Step 2: stationary density (threshold integration; this is the density the
// collapse-corrected simulator converges to), one reset-free step to get the
// before-reset density, the surrogate-squared mass integral, and finally
//   kappa = sqrt((1 - alpha^2) / (fan_in * Var[w] * integral)).
inline KappaResult kappa_for_gradient_flow(double sigma_w, const RateTheta& theta,
                                           const SurrogateSpec& surrogate) {
    theta.validate();
    surrogate.validate();
    const DiffusionMoments m = theta.moments_for(sigma_w);
    const double lb = std::min(theta.params.v_r, m.mu) - 6.0 * m.sigma;

    KappaResult out;
    out.stationary = threshold_integration_lif(theta.params, m, lb).first;
    const FpGrid grid = FpGrid::around(theta.params, m.sigma, surrogate.half_width());
    out.before_reset = fp_before_reset(out.stationary, m, theta.params, grid);
    out.surrogate_integral = surrogate_mass(out.before_reset, surrogate, theta.params);
    if (!(out.surrogate_integral > 0.0))
        throw std::runtime_error(
            "kappa_for_gradient_flow: surrogate sees no density mass; widen its half-width or "
            "check that the layer actually fires");

    const double var_w = theta.make_spec(sigma_w).event_second_moment();
    const double a = theta.params.alpha();
    out.kappa = std::sqrt((1.0 - a * a) /
                          (static_cast<double>(theta.fan_in) * var_w * out.surrogate_integral));
    return out;
}

// Upper bound on the next layer's per-step spike probability from variance
// propagation. Diagnostic only: it assumes a membrane distribution symmetric
// around zero, bounds from above only, and loosens with depth.
inline double forward_rate_bound(double rho_prev, double sigma_w, const RateTheta& theta) {
    if (rho_prev < 0.0 || rho_prev > 1.0)
        throw std::invalid_argument("forward_rate_bound: rho_prev must be a probability");
    const double a = theta.params.alpha();
    const double big_a = 1.0 / (1.0 - a * a);
    const double big_b = 2.0 * a / ((1.0 - a) * (1.0 - a) * (1.0 + a));
    const double n_var = static_cast<double>(theta.fan_in) *
                         theta.make_spec(sigma_w).event_second_moment();
    return n_var / (2.0 * theta.params.v_th * theta.params.v_th) *
           (big_a * rho_prev + big_b * rho_prev * rho_prev);
}

struct InitPlanEntry {
    double sigma_w = 0.0;
    double predicted_rate_hz = 0.0;
    double surrogate_integral = 0.0;
    double kappa = 0.0;
    RateTheta::Method method = RateTheta::Method::diffusion;
};

struct InitPlan {
    std::vector<InitPlanEntry> layers;
};

// Per-layer two-step plan: each layer's input rate is the previous layer's
// target rate.
inline InitPlan plan_network_init(std::size_t n_layers, const std::vector<double>& target_rates_hz,
                                  RateTheta theta, const SurrogateSpec& surrogate) {
    if (target_rates_hz.size() != n_layers)
        throw std::invalid_argument("plan_network_init: one target rate per layer required");
    InitPlan plan;
    for (std::size_t l = 0; l < n_layers; ++l) {
        if (l > 0) theta.input_rate_hz = target_rates_hz[l - 1];
        try {
            InitPlanEntry e;
            e.method = theta.method;
            e.sigma_w = solve_weight_sigma(target_rates_hz[l], theta);
            e.predicted_rate_hz = rate_operator_V(e.sigma_w, theta);
            const KappaResult k = kappa_for_gradient_flow(e.sigma_w, theta, surrogate);
            e.surrogate_integral = k.surrogate_integral;
            e.kappa = k.kappa;
            plan.layers.push_back(e);
        } catch (const std::exception& ex) {
            throw std::runtime_error("plan_network_init: layer " + std::to_string(l) + ": " +
                                     ex.what());
        }
    }
    return plan;
}

}  // namespace snninit
