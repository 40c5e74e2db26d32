#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <stdexcept>
#include <string>
#include <vector>

#include "snninit/membrane_fp.hpp"
#include "snninit/sim.hpp"

namespace snninit {

// Pre-reset membrane record of one simulated network, reduced to what the
// backward pass needs: the surrogate derivative H'(v - V_th) per layer,
// neuron and step (unscaled; kappa is applied in the backward pass).
struct ForwardTrace {
    std::size_t steps = 0;
    std::vector<std::size_t> layer_sizes;     // spiking layers only
    std::vector<std::vector<float>> hprime;   // per layer: [t * n + i], t = 1..steps
    std::vector<double> layer_rates_hz;
    std::vector<SpikeRaster> rasters;         // kept only if requested
};

// Forward pass shared with the plain simulator (identical seeds give
// bit-identical spikes); additionally evaluates the surrogate derivative on
// the pre-reset membrane of every neuron at every step.
inline ForwardTrace forward_unrolled(const std::vector<LayerTopology>& layers,
                                     const LifParams& params, const SpikeRaster& input,
                                     const SimOptions& opts, std::uint64_t seed,
                                     const SurrogateSpec& surrogate, bool keep_rasters = false) {
    surrogate.validate();
    ForwardTrace tr;
    tr.steps = input.steps;
    tr.hprime.resize(layers.size());
    std::vector<StepObserver> observers;
    for (std::size_t l = 0; l < layers.size(); ++l) {
        tr.layer_sizes.push_back(layers[l].n_post);
        tr.hprime[l].assign(input.steps * layers[l].n_post, 0.0f);
        auto* sink = tr.hprime[l].data();
        const std::size_t n = layers[l].n_post;
        observers.push_back([sink, n, &surrogate, &params](std::size_t t,
                                                           const std::vector<double>& v_pre,
                                                           const std::vector<std::uint32_t>&) {
            for (std::size_t i = 0; i < n; ++i)
                sink[t * n + i] = static_cast<float>(surrogate.deriv(v_pre[i], params.v_th));
        });
    }
    NetworkRun run = run_network(layers, params, input, opts, seed, observers);
    tr.layer_rates_hz = std::move(run.layer_rates_hz);
    if (keep_rasters) tr.rasters = std::move(run.layers);
    return tr;
}

// Backward-pass result. Per-layer Delta-s variance is always filled; the full
// gradient tensors are kept only on request (intended for small test nets).
struct GradientTrace {
    std::vector<double> per_layer_variance;  // Var[ds entries], index = spike layer
    std::vector<Eigen::MatrixXd> ds;         // [layer](t, i), empty unless keep_tensors
    std::vector<Eigen::MatrixXd> dv;
    bool keep_tensors = false;
};

namespace detail {

inline double entry_variance(const Eigen::MatrixXd& m) {
    const double mean = m.mean();
    return (m.array() - mean).square().mean();
}

// W^{(l)} as an (n_post x n_pre) matrix from the per-source synapse lists.
inline Eigen::MatrixXd dense_weights(const LayerTopology& topo) {
    const std::vector<double> flat = topo.dense();  // [pre * n_post + post]
    return Eigen::Map<const Eigen::MatrixXd>(flat.data(), static_cast<Eigen::Index>(topo.n_post),
                                             static_cast<Eigen::Index>(topo.n_pre));
}

}  // namespace detail

// Backward recursions for a loss that is the sum of last-layer membranes over
// time:
//   ds^{(l)}[t] = sum_{k>t} alpha^{k-t-1} dv^{(l+1)}[k] W^{(l)}
//   dv^{(l)}[t] = ds^{(l)}[t] * kappa H'(v^{(l)}[t])
// evaluated top-down with the running sum A[t] = dv[t+1] + alpha A[t+1], so
// each layer costs one (steps x n_post) x (n_post x n_pre) product.
// ds index l covers the input layer (l = 0) through the layer below the top.
inline GradientTrace backward_unrolled(const ForwardTrace& trace,
                                       const std::vector<LayerTopology>& layers,
                                       const SurrogateSpec& surrogate, const LifParams& params,
                                       bool keep_tensors = false) {
    if (layers.size() != trace.hprime.size())
        throw std::invalid_argument("backward_unrolled: trace/layer count mismatch");
    if (layers.empty()) throw std::invalid_argument("backward_unrolled: no layers");
    surrogate.validate();
    const double alpha = params.alpha();
    const Eigen::Index steps = static_cast<Eigen::Index>(trace.steps);
    const std::size_t n_layers = layers.size();

    GradientTrace gt;
    gt.keep_tensors = keep_tensors;
    gt.per_layer_variance.assign(n_layers, 0.0);
    if (keep_tensors) {
        gt.ds.resize(n_layers);
        gt.dv.resize(n_layers);
    }

    // dv of the top spiking layer: the loss is linear in every membrane value.
    Eigen::MatrixXd dv = Eigen::MatrixXd::Ones(steps, static_cast<Eigen::Index>(layers.back().n_post));
    if (keep_tensors) gt.dv[n_layers - 1] = dv;

    for (std::size_t l = n_layers; l-- > 0;) {
        // A(t) = sum_{k>t} alpha^{k-t-1} dv[k]; dv rows index times 1..steps.
        Eigen::MatrixXd acc(steps, dv.cols());
        acc.row(steps - 1) = dv.row(steps - 1);
        for (Eigen::Index t = steps - 2; t >= 0; --t)
            acc.row(t) = dv.row(t) + alpha * acc.row(t + 1);

        Eigen::MatrixXd ds = acc * detail::dense_weights(layers[l]);  // (steps x n_pre)
        if (!ds.allFinite())
            throw std::runtime_error("backward_unrolled: non-finite gradient at spike layer " +
                                     std::to_string(l));
        gt.per_layer_variance[l] = detail::entry_variance(ds);
        if (keep_tensors) gt.ds[l] = ds;

        if (l == 0) break;
        // dv^{(l)}[t] = ds^{(l)}[t] o kappa H'(v^{(l)}[t]); ds rows index spike
        // times 0..steps-1, hprime rows index membrane times 1..steps, and
        // ds at time `steps` is zero (nothing downstream), so row r of the
        // new dv (time r+1) pairs ds row r+1 with hprime row r.
        const std::size_t n = layers[l - 1].n_post;
        const float* hp = trace.hprime[l - 1].data();
        Eigen::MatrixXd dv_next = Eigen::MatrixXd::Zero(steps, static_cast<Eigen::Index>(n));
        for (Eigen::Index r = 0; r + 1 < steps; ++r)
            for (Eigen::Index i = 0; i < static_cast<Eigen::Index>(n); ++i)
                dv_next(r, i) = ds(r + 1, i) * surrogate.kappa *
                                static_cast<double>(hp[static_cast<std::size_t>(r) * n +
                                                       static_cast<std::size_t>(i)]);
        dv = std::move(dv_next);
        if (keep_tensors) gt.dv[l - 1] = dv;
    }
    return gt;
}

inline std::vector<double> gradient_variance_per_layer(const GradientTrace& gt) {
    return gt.per_layer_variance;
}

// ---------------------------------------------------------------------------
// Fully smoothed reference network for gradient verification: the spike
// nonlinearity is replaced in the *forward* pass by the surrogate's
// antiderivative, so the backward recursions above are the exact gradient and
// can be checked against central finite differences.

inline double surrogate_antideriv(const SurrogateSpec& s, double x) {
    if (s.shape == SurrogateSpec::Shape::boxcar)
        return s.kappa * (std::clamp(x, -s.b_th, s.b_th) + s.b_th);
    // trapezoidal cumulative of the sampled derivative
    const std::size_t m = s.samples.size();
    const double h = (s.sample_hi - s.sample_lo) / static_cast<double>(m - 1);
    double acc = 0.0, xr = std::min(x, s.sample_hi);
    for (std::size_t j = 1; j < m; ++j) {
        const double a = s.sample_lo + h * (j - 1), b = a + h;
        if (xr <= a) break;
        const double ub = std::min(xr, b);
        const double fb = s.samples[j - 1] + (s.samples[j] - s.samples[j - 1]) * (ub - a) / h;
        acc += 0.5 * (s.samples[j - 1] + fb) * (ub - a);
    }
    return s.kappa * acc;
}

struct SmoothRun {
    double loss = 0.0;               // sum of last-layer membranes over time
    ForwardTrace trace;              // hprime filled for backward_unrolled
};

// Reset-free smoothed forward pass: v[t+1] = alpha v[t] + (1-alpha) I + W s[t],
// s[t+1] = Hs(v[t+1] - V_th), with real-valued input activations s^(0).
inline SmoothRun smooth_forward(const std::vector<LayerTopology>& layers, const LifParams& params,
                                const Eigen::MatrixXd& input_activ,  // (steps x n_in), times 0..T-1
                                const SurrogateSpec& surrogate) {
    const Eigen::Index steps = input_activ.rows();
    const double alpha = params.alpha();
    SmoothRun out;
    out.trace.steps = static_cast<std::size_t>(steps);
    out.trace.hprime.resize(layers.size());

    std::vector<Eigen::MatrixXd> w;
    for (const auto& l : layers) w.push_back(detail::dense_weights(l));

    Eigen::MatrixXd s_prev = input_activ;
    for (std::size_t l = 0; l < layers.size(); ++l) {
        const Eigen::Index n = static_cast<Eigen::Index>(layers[l].n_post);
        out.trace.layer_sizes.push_back(layers[l].n_post);
        out.trace.hprime[l].assign(static_cast<std::size_t>(steps * n), 0.0f);
        Eigen::MatrixXd s_cur = Eigen::MatrixXd::Zero(steps, n);
        Eigen::VectorXd v = Eigen::VectorXd::Zero(n);
        for (Eigen::Index t = 0; t < steps; ++t) {
            v = alpha * v + Eigen::VectorXd::Constant(n, (1.0 - alpha) * params.i_ext) +
                w[l] * s_prev.row(t).transpose();
            // v now holds the membrane at time t+1; rows of hprime/s_cur index
            // times 1..steps (row steps-1 = time steps)
            for (Eigen::Index i = 0; i < n; ++i) {
                out.trace.hprime[l][static_cast<std::size_t>(t * n + i)] =
                    static_cast<float>(surrogate.deriv(v(i), params.v_th));
                s_cur(t, i) = surrogate_antideriv(surrogate, v(i) - params.v_th);
            }
            if (l + 1 == layers.size()) out.loss += v.sum();
        }
        // s_cur rows index times 1..steps; the next layer consumes activations
        // at times 0..steps-1, so shift down one row (time 0 activation is 0).
        s_prev = Eigen::MatrixXd::Zero(steps, n);
        s_prev.bottomRows(steps - 1) = s_cur.topRows(steps - 1);
    }
    return out;
}

}  // namespace snninit
