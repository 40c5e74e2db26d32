#pragma once

#include <cstdint>
#include <functional>
#include <random>
#include <stdexcept>
#include <vector>

#include "snninit/correction.hpp"
#include "snninit/lif.hpp"
#include "snninit/poisson.hpp"
#include "snninit/raster.hpp"
#include "snninit/rng.hpp"
#include "snninit/weights.hpp"

namespace snninit {

// Where within the step the bin's input spikes are placed. interval_start is
// the default (no within-step decay on the inputs); interval_end applies the
// full step's decay to them and exists only to reproduce the collapse-to-zero
// behaviour of end-of-interval simulators.
enum class SpikeTiming { interval_start, interval_end };

struct SimOptions {
    Correction correction = Correction::none;
    SpikeTiming timing = SpikeTiming::interval_start;
    bool barrier_alpha_bar = false;  // negative-control barrier decay
    bool record_inputs = false;      // keep per-bin counts in the output raster
};

struct SimState {
    std::vector<double> v;
    std::mt19937_64 correction_rng;

    static SimState start(std::size_t n, double v0, std::uint64_t seed) {
        SimState s;
        s.v.assign(n, v0);
        s.correction_rng = make_stream(seed, 0xc053c7ed);
        return s;
    }
};

// Per-step scratch, reused across steps to avoid reallocation.
struct StepWorkspace {
    std::vector<double> net;
    std::vector<std::uint16_t> n_exc, n_inh;
    std::vector<std::vector<double>> events;  // permutation correction only

    void prepare(std::size_t n, bool need_counts, Correction c) {
        net.assign(n, 0.0);
        if (need_counts) {
            n_exc.assign(n, 0);
            n_inh.assign(n, 0);
        }
        if (c == Correction::permutation && events.size() != n) events.resize(n);
    }
};

struct StepStats {
    std::size_t spikes = 0;            // total spikes this step
    std::size_t corrected_spikes = 0;  // subset added by the correction
};

// Advances one population by one bin. active_pre lists the presynaptic
// sources that fired this bin. If v_pre_reset is non-null it receives the
// membrane value after integration but before any reset (n_post entries).
inline StepStats step_population(SimState& state, const LifParams& params,
                                 const LayerTopology& topo,
                                 const std::vector<std::uint32_t>& active_pre,
                                 const SimOptions& opts, StepWorkspace& ws,
                                 std::vector<std::uint32_t>& spiked,
                                 double* v_pre_reset = nullptr) {
    const std::size_t n = topo.n_post;
    if (state.v.size() != n)
        throw std::invalid_argument("step_population: state dimension does not match n_post");

    const bool need_counts = opts.correction != Correction::none || opts.record_inputs;
    ws.prepare(n, need_counts, opts.correction);
    if (opts.correction == Correction::permutation)
        for (auto& e : ws.events) e.clear();

    for (auto src : active_pre) {
        if (src >= topo.n_pre) throw std::invalid_argument("step_population: source index out of range");
        for (const auto& syn : topo.out[src]) {
            ws.net[syn.target] += syn.weight;
            if (need_counts) {
                if (syn.weight > 0.0)
                    ++ws.n_exc[syn.target];
                else if (syn.weight < 0.0)
                    ++ws.n_inh[syn.target];
            }
            if (opts.correction == Correction::permutation) ws.events[syn.target].push_back(syn.weight);
        }
    }

    const double alpha = params.alpha();
    const double bias = (1.0 - alpha) * params.i_ext;
    const double input_scale = (opts.timing == SpikeTiming::interval_end) ? alpha : 1.0;
    const double mu_w = topo.spec.event_mean();
    const double sd_w = topo.spec.event_sd();

    StepStats stats;
    spiked.clear();
    for (std::size_t i = 0; i < n; ++i) {
        const double v_prev = state.v[i];
        const double v_det = alpha * v_prev + bias;
        const double v_new = v_det + input_scale * ws.net[i];
        if (v_pre_reset) v_pre_reset[i] = v_new;

        bool fire = v_new >= params.v_th;
        if (!fire && opts.correction != Correction::none) {
            const std::int64_t n_events = ws.n_exc[i] + ws.n_inh[i];
            double p = 0.0;
            switch (opts.correction) {
                case Correction::random_walk: {
                    RwQuery q;
                    q.n_exc = ws.n_exc[i];
                    q.n_inh = ws.n_inh[i];
                    q.steps_needed =
                        rw_barrier(params, v_prev, topo.spec.w, opts.barrier_alpha_bar);
                    if (q.steps_needed <= 0)
                        p = 1.0;
                    else if (n_events > 0)
                        p = rw_spike_probability(q);
                    break;
                }
                case Correction::wiener: {
                    if (n_events > 0 && sd_w > 0.0)
                        p = wiener_spike_probability(wiener_query_from_step(
                            params, v_prev, mu_w, sd_w, n_events, ws.net[i],
                            opts.barrier_alpha_bar));
                    break;
                }
                case Correction::permutation: {
                    if (permutation_step(v_det, ws.events[i], params.v_th, state.correction_rng))
                        p = 1.0;
                    break;
                }
                default: break;
            }
            if (p > 0.0) {
                if (opts.correction == Correction::permutation)
                    fire = true;  // already resolved by sampling a permutation
                else
                    fire = uniform01(state.correction_rng) < p;
                if (fire) ++stats.corrected_spikes;
            }
        }

        if (fire) {
            state.v[i] = params.v_r;
            spiked.push_back(static_cast<std::uint32_t>(i));
            ++stats.spikes;
        } else {
            state.v[i] = v_new;
        }
    }
    return stats;
}

// Optional per-step observer: (t, pre-reset membrane values, spiked indices).
using StepObserver =
    std::function<void(std::size_t, const std::vector<double>&, const std::vector<std::uint32_t>&)>;

struct LayerRun {
    SpikeRaster raster;
    std::size_t corrected_spikes = 0;
    double rate_hz = 0.0;
};

// Runs one population for 'steps' bins with a per-bin input callback that
// fills the active-source list. Used both directly (streaming fine-dt runs
// that would not fit in a raster) and by run_network.
template <class InputFn>
LayerRun run_population(const LifParams& params, const LayerTopology& topo, std::size_t steps,
                        InputFn&& input_fn, std::uint64_t seed, const SimOptions& opts,
                        const StepObserver& observe = {}, bool keep_raster = true) {
    params.validate();
    LayerRun out;
    if (keep_raster) out.raster = SpikeRaster(topo.n_post, steps, params.dt, opts.record_inputs);
    SimState state = SimState::start(topo.n_post, params.v_r, seed);
    StepWorkspace ws;
    std::vector<std::uint32_t> active, spiked;
    std::vector<double> v_pre(observe ? topo.n_post : 0);
    std::size_t total_spikes = 0;

    for (std::size_t t = 0; t < steps; ++t) {
        active.clear();
        input_fn(t, active);
        StepStats st = step_population(state, params, topo, active, opts, ws, spiked,
                                       observe ? v_pre.data() : nullptr);
        total_spikes += st.spikes;
        out.corrected_spikes += st.corrected_spikes;
        if (keep_raster) {
            auto* row = out.raster.spikes.data() + t * topo.n_post;
            for (auto i : spiked) row[i] = 1;
            if (opts.record_inputs) {
                std::copy(ws.n_exc.begin(), ws.n_exc.end(),
                          out.raster.exc_count.begin() + t * topo.n_post);
                std::copy(ws.n_inh.begin(), ws.n_inh.end(),
                          out.raster.inh_count.begin() + t * topo.n_post);
                for (std::size_t i = 0; i < topo.n_post; ++i)
                    out.raster.net_input[t * topo.n_post + i] = static_cast<float>(ws.net[i]);
            }
        }
        if (observe) observe(t, v_pre, spiked);
    }
    out.rate_hz = static_cast<double>(total_spikes) /
                  (static_cast<double>(topo.n_post) * static_cast<double>(steps) * params.dt);
    return out;
}

struct NetworkRun {
    std::vector<SpikeRaster> layers;
    std::vector<double> layer_rates_hz;
    std::vector<std::size_t> corrected_spikes;
};

// Feed-forward chain: layer 0 consumes the input raster, layer l consumes the
// spikes of layer l-1. Deterministic given the seed.
inline NetworkRun run_network(const std::vector<LayerTopology>& layers, const LifParams& params,
                              const SpikeRaster& input, const SimOptions& opts, std::uint64_t seed,
                              const std::vector<StepObserver>& observers = {}) {
    NetworkRun run;
    const SpikeRaster* prev = &input;
    for (std::size_t l = 0; l < layers.size(); ++l) {
        if (layers[l].n_pre != prev->n)
            throw std::invalid_argument("run_network: layer dimension chain mismatch");
        const SpikeRaster& src = *prev;
        auto feed = [&src](std::size_t t, std::vector<std::uint32_t>& active) {
            const std::uint8_t* row = src.spikes.data() + t * src.n;
            for (std::size_t i = 0; i < src.n; ++i)
                if (row[i]) active.push_back(static_cast<std::uint32_t>(i));
        };
        StepObserver obs = (l < observers.size()) ? observers[l] : StepObserver{};
        LayerRun lr = run_population(params, layers[l], input.steps, feed, mix64(seed) + l, opts, obs);
        run.layer_rates_hz.push_back(lr.rate_hz);
        run.corrected_spikes.push_back(lr.corrected_spikes);
        run.layers.push_back(std::move(lr.raster));
        prev = &run.layers.back();
    }
    return run;
}

}  // namespace snninit
