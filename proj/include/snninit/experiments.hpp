#pragma once

#include <atomic>
#include <cstdlib>
#include <filesystem>
#include <mutex>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "snninit/backprop.hpp"
#include "snninit/init_pipeline.hpp"
#include "snninit/io.hpp"
#include "snninit/membrane_fp.hpp"
#include "snninit/poisson.hpp"
#include "snninit/rate_theory.hpp"
#include "snninit/sim.hpp"

namespace snninit {

struct ExperimentConfig {
    std::string experiment;
    KeyValueTree overrides;
    std::uint64_t seed = 1;
    std::size_t repeats = 0;  // 0 = per-experiment default
    std::string out_dir = ".";
};

inline std::size_t thread_budget() {
    if (const char* s = std::getenv("SNNINIT_THREADS")) {
        const long v = std::atol(s);
        if (v > 0) return static_cast<std::size_t>(v);
    }
    const unsigned hc = std::thread::hardware_concurrency();
    return hc ? hc : 4;
}

namespace detail {

// Runs f(0..count-1) with at most thread_budget() workers; deterministic
// because each job derives everything from its index.
template <class F>
std::vector<double> parallel_map(std::size_t count, F&& f) {
    std::vector<double> out(count);
    const std::size_t workers = std::min(thread_budget(), std::max<std::size_t>(count, 1));
    std::vector<std::thread> pool;
    std::atomic<std::size_t> next{0};
    std::atomic<bool> failed{false};
    std::string error;
    std::mutex err_mu;
    for (std::size_t w = 0; w < workers; ++w)
        pool.emplace_back([&] {
            for (;;) {
                const std::size_t i = next.fetch_add(1);
                if (i >= count || failed.load()) break;
                try {
                    out[i] = f(i);
                } catch (const std::exception& ex) {
                    std::lock_guard<std::mutex> lk(err_mu);
                    error = ex.what();
                    failed = true;
                }
            }
        });
    for (auto& t : pool) t.join();
    if (failed) throw std::runtime_error(error);
    return out;
}

inline std::pair<double, double> mean_se(const std::vector<double>& xs) {
    double m = 0.0;
    for (double x : xs) m += x;
    m /= static_cast<double>(xs.size());
    double ss = 0.0;
    for (double x : xs) ss += (x - m) * (x - m);
    const double se = xs.size() > 1 ? std::sqrt(ss / static_cast<double>(xs.size() - 1) /
                                                static_cast<double>(xs.size()))
                                    : 0.0;
    return {m, se};
}

inline std::vector<double> parse_list(const std::string& csv) {
    std::vector<double> out;
    std::istringstream is(csv);
    is.imbue(std::locale::classic());
    std::string tok;
    while (std::getline(is, tok, ',')) {
        std::istringstream t(tok);
        t.imbue(std::locale::classic());
        double v;
        if (!(t >> v)) throw std::invalid_argument("bad number in list: '" + tok + "'");
        out.push_back(v);
    }
    if (out.empty()) throw std::invalid_argument("empty list");
    return out;
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Shared single-population Monte-Carlo piece used by the sweep experiments.

struct SweepSetup {
    LifParams params;  // dt filled per sweep point
    std::size_t n_in = 0, n_out = 0;
    double input_rate_hz = 0.0;
    WeightSpec spec;
    Correction correction = Correction::none;
    double duration_s = 1.0;
    std::size_t repeats = 10;
    std::vector<double> dt_ms;
    std::uint64_t seed = 1;

    // Effective synapse-event channels for the diffusion moments.
    DiffusionMoments theory_moments() const {
        const double fan = static_cast<double>(n_in) * spec.connection_prob;
        DiffusionMoments m;
        m.mu = params.i_ext + params.tau * fan * input_rate_hz * spec.event_mean();
        m.sigma = std::sqrt(0.5 * params.tau * fan * input_rate_hz * spec.event_second_moment());
        return m;
    }
};

inline double sweep_rate_once(const SweepSetup& s, double dt, std::uint64_t run_seed) {
    LifParams p = s.params.with_dt(dt);
    const LayerTopology topo = LayerTopology::realise(s.n_in, s.n_out, s.spec, mix64(run_seed));
    const std::size_t steps = static_cast<std::size_t>(std::llround(s.duration_s / dt));
    const double prob = std::min(s.input_rate_hz * dt, 1.0);
    SimOptions opts;
    opts.correction = s.correction;
    auto rng = make_stream(run_seed, 0x50153u);
    auto input = [&](std::size_t, std::vector<std::uint32_t>& active) {
        poisson_bin(prob, static_cast<std::uint32_t>(s.n_in), rng, active);
    };
    return run_population(p, topo, steps, input, mix64(run_seed) + 29, opts, {}, false).rate_hz;
}

struct SweepPoint {
    double dt_ms = 0.0, rate_hz = 0.0, rate_se = 0.0;
};

inline std::vector<SweepPoint> run_rate_sweep(const SweepSetup& s) {
    std::vector<SweepPoint> out;
    for (double dt_ms : s.dt_ms) {
        const double dt = dt_ms * 1e-3;
        if (s.input_rate_hz * dt >= 1.0)
            std::cerr << "warning: input generator saturated at dt = " << dt_ms
                      << " ms (rate * dt = " << s.input_rate_hz * dt
                      << " >= 1; each source emits at most one spike per bin)\n";
        auto rates = detail::parallel_map(s.repeats, [&](std::size_t r) {
            return sweep_rate_once(s, dt, make_stream(s.seed, r + 1)());
        });
        const auto [m, se] = detail::mean_se(rates);
        out.push_back({dt_ms, m, se});
    }
    return out;
}

// ---------------------------------------------------------------------------
// Experiment wiring. Every resolved parameter lands in the manifest so a run
// can be reproduced from it byte-for-byte.

namespace detail {

inline LifParams lif_from(const KeyValueTree& cfg, double tau_ms, double i_ext) {
    LifParams p;
    p.tau = cfg.get_double("neuron.tau_ms", tau_ms) * 1e-3;
    p.i_ext = cfg.get_double("neuron.i_ext", i_ext);
    p.v_th = cfg.get_double("neuron.v_th", 1.0);
    p.v_r = cfg.get_double("neuron.v_r", 0.0);
    p.dt = cfg.get_double("run.dt_ms", 1.0) * 1e-3;
    return p;
}

inline void manifest_lif(KeyValueTree& man, const LifParams& p) {
    man.set("neuron.tau_ms", p.tau * 1e3);
    man.set("neuron.i_ext", p.i_ext);
    man.set("neuron.v_th", p.v_th);
    man.set("neuron.v_r", p.v_r);
    man.set("run.dt_ms", p.dt * 1e3);
}

inline std::string join_path(const std::string& dir, const std::string& name) {
    return (std::filesystem::path(dir) / name).string();
}

}  // namespace detail

// Builds the four timestep-sweep experiments from one description. `flavour`
// distinguishes the two-point dual-projection drive (the diffusion
// configuration) from the dense Gaussian drive.
inline void run_sweep_experiment(const ExperimentConfig& cfg, Correction corr) {
    const KeyValueTree& o = cfg.overrides;
    const bool gaussian_default =
        corr == Correction::wiener || corr == Correction::permutation;

    SweepSetup s;
    s.params = detail::lif_from(o, 10.0, 0.8);
    s.input_rate_hz = o.get_double("input.rate_hz", 50.0);
    s.duration_s = o.get_double("run.duration_s", 1.0);
    s.repeats = cfg.repeats ? cfg.repeats : (gaussian_default ? 5 : 10);
    s.seed = cfg.seed;
    s.correction = corr;
    s.dt_ms = detail::parse_list(
        o.get_string("run.dt_ms_list", "0.1,0.5,1,2,5,10,20"));

    const std::string kind = o.get_string("input.weights", gaussian_default ? "gaussian" : "two_point");
    if (kind == "two_point") {
        // half the sources drive excitation, half inhibition
        s.n_in = static_cast<std::size_t>(o.get_double("input.n", 2000));
        s.n_out = static_cast<std::size_t>(o.get_double("population.n", 1000));
        s.spec = WeightSpec::two_point(o.get_double("input.weight", 0.01),
                                       o.get_double("input.conn_prob", 0.5), true);
    } else if (kind == "gaussian") {
        s.n_in = static_cast<std::size_t>(o.get_double("input.n", 2000));
        s.n_out = static_cast<std::size_t>(o.get_double("population.n", 1000));
        s.spec = WeightSpec::gaussian(o.get_double("input.mu_w", 0.0),
                                      o.get_double("input.sigma_w", 0.01),
                                      o.get_double("input.conn_prob", 1.0));
    } else {
        throw std::invalid_argument("input.weights must be 'two_point' or 'gaussian', got '" + kind + "'");
    }

    const double theory = siegert_rate(s.params, s.theory_moments());
    const auto points = run_rate_sweep(s);

    CsvTable t;
    t.columns = {"dt_ms", "rate_hz", "rate_se", "theory_hz"};
    SvgPlot plot(cfg.experiment, "dt (ms)", "rate (Hz)");
    std::vector<double> xs, ys, es, th;
    for (const auto& p : points) {
        t.add_row({p.dt_ms, p.rate_hz, p.rate_se, theory});
        xs.push_back(p.dt_ms);
        ys.push_back(p.rate_hz);
        es.push_back(p.rate_se);
        th.push_back(theory);
    }
    plot.add_series("simulation", xs, ys, es);
    plot.add_series("theory", xs, th);
    write_csv(detail::join_path(cfg.out_dir, cfg.experiment + ".csv"), t);
    plot.save(detail::join_path(cfg.out_dir, cfg.experiment + ".svg"));

    KeyValueTree man;
    man.set("experiment", cfg.experiment);
    man.set("seed", static_cast<std::size_t>(cfg.seed));
    man.set("run.repeats", s.repeats);
    man.set("run.duration_s", s.duration_s);
    detail::manifest_lif(man, s.params);
    man.set("input.n", s.n_in);
    man.set("population.n", s.n_out);
    man.set("input.rate_hz", s.input_rate_hz);
    man.set("input.weights", kind);
    man.set("input.conn_prob", s.spec.connection_prob);
    if (kind == "two_point") man.set("input.weight", s.spec.w);
    else {
        man.set("input.mu_w", s.spec.mu_w);
        man.set("input.sigma_w", s.spec.sigma_w);
    }
    {
        std::string list;
        for (double d : s.dt_ms) list += (list.empty() ? "" : ",") + format_number(d, 10);
        man.set("run.dt_ms_list", list);
    }
    man.set("theory.rate_hz", theory);
    man.save(detail::join_path(cfg.out_dir, cfg.experiment + ".manifest"));
}

// Membrane distributions: analytic stationary and before-reset densities
// against histograms from the corrected simulator.
inline void run_distributions(const ExperimentConfig& cfg) {
    const KeyValueTree& o = cfg.overrides;
    LifParams params = detail::lif_from(o, 10.0, 0.9);
    const std::size_t n_in = static_cast<std::size_t>(o.get_double("input.n", 2000));
    const std::size_t n_out = static_cast<std::size_t>(o.get_double("population.n", 2000));
    const double rate_in = o.get_double("input.rate_hz", 30.0);
    const double sigma_w = o.get_double("input.sigma_w", 0.0096);
    const double duration = o.get_double("run.duration_s", 1.0);
    const double burn_in = o.get_double("run.burn_in_s", 0.2);
    const WeightSpec spec = WeightSpec::gaussian(0.0, sigma_w, 1.0);

    DiffusionMoments m;
    m.mu = params.i_ext;
    m.sigma = std::sqrt(0.5 * params.tau * static_cast<double>(n_in) * rate_in * sigma_w * sigma_w);

    auto [stationary, theory_rate] =
        threshold_integration_lif(params, m, std::min(params.v_r, m.mu) - 6.0 * m.sigma);
    FpGrid grid = FpGrid::around(params, m.sigma);
    MembraneDensity before = fp_before_reset(stationary, m, params, grid);

    // Corrected simulation; histogram on the FP grid span.
    const std::size_t bins = 200;
    const double lo = grid.v_min, hi = grid.v_max, bw = (hi - lo) / bins;
    std::vector<double> hist_pre(bins, 0.0), hist_post(bins, 0.0);
    std::size_t n_pre = 0, n_post = 0;
    const std::size_t steps = static_cast<std::size_t>(std::llround(duration / params.dt));
    const std::size_t skip = static_cast<std::size_t>(std::llround(burn_in / params.dt));
    const LayerTopology topo = LayerTopology::realise(n_in, n_out, spec, mix64(cfg.seed) + 3);
    SimOptions opts;
    opts.correction = Correction::wiener;
    auto rng = make_stream(cfg.seed, 0xd157u);
    const double p_in = std::min(rate_in * params.dt, 1.0);
    auto input = [&](std::size_t, std::vector<std::uint32_t>& active) {
        poisson_bin(p_in, static_cast<std::uint32_t>(n_in), rng, active);
    };
    std::vector<std::uint8_t> spiked_mask(n_out);
    StepObserver obs = [&](std::size_t t, const std::vector<double>& v_pre,
                           const std::vector<std::uint32_t>& spiked) {
        if (t < skip) return;
        std::fill(spiked_mask.begin(), spiked_mask.end(), 0);
        for (auto i : spiked) spiked_mask[i] = 1;
        for (std::size_t i = 0; i < v_pre.size(); ++i) {
            const double vp = v_pre[i];
            if (vp >= lo && vp < hi) {
                ++hist_pre[static_cast<std::size_t>((vp - lo) / bw)];
                ++n_pre;
            }
            const double vq = spiked_mask[i] ? params.v_r : vp;
            if (vq >= lo && vq < hi) {
                ++hist_post[static_cast<std::size_t>((vq - lo) / bw)];
                ++n_post;
            }
        }
    };
    const LayerRun run =
        run_population(params, topo, steps, input, mix64(cfg.seed) + 11, opts, obs, false);

    CsvTable t;
    t.columns = {"v", "stationary_theory", "before_reset_theory", "stationary_sim",
                 "before_reset_sim"};
    for (std::size_t b = 0; b < bins; ++b) {
        const double v = lo + (b + 0.5) * bw;
        t.add_row({v, stationary.at(v), before.at(v),
                   n_post ? hist_post[b] / (static_cast<double>(n_post) * bw) : 0.0,
                   n_pre ? hist_pre[b] / (static_cast<double>(n_pre) * bw) : 0.0});
    }
    write_csv(detail::join_path(cfg.out_dir, "distributions.csv"), t);

    SvgPlot plot("membrane distributions", "v", "density");
    std::vector<double> vx, y1, y2, y3, y4;
    for (const auto& row : t.rows) {
        vx.push_back(row[0]);
        y1.push_back(row[1]);
        y2.push_back(row[2]);
        y3.push_back(row[3]);
        y4.push_back(row[4]);
    }
    plot.add_series("stationary theory", vx, y1);
    plot.add_series("before-reset theory", vx, y2);
    plot.add_series("stationary sim", vx, y3);
    plot.add_series("before-reset sim", vx, y4);
    plot.save(detail::join_path(cfg.out_dir, "distributions.svg"));

    KeyValueTree man;
    man.set("experiment", cfg.experiment);
    man.set("seed", static_cast<std::size_t>(cfg.seed));
    detail::manifest_lif(man, params);
    man.set("input.n", n_in);
    man.set("population.n", n_out);
    man.set("input.rate_hz", rate_in);
    man.set("input.sigma_w", sigma_w);
    man.set("run.duration_s", duration);
    man.set("run.burn_in_s", burn_in);
    man.set("theory.rate_hz", theory_rate);
    man.set("sim.rate_hz", run.rate_hz);
    man.save(detail::join_path(cfg.out_dir, "distributions.manifest"));
}

// 20-layer feed-forward rates with weights from the two-step plan and the
// random-walk correction in simulation.
inline void run_multilayer_rates(const ExperimentConfig& cfg) {
    const KeyValueTree& o = cfg.overrides;
    LifParams params = detail::lif_from(o, 10.0, 0.6);
    const std::size_t n = static_cast<std::size_t>(o.get_double("population.n", 2000));
    const std::size_t n_layers = static_cast<std::size_t>(o.get_double("network.layers", 20));
    const double target = o.get_double("network.target_hz", 50.0);
    const double conn_prob = o.get_double("input.conn_prob", 0.5);
    const double duration = o.get_double("run.duration_s", 1.0);
    const std::size_t repeats = cfg.repeats ? cfg.repeats : 5;

    RateTheta theta;
    theta.params = params;
    theta.input_rate_hz = target;  // input sources fire at the target rate
    theta.fan_in = static_cast<std::size_t>(std::llround(static_cast<double>(n) * conn_prob));
    theta.make_spec = [conn_prob](double x) { return WeightSpec::two_point(x, conn_prob); };
    const double w = solve_weight_sigma(target, theta);

    const std::size_t steps = static_cast<std::size_t>(std::llround(duration / params.dt));
    const double p_in = std::min(target * params.dt, 1.0);

    std::vector<std::vector<double>> rates(repeats);
    auto run_one = [&](std::size_t rep) {
        const std::uint64_t rs = make_stream(cfg.seed, rep + 1)();
        std::vector<LayerTopology> layers;
        for (std::size_t l = 0; l < n_layers; ++l)
            layers.push_back(LayerTopology::realise(n, n, WeightSpec::two_point(w, conn_prob),
                                                    make_stream(rs, l + 100)()));
        bool saturated = false;
        SpikeRaster input =
            poisson_spikes(target, n, steps, params.dt, make_stream(rs, 7)(), &saturated);
        SimOptions opts;
        opts.correction = Correction::random_walk;
        NetworkRun nr = run_network(layers, params, input, opts, make_stream(rs, 9)());
        rates[rep] = nr.layer_rates_hz;
        return 0.0;
    };
    detail::parallel_map(repeats, run_one);

    CsvTable t;
    t.columns = {"layer", "rate_hz", "rate_se", "target_hz", "weight"};
    SvgPlot plot("per-layer firing rate", "layer", "rate (Hz)");
    std::vector<double> xs, ys, es;
    for (std::size_t l = 0; l < n_layers; ++l) {
        std::vector<double> per;
        for (std::size_t r = 0; r < repeats; ++r) per.push_back(rates[r][l]);
        const auto [m, se] = detail::mean_se(per);
        t.add_row({static_cast<double>(l + 1), m, se, target, w});
        xs.push_back(static_cast<double>(l + 1));
        ys.push_back(m);
        es.push_back(se);
    }
    plot.add_series("simulated", xs, ys, es);
    plot.add_series("target", xs, std::vector<double>(n_layers, target));
    write_csv(detail::join_path(cfg.out_dir, "multilayer_rates.csv"), t);
    plot.save(detail::join_path(cfg.out_dir, "multilayer_rates.svg"));

    KeyValueTree man;
    man.set("experiment", cfg.experiment);
    man.set("seed", static_cast<std::size_t>(cfg.seed));
    detail::manifest_lif(man, params);
    man.set("population.n", n);
    man.set("network.layers", n_layers);
    man.set("network.target_hz", target);
    man.set("input.conn_prob", conn_prob);
    man.set("run.duration_s", duration);
    man.set("run.repeats", repeats);
    man.set("plan.weight", w);
    man.save(detail::join_path(cfg.out_dir, "multilayer_rates.manifest"));
}

// Per-layer gradient variance with and without the surrogate-scale
// correction, on the dense-Gaussian deep network.
inline void run_gradient_variance(const ExperimentConfig& cfg) {
    const KeyValueTree& o = cfg.overrides;
    LifParams params = detail::lif_from(o, 10.0, 0.9);
    const std::size_t n = static_cast<std::size_t>(o.get_double("population.n", 2000));
    const std::size_t n_layers = static_cast<std::size_t>(o.get_double("network.layers", 20));
    const double target = o.get_double("network.target_hz", 30.0);
    const double b_th = o.get_double("surrogate.b_th", 0.01);
    const double duration = o.get_double("run.duration_s", 1.0);

    RateTheta theta;
    theta.params = params;
    theta.input_rate_hz = target;
    theta.fan_in = n;
    theta.make_spec = [](double x) { return WeightSpec::gaussian(0.0, x, 1.0); };
    const double sigma_w = solve_weight_sigma(target, theta);
    const KappaResult kr = kappa_for_gradient_flow(sigma_w, theta, SurrogateSpec::boxcar(b_th));

    const std::size_t steps = static_cast<std::size_t>(std::llround(duration / params.dt));
    std::vector<LayerTopology> layers;
    for (std::size_t l = 0; l < n_layers; ++l)
        layers.push_back(LayerTopology::realise(n, n, WeightSpec::gaussian(0.0, sigma_w, 1.0),
                                                make_stream(cfg.seed, l + 100)()));
    bool saturated = false;
    SpikeRaster input =
        poisson_spikes(target, n, steps, params.dt, make_stream(cfg.seed, 7)(), &saturated);
    SimOptions opts;
    opts.correction = Correction::wiener;

    const ForwardTrace trace = forward_unrolled(layers, params, input, opts,
                                                make_stream(cfg.seed, 9)(),
                                                SurrogateSpec::boxcar(b_th));
    const GradientTrace original =
        backward_unrolled(trace, layers, SurrogateSpec::boxcar(b_th, 1.0), params);
    const GradientTrace corrected =
        backward_unrolled(trace, layers, SurrogateSpec::boxcar(b_th, kr.kappa), params);

    CsvTable t;
    t.columns = {"layer", "var_ds_corrected", "var_ds_original", "rate_hz"};
    SvgPlot plot("gradient variance per layer", "layer", "log10 Var");
    std::vector<double> xs, yc, yo;
    for (std::size_t l = 0; l < n_layers; ++l) {
        t.add_row({static_cast<double>(l), corrected.per_layer_variance[l],
                   original.per_layer_variance[l],
                   l > 0 ? trace.layer_rates_hz[l - 1] : target});
        xs.push_back(static_cast<double>(l));
        yc.push_back(std::log10(std::max(corrected.per_layer_variance[l], 1e-300)));
        yo.push_back(std::log10(std::max(original.per_layer_variance[l], 1e-300)));
    }
    plot.add_series("corrected", xs, yc);
    plot.add_series("original", xs, yo);
    write_csv(detail::join_path(cfg.out_dir, "gradient_variance.csv"), t);
    plot.save(detail::join_path(cfg.out_dir, "gradient_variance.svg"));

    KeyValueTree man;
    man.set("experiment", cfg.experiment);
    man.set("seed", static_cast<std::size_t>(cfg.seed));
    detail::manifest_lif(man, params);
    man.set("population.n", n);
    man.set("network.layers", n_layers);
    man.set("network.target_hz", target);
    man.set("surrogate.b_th", b_th);
    man.set("run.duration_s", duration);
    man.set("plan.sigma_w", sigma_w);
    man.set("plan.kappa", kr.kappa);
    man.set("plan.surrogate_integral", kr.surrogate_integral);
    man.save(detail::join_path(cfg.out_dir, "gradient_variance.manifest"));
}

// Closed-form rate solvers on one input configuration.
inline void run_rate_solver(const ExperimentConfig& cfg) {
    const KeyValueTree& o = cfg.overrides;
    LifParams params = detail::lif_from(o, 10.0, 0.8);
    DiffusionMoments m;
    m.mu = o.get_double("moments.mu", 0.8);
    m.sigma = std::sqrt(o.get_double("moments.sigma2", 0.025));

    const double siegert = siegert_rate(params, m);
    const double ti =
        threshold_integration_lif(params, m, std::min(params.v_r, m.mu) - 6.0 * m.sigma).second;

    CsvTable t;
    t.columns = {"mu", "sigma2", "siegert_hz", "threshold_integration_hz"};
    t.add_row({m.mu, m.sigma * m.sigma, siegert, ti});
    write_csv(detail::join_path(cfg.out_dir, "rate_solver.csv"), t);

    KeyValueTree man;
    man.set("experiment", cfg.experiment);
    detail::manifest_lif(man, params);
    man.set("moments.mu", m.mu);
    man.set("moments.sigma2", m.sigma * m.sigma);
    man.set("result.siegert_hz", siegert);
    man.set("result.threshold_integration_hz", ti);
    man.save(detail::join_path(cfg.out_dir, "rate_solver.manifest"));
}

// Exit codes: 0 success, 2 configuration error, 3 numerical failure.
inline int run_experiment(const ExperimentConfig& cfg) {
    try {
        std::filesystem::create_directories(cfg.out_dir);
        if (cfg.experiment == "collapse-sweep")
            run_sweep_experiment(cfg, Correction::none);
        else if (cfg.experiment == "rw-correct")
            run_sweep_experiment(cfg, Correction::random_walk);
        else if (cfg.experiment == "wiener-correct")
            run_sweep_experiment(cfg, Correction::wiener);
        else if (cfg.experiment == "permutation-correct")
            run_sweep_experiment(cfg, Correction::permutation);
        else if (cfg.experiment == "distributions")
            run_distributions(cfg);
        else if (cfg.experiment == "multilayer-rates")
            run_multilayer_rates(cfg);
        else if (cfg.experiment == "gradient-variance")
            run_gradient_variance(cfg);
        else if (cfg.experiment == "rate-solver")
            run_rate_solver(cfg);
        else {
            std::cerr << "error: unknown experiment '" << cfg.experiment << "'\n";
            return 2;
        }
    } catch (const std::invalid_argument& ex) {
        std::cerr << "config error (" << cfg.experiment << "): " << ex.what() << '\n';
        return 2;
    } catch (const std::exception& ex) {
        std::cerr << "numerical failure (" << cfg.experiment << "): " << ex.what() << '\n';
        return 3;
    }
    return 0;
}

}  // namespace snninit
