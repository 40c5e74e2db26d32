#pragma once

#include <cmath>
#include <cstdint>
#include <numeric>
#include <random>
#include <stdexcept>
#include <vector>

#include "snninit/rng.hpp"

namespace snninit {

enum class WeightKind { two_point, gaussian, exponential_pair, discrete_types };

// Distribution of synaptic weights plus the wiring probability.
struct WeightSpec {
    WeightKind kind = WeightKind::two_point;
    double connection_prob = 1.0;

    // two_point: magnitude w. signed mode draws one connection per (pre, post)
    // pair with sign +/-w equiprobable; paired mode dedicates the first half
    // of the sources to excitation (+w) and the second half to inhibition
    // (-w). Each excitatory connection (drawn with connection_prob) is
    // mirrored by an inhibitory one from the matching second-half source, so
    // per-target drift is exactly zero while the excitatory and inhibitory
    // event streams stay statistically independent — if one source drove both
    // signs, simultaneous +w/-w deliveries would cancel and halve the input
    // variance.
    double w = 0.0;
    bool paired = false;

    // gaussian
    double mu_w = 0.0;
    double sigma_w = 0.0;

    // exponential_pair: amplitudes exponentially distributed with means w_e
    // (excitatory, > 0) and w_i (inhibitory, < 0); a realised connection is
    // excitatory or inhibitory with probability 1/2.
    double w_e = 0.0;
    double w_i = 0.0;

    // discrete_types: weight w_k with proportion delta_k, sum(delta_k) = 1.
    std::vector<double> type_prob;
    std::vector<double> type_weight;

    static WeightSpec two_point(double w, double connection_prob, bool paired = false) {
        WeightSpec s;
        s.kind = WeightKind::two_point;
        s.w = w;
        s.connection_prob = connection_prob;
        s.paired = paired;
        return s;
    }
    static WeightSpec gaussian(double mu, double sigma, double connection_prob = 1.0) {
        WeightSpec s;
        s.kind = WeightKind::gaussian;
        s.mu_w = mu;
        s.sigma_w = sigma;
        s.connection_prob = connection_prob;
        return s;
    }
    static WeightSpec exponential_pair(double w_e, double w_i, double connection_prob = 1.0) {
        WeightSpec s;
        s.kind = WeightKind::exponential_pair;
        s.w_e = w_e;
        s.w_i = w_i;
        s.connection_prob = connection_prob;
        return s;
    }
    static WeightSpec discrete(std::vector<double> prob, std::vector<double> weight,
                               double connection_prob = 1.0) {
        WeightSpec s;
        s.kind = WeightKind::discrete_types;
        s.type_prob = std::move(prob);
        s.type_weight = std::move(weight);
        s.connection_prob = connection_prob;
        return s;
    }

    void validate() const {
        if (connection_prob < 0.0 || connection_prob > 1.0)
            throw std::invalid_argument("WeightSpec: connection_prob outside [0, 1]");
        switch (kind) {
            case WeightKind::two_point:
                if (!(w > 0.0)) throw std::invalid_argument("WeightSpec: two-point requires w > 0");
                break;
            case WeightKind::gaussian:
                if (!(sigma_w >= 0.0)) throw std::invalid_argument("WeightSpec: sigma_w < 0");
                break;
            case WeightKind::exponential_pair:
                if (!(w_e > 0.0 && w_i < 0.0))
                    throw std::invalid_argument("WeightSpec: exponential pair requires w_e > 0 > w_i");
                break;
            case WeightKind::discrete_types: {
                if (type_prob.size() != type_weight.size() || type_prob.empty())
                    throw std::invalid_argument("WeightSpec: discrete types size mismatch");
                double total = 0.0;
                for (double p : type_prob) {
                    if (!(p > 0.0)) throw std::invalid_argument("WeightSpec: delta_k must be > 0");
                    total += p;
                }
                if (std::abs(total - 1.0) > 1e-9)
                    throw std::invalid_argument("WeightSpec: delta_k must sum to 1");
                break;
            }
        }
    }

    // Mean of a single delivered weight (conditioned on the synapse existing).
    double event_mean() const {
        switch (kind) {
            case WeightKind::two_point: return 0.0;
            case WeightKind::gaussian: return mu_w;
            case WeightKind::exponential_pair: return 0.5 * (w_e + w_i);
            case WeightKind::discrete_types:
                return std::inner_product(type_prob.begin(), type_prob.end(), type_weight.begin(), 0.0);
        }
        return 0.0;
    }

    double event_second_moment() const {
        switch (kind) {
            case WeightKind::two_point: return w * w;
            case WeightKind::gaussian: return mu_w * mu_w + sigma_w * sigma_w;
            case WeightKind::exponential_pair: return 0.5 * (2.0 * w_e * w_e + 2.0 * w_i * w_i);
            case WeightKind::discrete_types: {
                double m2 = 0.0;
                for (std::size_t k = 0; k < type_prob.size(); ++k)
                    m2 += type_prob[k] * type_weight[k] * type_weight[k];
                return m2;
            }
        }
        return 0.0;
    }

    double event_sd() const {
        const double m = event_mean();
        return std::sqrt(std::max(0.0, event_second_moment() - m * m));
    }
};

struct Synapse {
    std::uint32_t target;
    double weight;
};

// Realised wiring between two layers, stored per presynaptic source so spike
// delivery walks only the columns of sources that fired.
struct LayerTopology {
    std::size_t n_pre = 0;
    std::size_t n_post = 0;
    WeightSpec spec;
    std::uint64_t seed = 0;
    std::vector<std::vector<Synapse>> out;  // one list per source
    std::size_t n_synapses = 0;

    static LayerTopology realise(std::size_t n_pre, std::size_t n_post, const WeightSpec& spec,
                                 std::uint64_t seed) {
        spec.validate();
        LayerTopology topo;
        topo.n_pre = n_pre;
        topo.n_post = n_post;
        topo.spec = spec;
        topo.seed = seed;
        topo.out.resize(n_pre);

        auto rng = make_stream(seed, 0x7e19a3f2c55d01ULL);
        std::uniform_real_distribution<double> uni(0.0, 1.0);
        std::normal_distribution<double> gauss(spec.mu_w, spec.sigma_w);
        std::exponential_distribution<double> expo(1.0);
        std::discrete_distribution<std::size_t> type_pick(spec.type_prob.begin(), spec.type_prob.end());

        if (spec.kind == WeightKind::two_point && spec.paired) {
            // Each excitatory connection from source i < n_pre/2 is mirrored
            // by an inhibitory connection from source i + n_pre/2, so every
            // target sees exactly as many +w as -w synapses (zero net drift
            // per neuron) while the two event streams stay independent.
            if (n_pre % 2 != 0)
                throw std::invalid_argument("LayerTopology: paired wiring needs an even n_pre");
            const std::size_t half = n_pre / 2;
            for (std::size_t i = 0; i < half; ++i) {
                for (std::size_t j = 0; j < n_post; ++j) {
                    if (uni(rng) >= spec.connection_prob) continue;
                    topo.out[i].push_back({static_cast<std::uint32_t>(j), spec.w});
                    topo.out[i + half].push_back({static_cast<std::uint32_t>(j), -spec.w});
                }
            }
            for (const auto& col : topo.out) topo.n_synapses += col.size();
            return topo;
        }

        for (std::size_t i = 0; i < n_pre; ++i) {
            auto& col = topo.out[i];
            for (std::size_t j = 0; j < n_post; ++j) {
                if (uni(rng) >= spec.connection_prob) continue;
                double w = 0.0;
                switch (spec.kind) {
                    case WeightKind::two_point:
                        w = (uni(rng) < 0.5) ? spec.w : -spec.w;
                        break;
                    case WeightKind::gaussian: w = gauss(rng); break;
                    case WeightKind::exponential_pair:
                        w = (uni(rng) < 0.5) ? spec.w_e * expo(rng) : spec.w_i * expo(rng);
                        break;
                    case WeightKind::discrete_types: w = spec.type_weight[type_pick(rng)]; break;
                }
                col.push_back({static_cast<std::uint32_t>(j), w});
            }
            topo.n_synapses += col.size();
        }
        return topo;
    }

    // Dense matrix view (n_post x n_pre, column-major, zeros where unconnected).
    // Only valid when no (pre, post) pair carries more than one synapse.
    std::vector<double> dense() const {
        std::vector<double> m(n_post * n_pre, 0.0);
        for (std::size_t i = 0; i < n_pre; ++i)
            for (const auto& s : out[i]) m[i * n_post + s.target] += s.weight;
        return m;
    }
};

}  // namespace snninit
