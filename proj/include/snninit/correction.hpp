#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <random>
#include <stdexcept>
#include <vector>

#include "snninit/lif.hpp"
#include "snninit/rng.hpp"

namespace snninit {

// Which within-timestep threshold-crossing correction a simulation applies to
// neurons whose end-of-step membrane stayed below threshold.
enum class Correction { none, random_walk, wiener, permutation };

inline const char* to_string(Correction c) {
    switch (c) {
        case Correction::none: return "none";
        case Correction::random_walk: return "random-walk";
        case Correction::wiener: return "wiener";
        case Correction::permutation: return "permutation";
    }
    return "?";
}

// P(X_n = k) for a symmetric +/-1 random walk: C(n, (n+k)/2) 2^-n when k has
// the right parity and |k| <= n, else 0. Log-space so n ~ 1e4 is fine.
inline double random_walk_endpoint_pmf(std::int64_t n, std::int64_t k) {
    if (n < 0) throw std::invalid_argument("random_walk_endpoint_pmf: n < 0");
    if (k < -n || k > n || ((n + k) & 1)) return 0.0;
    const std::int64_t up = (n + k) / 2;
    const double logp = std::lgamma(static_cast<double>(n) + 1.0) -
                        std::lgamma(static_cast<double>(up) + 1.0) -
                        std::lgamma(static_cast<double>(n - up) + 1.0) -
                        static_cast<double>(n) * 0.6931471805599453;
    return std::exp(logp);
}

// One correction query for the exact random-walk result: the neuron received
// n_exc excitatory and n_inh inhibitory spikes of magnitude w and needs a
// running maximum of at least steps_needed net excitatory steps to cross.
struct RwQuery {
    std::int64_t n_exc = 0;       // N
    std::int64_t n_inh = 0;       // M
    std::int64_t steps_needed = 0;  // y

    std::int64_t n() const { return n_exc + n_inh; }
    std::int64_t k() const { return n_exc - n_inh; }
};

// Probability that the within-step running maximum reached the barrier, given
// the walk's endpoint: P(Y_n >= y | X_n = k) by the reflection principle.
inline double rw_spike_probability(const RwQuery& q) {
    if (q.n_exc < 0 || q.n_inh < 0) throw std::invalid_argument("rw_spike_probability: negative counts");
    const std::int64_t n = q.n(), k = q.k(), y = q.steps_needed;
    if (y > q.n_exc) return 0.0;       // never enough excitation
    if (y < k) return 1.0;             // endpoint already beyond the barrier
    const double pk = random_walk_endpoint_pmf(n, k);
    if (pk == 0.0)
        throw std::invalid_argument("rw_spike_probability: endpoint k has probability zero");
    return random_walk_endpoint_pmf(n, 2 * y - k) / pk;
}

// Number of net excitatory steps needed to cross the threshold from the
// step's deterministic membrane value: ceil((v_th - v_det)/w). A result <= 0
// means the deterministic part alone is at or above threshold.
inline std::int64_t rw_barrier(double v_det, double w, double v_th) {
    if (!(w > 0.0)) throw std::invalid_argument("rw_barrier: w must be > 0");
    const double q = (v_th - v_det) / w;
    // absorb floating-point residue so e.g. (1 - 0.7)/0.01 rounds to 30, not 31
    return static_cast<std::int64_t>(std::ceil(q - 1e-9 * std::max(1.0, std::abs(q))));
}

inline std::int64_t rw_barrier(const LifParams& p, double v_prev, double w,
                               bool use_alpha_bar = false) {
    const double a = use_alpha_bar ? p.alpha_bar() : p.alpha();
    return rw_barrier(a * v_prev + (1.0 - p.alpha()) * p.i_ext, w, p.v_th);
}

// Wiener-limit correction query, already rescaled to the unit-variance
// process: barrier m and endpoint w_end in units of sigma_w sqrt(n/dt).
struct WienerQuery {
    double m = 0.0;
    double w_end = 0.0;
    double dt = 1e-3;
};

// P(max_{[0,dt]} W >= m | W_dt = w_end) for a Brownian bridge, with the
// convention that a barrier at or below the start (m <= 0) is a certain
// crossing.
inline double wiener_spike_probability(const WienerQuery& q) {
    if (!(q.dt > 0.0)) throw std::invalid_argument("wiener_spike_probability: dt must be > 0");
    if (q.m <= q.w_end) return 1.0;
    if (q.m <= 0.0) return 1.0;  // barrier already crossed at the step start
    return std::exp(-2.0 * q.m * (q.m - q.w_end) / q.dt);
}

// Builds the rescaled query from raw step quantities: previous membrane,
// delivered-weight statistics (mu_w, sigma_w), number of delivered spikes and
// their summed contribution.
inline WienerQuery wiener_query_from_step(const LifParams& p, double v_prev, double mu_w,
                                          double sigma_w, std::int64_t n_spikes, double net_input,
                                          bool use_alpha_bar = false) {
    if (n_spikes < 1) throw std::invalid_argument("wiener_query_from_step: needs n_spikes >= 1");
    if (!(sigma_w > 0.0)) throw std::invalid_argument("wiener_query_from_step: sigma_w must be > 0");
    const double a = use_alpha_bar ? p.alpha_bar() : p.alpha();
    const double v_det = a * v_prev + (1.0 - p.alpha()) * p.i_ext;
    const double scale = sigma_w * std::sqrt(static_cast<double>(n_spikes) / p.dt);
    WienerQuery q;
    q.m = (p.v_th - v_det - mu_w) / scale;
    q.w_end = (net_input - mu_w) / scale;
    q.dt = p.dt;
    return q;
}

// General-case single-step resolution: spike if the end-of-step value crosses,
// otherwise draw one uniform permutation of the bin's weights and spike if any
// prefix sum crosses. 'weights' is permuted in place.
inline bool permutation_step(double v_det, std::vector<double>& weights, double v_th,
                             std::mt19937_64& rng) {
    double total = 0.0;
    for (double w : weights) total += w;
    if (v_det + total >= v_th) return true;
    if (weights.empty()) return v_det >= v_th;
    std::shuffle(weights.begin(), weights.end(), rng);
    double acc = 0.0;
    for (double w : weights) {
        acc += w;
        if (v_det + acc >= v_th) return true;
    }
    return false;
}

inline bool permutation_step(double v_det, std::vector<double> weights, double v_th,
                             std::uint64_t seed) {
    auto rng = make_stream(seed, 0xa15e11ULL);
    return permutation_step(v_det, weights, v_th, rng);
}

}  // namespace snninit
