#pragma once

#include <cstdint>
#include <random>
#include <stdexcept>

#include "snninit/raster.hpp"
#include "snninit/rng.hpp"

namespace snninit {

// Draws which of n sources emit in one bin: Binomial(n, p) count plus a
// uniform choice of distinct sources, equivalent to n independent Bernoullis.
// 'out' is cleared first. p is clipped to 1 (at most one spike per source per
// bin); the caller decides whether clipping deserves a warning.
inline void poisson_bin(double p, std::uint32_t n, std::mt19937_64& rng,
                        std::vector<std::uint32_t>& out) {
    out.clear();
    if (p <= 0.0 || n == 0) return;
    if (p >= 1.0) {
        out.resize(n);
        for (std::uint32_t i = 0; i < n; ++i) out[i] = i;
        return;
    }
    std::binomial_distribution<std::uint32_t> bin(n, p);
    std::uint32_t k = bin(rng);
    if (k == 0) return;
    // Floyd's algorithm for a uniform k-subset of [0, n).
    out.reserve(k);
    std::uniform_int_distribution<std::uint32_t> pick;
    for (std::uint32_t j = n - k; j < n; ++j) {
        std::uint32_t t = std::uniform_int_distribution<std::uint32_t>(0, j)(rng);
        bool dup = false;
        for (auto v : out)
            if (v == t) { dup = true; break; }
        out.push_back(dup ? j : t);
    }
}

// Homogeneous Poisson sources on the simulation grid, one Bernoulli per bin
// with p = rate * dt. If rate * dt exceeds 1 the bin saturates at one spike
// per source; *saturated reports that the generator can no longer represent
// the requested rate.
inline SpikeRaster poisson_spikes(double rate_hz, std::size_t n_sources, std::size_t steps,
                                  double dt, std::uint64_t seed, bool* saturated = nullptr) {
    if (rate_hz < 0.0) throw std::invalid_argument("poisson_spikes: rate must be >= 0");
    if (!(dt > 0.0)) throw std::invalid_argument("poisson_spikes: dt must be > 0");
    const double p = rate_hz * dt;
    if (saturated) *saturated = (p > 1.0);

    SpikeRaster raster(n_sources, steps, dt);
    auto rng = make_stream(seed, 0x90155045ULL);
    std::vector<std::uint32_t> bin;
    for (std::size_t t = 0; t < steps; ++t) {
        poisson_bin(p, static_cast<std::uint32_t>(n_sources), rng, bin);
        auto* row = raster.spikes.data() + t * n_sources;
        for (auto i : bin) row[i] = 1;
    }
    return raster;
}

}  // namespace snninit
