#pragma once

#include <cstdint>
#include <stdexcept>
#include <vector>

namespace snninit {

// Binary spike record for one population, time-major so that one bin is a
// contiguous slice. Per-bin input bookkeeping (excitatory/inhibitory event
// counts and net delivered input) is optional; the collapse corrections use
// it transiently, tests can ask for it to be kept.
struct SpikeRaster {
    std::size_t n = 0;      // units
    std::size_t steps = 0;  // time bins
    double dt = 1e-3;
    std::vector<std::uint8_t> spikes;       // [t * n + i]
    std::vector<std::uint16_t> exc_count;   // optional, same layout
    std::vector<std::uint16_t> inh_count;   // optional
    std::vector<float> net_input;           // optional

    SpikeRaster() = default;
    SpikeRaster(std::size_t n_, std::size_t steps_, double dt_, bool record_inputs = false)
        : n(n_), steps(steps_), dt(dt_), spikes(n_ * steps_, 0) {
        if (record_inputs) {
            exc_count.assign(n * steps, 0);
            inh_count.assign(n * steps, 0);
            net_input.assign(n * steps, 0.0f);
        }
    }

    std::uint8_t& at(std::size_t t, std::size_t i) { return spikes[t * n + i]; }
    std::uint8_t at(std::size_t t, std::size_t i) const { return spikes[t * n + i]; }

    std::size_t spike_count() const {
        std::size_t c = 0;
        for (auto s : spikes) c += s;
        return c;
    }

    // Population activity aggregated over the whole record [Hz].
    double population_rate() const {
        if (n == 0 || steps == 0) return 0.0;
        return static_cast<double>(spike_count()) / (static_cast<double>(n) * steps * dt);
    }

    std::vector<std::uint32_t> active(std::size_t t) const {
        std::vector<std::uint32_t> idx;
        const std::uint8_t* row = spikes.data() + t * n;
        for (std::size_t i = 0; i < n; ++i)
            if (row[i]) idx.push_back(static_cast<std::uint32_t>(i));
        return idx;
    }
};

}  // namespace snninit
