#pragma once

#include <cstdint>
#include <random>

namespace snninit {

// splitmix64; used to derive independent generator streams from a master seed.
inline std::uint64_t mix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

// Stream-split generator: identical (master, stream) pairs always yield the
// same sequence, independent of how many other streams exist.
inline std::mt19937_64 make_stream(std::uint64_t master, std::uint64_t stream) {
    return std::mt19937_64(mix64(mix64(master) ^ mix64(stream + 0x51ed2701ULL)));
}

inline double uniform01(std::mt19937_64& g) {
    return std::uniform_real_distribution<double>(0.0, 1.0)(g);
}

}  // namespace snninit
