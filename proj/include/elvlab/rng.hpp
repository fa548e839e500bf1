#pragma once

#include <cstdint>
#include <random>
#include <string_view>

namespace elvlab {

// Counter-based seeding: every (seed, stream, index) triple gets its own engine,
// so draws are reproducible regardless of thread scheduling.
inline std::uint64_t splitmix64(std::uint64_t z) {
    z += 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

inline std::uint64_t stream_id(std::string_view name) {
    std::uint64_t h = 1469598103934665603ULL;  // FNV-1a
    for (unsigned char c : name) {
        h ^= c;
        h *= 1099511628211ULL;
    }
    return h;
}

inline std::mt19937_64 draw_engine(std::uint64_t seed, std::string_view stream, std::uint64_t index) {
    std::uint64_t s = splitmix64(seed ^ splitmix64(stream_id(stream) ^ splitmix64(index)));
    return std::mt19937_64(s);
}

inline double uniform(std::mt19937_64& g, double lo, double hi) {
    return std::uniform_real_distribution<double>(lo, hi)(g);
}

}  // namespace elvlab
