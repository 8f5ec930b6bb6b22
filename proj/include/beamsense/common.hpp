#pragma once

#include <charconv>
#include <cstdint>
#include <string>

namespace beamsense {

struct Vec2 {
    double x = 0.0;
    double y = 0.0;
};

// splitmix64; used to derive independent per-component seeds from the
// global run seed so that changing one component does not shift the
// random streams of the others.
inline std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t salt) {
    std::uint64_t z = seed + salt * 0x9e3779b97f4a7c15ULL + 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

// Shortest decimal string that round-trips to the same double. Keeps CSV
// output byte-stable across runs and lossless on reload.
inline std::string format_double(double v) {
    char buf[64];
    auto res = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, res.ptr);
}

}  // namespace beamsense
