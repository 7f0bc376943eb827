#pragma once

#include <cstdint>
#include <cstring>
#include <random>
#include <string_view>

namespace aci::rng {

// splitmix64 step; used to derive independent substreams from one seed.
inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

inline std::uint64_t mix(std::uint64_t a, std::uint64_t b) {
    return splitmix64(a ^ splitmix64(b));
}

template <typename... Rest>
std::uint64_t mix(std::uint64_t a, std::uint64_t b, Rest... rest) {
    return mix(mix(a, b), static_cast<std::uint64_t>(rest)...);
}

inline std::uint64_t hash_bytes(const void* data, std::size_t len) {
    // FNV-1a
    const auto* p = static_cast<const unsigned char*>(data);
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (std::size_t i = 0; i < len; ++i) {
        h ^= p[i];
        h *= 0x100000001b3ULL;
    }
    return h;
}

inline std::uint64_t hash_string(std::string_view s) {
    return hash_bytes(s.data(), s.size());
}

inline std::mt19937_64 engine(std::uint64_t seed) {
    return std::mt19937_64(seed);
}

}  // namespace aci::rng
