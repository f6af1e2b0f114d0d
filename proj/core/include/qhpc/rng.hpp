#pragma once

#include <cstdint>
#include <string_view>

namespace qhpc {

// SplitMix64. Chosen over std::mt19937_64 + distributions because its output
// is fully specified, so identical seeds give identical streams on every
// platform and standard library.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : state_(seed) {}

    std::uint64_t next_u64() {
        state_ += 0x9E3779B97F4A7C15ull;
        std::uint64_t z = state_;
        z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
        z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
        return z ^ (z >> 31);
    }

    // Uniform in [0, 1) with 53 bits of precision.
    double next_double() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

private:
    std::uint64_t state_;
};

namespace detail {
inline std::uint64_t mix64(std::uint64_t z) {
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
}
}  // namespace detail

inline std::uint64_t hash_combine(std::uint64_t seed, std::uint64_t v) {
    return detail::mix64(seed ^ (v + 0x9E3779B97F4A7C15ull + (seed << 6) + (seed >> 2)));
}

// FNV-1a, for deriving streams from task identifiers.
inline std::uint64_t hash_str(std::string_view s) {
    std::uint64_t h = 0xCBF29CE484222325ull;
    for (unsigned char c : s) {
        h ^= c;
        h *= 0x100000001B3ull;
    }
    return h;
}

// Independent substream for (seed, index), e.g. one stream per shot.
inline std::uint64_t derive_stream(std::uint64_t seed, std::uint64_t index) {
    return hash_combine(seed, index);
}

inline std::uint64_t derive_stream(std::uint64_t seed, std::string_view name, std::uint64_t index) {
    return hash_combine(hash_combine(seed, hash_str(name)), index);
}

}  // namespace qhpc
