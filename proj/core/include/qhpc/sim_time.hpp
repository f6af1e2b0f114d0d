#pragma once

#include <cmath>
#include <compare>
#include <cstdint>
#include <string>

namespace qhpc {

// Simulated time as an integer count of microseconds. Integer ticks keep
// traces bit-reproducible and make simultaneous-event ties well defined.
struct SimTime {
    std::uint64_t us = 0;

    constexpr SimTime() = default;
    constexpr explicit SimTime(std::uint64_t v) : us(v) {}

    static constexpr SimTime zero() { return SimTime{0}; }

    // Converts a real-valued duration (µs) to ticks, rounding up so a task
    // never finishes earlier than its modeled duration. The small guard
    // absorbs accumulated floating-point error in additive timing formulas.
    static SimTime from_real_us(double v) {
        if (v <= 0.0) return SimTime{0};
        return SimTime{static_cast<std::uint64_t>(std::ceil(v - 1e-6))};
    }

    constexpr auto operator<=>(const SimTime&) const = default;

    constexpr SimTime operator+(SimTime rhs) const { return SimTime{us + rhs.us}; }
    constexpr SimTime& operator+=(SimTime rhs) {
        us += rhs.us;
        return *this;
    }

    std::string str() const { return std::to_string(us) + "us"; }
};

}  // namespace qhpc
