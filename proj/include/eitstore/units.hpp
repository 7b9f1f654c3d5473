#pragma once

#include <cmath>
#include <numbers>

namespace eitstore {

inline constexpr double two_pi = 2.0 * std::numbers::pi;

// All internal rates and detunings are angular frequencies (rad/s).
// Configuration files and most quoted values are ordinary frequencies
// ("value/2pi" in Hz); conversion happens exactly once at load.
constexpr double hz_to_angular(double hz) { return two_pi * hz; }
constexpr double angular_to_hz(double w) { return w / two_pi; }

// Wrap an angle into (-pi, pi].
inline double wrap_angle(double phi) {
    double w = std::remainder(phi, two_pi);
    if (w <= -std::numbers::pi) w += two_pi;
    return w;
}

}  // namespace eitstore
