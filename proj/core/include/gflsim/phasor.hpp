#pragma once

#include <cmath>
#include <complex>
#include <numbers>

namespace gfl {

/// Per-unit complex electrical quantity at fundamental frequency.
using Phasor = std::complex<double>;

inline constexpr double pi = std::numbers::pi;

[[nodiscard]] inline double mag(const Phasor& z) { return std::abs(z); }

/// Angle in radians, in (-pi, pi].
[[nodiscard]] inline double ang(const Phasor& z) {
    double a = std::arg(z);
    if (a <= -pi) a += 2.0 * pi;
    return a;
}

[[nodiscard]] inline Phasor from_polar(double magnitude, double angle_rad) {
    return std::polar(magnitude, angle_rad);
}

[[nodiscard]] inline double deg(double rad) { return rad * 180.0 / pi; }
[[nodiscard]] inline double rad(double degrees) { return degrees * pi / 180.0; }

/// Wrap an angle into (-pi, pi].
[[nodiscard]] inline double wrap_angle(double a) {
    a = std::remainder(a, 2.0 * pi);
    if (a <= -pi) a += 2.0 * pi;
    return a;
}

/// Parallel combination z1*z2/(z1+z2). An (effectively) open branch
/// passes the other one through.
[[nodiscard]] inline Phasor parallel(const Phasor& z1, const Phasor& z2) {
    constexpr double open_circuit = 1e12;
    const double m1 = std::abs(z1);
    const double m2 = std::abs(z2);
    if (m1 >= open_circuit || !std::isfinite(m1)) return z2;
    if (m2 >= open_circuit || !std::isfinite(m2)) return z1;
    if (m1 == 0.0 || m2 == 0.0) return {0.0, 0.0};
    return z1 * z2 / (z1 + z2);
}

}  // namespace gfl
