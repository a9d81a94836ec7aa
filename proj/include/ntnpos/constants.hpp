#pragma once

#include <numbers>

namespace ntnpos {

inline constexpr double kEarthRadius = 6371.0e3;        // m, spherical Earth
inline constexpr double kEarthMu = 3.986004418e14;      // m^3/s^2
inline constexpr double kSpeedOfLight = 299792458.0;    // m/s
inline constexpr double kBoltzmann = 1.380649e-23;      // J/K
inline constexpr double kPi = std::numbers::pi;

constexpr double deg2rad(double deg) { return deg * kPi / 180.0; }
constexpr double rad2deg(double rad) { return rad * 180.0 / kPi; }

}  // namespace ntnpos
