#pragma once

// SI inside the library; Gauss / nm / Angstrom only at the I/O boundary.

#include <numbers>

#include <Eigen/Core>
#include <Eigen/Geometry>

namespace nanolens {

using Vec2 = Eigen::Vector2d;
using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;

/// Vacuum permeability, T*m/A.
inline constexpr double mu0 = 4.0e-7 * std::numbers::pi;

namespace units {
inline constexpr double nm = 1e-9;
inline constexpr double angstrom = 1e-10;
inline constexpr double gauss = 1e-4;
inline constexpr double gauss_per_nm = gauss / nm;              // 1e5 T/m
inline constexpr double gauss_per_angstrom = gauss / angstrom;  // 1e6 T/m
inline constexpr double kHz = 1e3;
inline constexpr double deg = std::numbers::pi / 180.0;
}  // namespace units

}  // namespace nanolens
