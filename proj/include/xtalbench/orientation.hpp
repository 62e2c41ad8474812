#pragma once

#include "xtalbench/common.hpp"
#include "xtalbench/supercell.hpp"

#include <span>
#include <vector>

namespace xtalbench {

inline constexpr double kDefaultRotationDegrees = 30.0;
inline constexpr int kFibonacciAxisCount = 9;
inline constexpr int kPoseCount = 10;  // native pose + one per Fibonacci axis

struct RotationAxis {
  int index = 0;
  Vec3 unit_vector = Vec3::UnitZ();
  double angle_rad = kDefaultRotationDegrees * 3.14159265358979323846 / 180.0;
};

/// Fibonacci-sphere axes: z_k = 1 - (2k+1)/n, r_k = sqrt(1 - z_k^2),
/// phi_k = 2 pi k / golden-ratio (mod 2 pi). Throws ArgumentError for n < 1.
std::vector<RotationAxis> fibonacci_axes(int n, double angle_deg = kDefaultRotationDegrees);

struct RotationMatrix {
  Mat3 m = Mat3::Identity();

  static RotationMatrix identity() { return {}; }
  bool is_identity() const { return m == Mat3::Identity(); }
  RotationMatrix transpose() const { return {m.transpose()}; }
};

/// Rodrigues: R = I cos t + (1 - cos t) u u^T + sin t [u]_x.
/// An axis within 1e-6 of unit length is renormalised with a warning;
/// anything further off throws ArgumentError.
RotationMatrix rodrigues(const RotationAxis& axis);

/// Unweighted centroid (1/N) sum r_i, used as the rotation centre. Atoms
/// are not weighted by mass.
Vec3 centroid(std::span<const Atom> atoms);

/// r -> R (r - c) + c about the geometric centroid c. Identity rotations
/// return the input unchanged.
Supercell rotate_about_com(const Supercell& cell, const RotationMatrix& rotation);

/// Pose 0 is the identity; pose k in 1..9 rotates about axis k-1 of the
/// nine-point Fibonacci set. The first `pose_count` poses are returned.
std::vector<RotationMatrix> pose_rotations(int pose_count = kPoseCount,
                                           double angle_deg = kDefaultRotationDegrees);

}  // namespace xtalbench
