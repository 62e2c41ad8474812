#include "xtalbench/orientation.hpp"

#include "xtalbench/kernels.hpp"

#include <fmt/format.h>
#include <spdlog/spdlog.h>

#include <cmath>
#include <numbers>

namespace xtalbench {

std::vector<RotationAxis> fibonacci_axes(int n, double angle_deg) {
  if (n < 1) throw ArgumentError(fmt::format("axis count must be >= 1, got {}", n));
  const double golden = (1.0 + std::sqrt(5.0)) / 2.0;
  const double two_pi = 2.0 * std::numbers::pi;
  const double angle = angle_deg * std::numbers::pi / 180.0;
  std::vector<RotationAxis> axes;
  axes.reserve(static_cast<std::size_t>(n));
  for (int k = 0; k < n; ++k) {
    const double z = 1.0 - (2.0 * k + 1.0) / n;
    const double r = std::sqrt(std::max(0.0, 1.0 - z * z));
    const double phi = std::fmod(two_pi * k / golden, two_pi);
    axes.push_back({k, Vec3(r * std::cos(phi), r * std::sin(phi), z), angle});
  }
  return axes;
}

RotationMatrix rodrigues(const RotationAxis& axis) {
  Vec3 u = axis.unit_vector;
  const double norm = u.norm();
  if (std::abs(norm - 1.0) > 1e-12) {
    if (std::abs(norm - 1.0) > 1e-6) {
      throw ArgumentError(fmt::format("rotation axis {} has norm {}, not unit", axis.index, norm));
    }
    spdlog::warn("rotation axis {} has norm {:.12f}; renormalising", axis.index, norm);
    u /= norm;
  }
  Mat3 cross;
  cross << 0, -u.z(), u.y(),
           u.z(), 0, -u.x(),
           -u.y(), u.x(), 0;
  const double c = std::cos(axis.angle_rad), s = std::sin(axis.angle_rad);
  return {Mat3::Identity() * c + (1.0 - c) * (u * u.transpose()) + s * cross};
}

Vec3 centroid(std::span<const Atom> atoms) {
  Vec3 sum = Vec3::Zero();
  for (const auto& a : atoms) sum += a.position;
  return atoms.empty() ? sum : Vec3(sum / static_cast<double>(atoms.size()));
}

Supercell rotate_about_com(const Supercell& cell, const RotationMatrix& rotation) {
  if (rotation.is_identity()) return cell;
  Supercell out = cell;
  const Vec3 c = centroid(cell.atoms);
  out.atoms = kernels::rotate_about(cell.atoms, rotation.m, c);
  out.center = rotation.m * (cell.center - c) + c;
  return out;
}

std::vector<RotationMatrix> pose_rotations(int pose_count, double angle_deg) {
  if (pose_count < 1 || pose_count > kPoseCount) {
    throw ArgumentError(fmt::format("pose count must be in [1, {}], got {}", kPoseCount, pose_count));
  }
  std::vector<RotationMatrix> poses{RotationMatrix::identity()};
  const auto axes = fibonacci_axes(kFibonacciAxisCount, angle_deg);
  for (int k = 0; k + 1 < pose_count; ++k) poses.push_back(rodrigues(axes[static_cast<std::size_t>(k)]));
  return poses;
}

}  // namespace xtalbench
