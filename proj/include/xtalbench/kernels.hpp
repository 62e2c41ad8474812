#pragma once

// Data-parallel inner loops. Each OpenMP kernel has a `_serial` reference
// twin with the same per-element operation order; tests require the two to
// agree bit for bit, and bench/ compares their throughput.

#include "xtalbench/common.hpp"
#include "xtalbench/materials.hpp"

#include <array>
#include <span>
#include <vector>

namespace xtalbench::kernels {

struct MotifSite {
  std::string element;
  Vec3 offset = Vec3::Zero();  // Cartesian, angstrom
};

/// Inclusive integer range per translation axis.
struct IndexBox {
  std::array<int, 3> lo{0, 0, 0};
  std::array<int, 3> hi{0, 0, 0};

  long long size() const {
    long long n = 1;
    for (int i = 0; i < 3; ++i) n *= hi[i] - lo[i] + 1;
    return n;
  }
};

/// Enumerates translations·n + motif offset over the box in lexicographic
/// (n1, n2, n3, motif index) order, keeping points with |r - center| <= radius.
std::vector<Atom> retain_within_sphere(const Mat3& translations, std::span<const MotifSite> motif,
                                       const IndexBox& box, const Vec3& center, double radius);
std::vector<Atom> retain_within_sphere_serial(const Mat3& translations, std::span<const MotifSite> motif,
                                              const IndexBox& box, const Vec3& center, double radius);

/// Mean over atoms of the distance to the nearest other atom. Exhaustive O(N^2).
double mean_nearest_neighbor(std::span<const Atom> atoms);
double mean_nearest_neighbor_serial(std::span<const Atom> atoms);

/// r -> R (r - c) + c for every atom.
std::vector<Atom> rotate_about(std::span<const Atom> atoms, const Mat3& rotation, const Vec3& center);
std::vector<Atom> rotate_about_serial(std::span<const Atom> atoms, const Mat3& rotation, const Vec3& center);

/// A blurred disk in pixel coordinates (x right, y down, pixel centres at +0.5).
struct Disk {
  double cx = 0, cy = 0;
  double radius = 0;
  double sigma = 0.5;
  Rgb color;
};

/// Linear-float RGB canvas, row-major, 3 channels.
struct Canvas {
  int width = 0, height = 0;
  std::vector<double> rgb;

  Canvas(int w, int h, Rgb background);
};

/// Composites disks in the given order (first = farthest) with coverage
/// 0.5 * erfc((d - radius) / (sigma * sqrt 2)), truncated at radius + 4 sigma.
void composite_disks(Canvas& canvas, std::span<const Disk> disks);
void composite_disks_serial(Canvas& canvas, std::span<const Disk> disks);

}  // namespace xtalbench::kernels
