#pragma once

#include "xtalbench/common.hpp"
#include "xtalbench/kernels.hpp"
#include "xtalbench/materials.hpp"

#include <array>
#include <string>
#include <vector>

namespace xtalbench {

/// Primitive lattice vectors a1, a2, a3 as matrix columns (angstrom).
struct LatticeMatrix {
  Mat3 columns = Mat3::Identity();

  Vec3 vector(int i) const { return columns.col(i); }
  double volume() const { return std::abs(columns.determinant()); }
};

/// FCC primitive vectors (a/2)(0,1,1), (a/2)(1,0,1), (a/2)(1,1,0).
LatticeMatrix fcc_lattice(double a);

/// Standard cell-parameter construction: a1 along x, a2 in the xy-plane.
/// Throws GenerationError for degenerate parameters.
LatticeMatrix lattice_from_parameters(double a, double b, double c,
                                      double alpha_deg, double beta_deg, double gamma_deg);

LatticeMatrix lattice_matrix(const MaterialSpec& spec);

inline constexpr int kMultiplicityDeterminantLimit = 8;

/// Diagonal integer multiplicity S = diag(s1, s2, s3).
struct MultiplicityMatrix {
  std::array<int, 3> diagonal{1, 1, 1};

  int determinant() const { return diagonal[0] * diagonal[1] * diagonal[2]; }
  Eigen::Matrix3i matrix() const;
  bool operator==(const MultiplicityMatrix&) const = default;
};

struct MultiplicitySelection {
  MultiplicityMatrix s;
  bool exceeds_determinant_limit = false;  // det(S) > 8 was needed for coverage
};

/// Smallest diagonal S whose parallelepiped A·S can enclose a sphere of the
/// given radius, i.e. every face-to-face width of A·S is at least 2R.
MultiplicitySelection select_multiplicity(const LatticeMatrix& lattice, double radius_nm);

struct Supercell {
  std::string material;
  double radius_nm = 0;
  std::vector<Atom> atoms;
  Vec3 center = Vec3::Zero();  // angstrom
};

struct SupercellBuild {
  Supercell cell;
  MultiplicitySelection multiplicity;
  kernels::IndexBox index_box;
};

/// Spherical cluster of radius R around the first basis atom of cell (0,0,0).
/// Throws GenerationError when nothing is retained.
SupercellBuild build_supercell(const MaterialSpec& spec, double radius_nm);
Supercell generate_supercell(const MaterialSpec& spec, double radius_nm);

/// Index box over the translations of `lattice` covering the axis-aligned
/// bounding box of the sphere, padded by one cell on each side.
kernels::IndexBox enumeration_box(const Mat3& translations, const Vec3& center, double radius_angstrom);

inline constexpr double kDuplicateTolerance = 1e-6;  // angstrom

}  // namespace xtalbench
