#include "xtalbench/supercell.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <numbers>

namespace xtalbench {

namespace {

// Exact values at the angles every bundled cell uses, so orthogonal axes
// come out exactly orthogonal.
double cos_deg(double deg) {
  if (deg == 90.0) return 0.0;
  if (deg == 120.0) return -0.5;
  if (deg == 60.0) return 0.5;
  return std::cos(deg * std::numbers::pi / 180.0);
}

double sin_deg(double deg) {
  if (deg == 90.0) return 1.0;
  return std::sin(deg * std::numbers::pi / 180.0);
}

}  // namespace

LatticeMatrix fcc_lattice(double a) {
  LatticeMatrix m;
  m.columns.col(0) = Vec3(0, a / 2, a / 2);
  m.columns.col(1) = Vec3(a / 2, 0, a / 2);
  m.columns.col(2) = Vec3(a / 2, a / 2, 0);
  return m;
}

LatticeMatrix lattice_from_parameters(double a, double b, double c,
                                      double alpha_deg, double beta_deg, double gamma_deg) {
  if (!(a > 0 && b > 0 && c > 0)) {
    throw GenerationError(fmt::format("cell edges must be positive (a={}, b={}, c={})", a, b, c));
  }
  const double ca = cos_deg(alpha_deg), cb = cos_deg(beta_deg), cg = cos_deg(gamma_deg);
  const double sg = sin_deg(gamma_deg);
  if (std::abs(sg) < 1e-12) throw GenerationError("gamma makes a1 and a2 collinear");

  const double cx = c * cb;
  const double cy = c * (ca - cb * cg) / sg;
  const double cz2 = c * c - cx * cx - cy * cy;
  if (!(cz2 > 1e-12 * c * c)) {
    throw GenerationError(fmt::format("cell angles ({}, {}, {}) give a degenerate cell",
                                      alpha_deg, beta_deg, gamma_deg));
  }
  LatticeMatrix m;
  m.columns.col(0) = Vec3(a, 0, 0);
  m.columns.col(1) = Vec3(b * cg, b * sg, 0);
  m.columns.col(2) = Vec3(cx, cy, std::sqrt(cz2));
  return m;
}

LatticeMatrix lattice_matrix(const MaterialSpec& spec) {
  if (spec.lattice_system == LatticeSystem::CubicFcc) return fcc_lattice(spec.a0);
  return lattice_from_parameters(spec.a0, spec.b0, spec.c0, spec.alpha0, spec.beta0, spec.gamma0);
}

Eigen::Matrix3i MultiplicityMatrix::matrix() const {
  Eigen::Matrix3i m = Eigen::Matrix3i::Zero();
  for (int i = 0; i < 3; ++i) m(i, i) = diagonal[i];
  return m;
}

MultiplicitySelection select_multiplicity(const LatticeMatrix& lattice, double radius_nm) {
  if (!(radius_nm > 0)) throw ArgumentError(fmt::format("radius must be > 0 nm, got {}", radius_nm));
  const double diameter = 2.0 * nm_to_angstrom(radius_nm);
  const double volume = lattice.volume();
  MultiplicitySelection out;
  for (int i = 0; i < 3; ++i) {
    const Vec3 face_normal = lattice.vector((i + 1) % 3).cross(lattice.vector((i + 2) % 3));
    const double spacing = volume / face_normal.norm();
    out.s.diagonal[i] = std::max(1, static_cast<int>(std::ceil(diameter / spacing)));
  }
  out.exceeds_determinant_limit = out.s.determinant() > kMultiplicityDeterminantLimit;
  return out;
}

kernels::IndexBox enumeration_box(const Mat3& translations, const Vec3& center, double radius_angstrom) {
  const Mat3 inverse = translations.inverse();
  Vec3 lo = Vec3::Constant(std::numeric_limits<double>::infinity());
  Vec3 hi = -lo;
  for (int corner = 0; corner < 8; ++corner) {
    Vec3 p = center;
    for (int axis = 0; axis < 3; ++axis) p[axis] += (corner >> axis & 1) ? radius_angstrom : -radius_angstrom;
    const Vec3 frac = inverse * p;
    lo = lo.cwiseMin(frac);
    hi = hi.cwiseMax(frac);
  }
  kernels::IndexBox box;
  for (int i = 0; i < 3; ++i) {
    box.lo[i] = static_cast<int>(std::floor(lo[i])) - 1;
    box.hi[i] = static_cast<int>(std::ceil(hi[i])) + 1;
  }
  return box;
}

SupercellBuild build_supercell(const MaterialSpec& spec, double radius_nm) {
  validate(spec);
  const auto lattice = lattice_matrix(spec);
  auto selection = select_multiplicity(lattice, radius_nm);
  const auto& s = selection.s.diagonal;

  Mat3 translations = lattice.columns;
  for (int i = 0; i < 3; ++i) translations.col(i) *= s[i];

  // The supercell motif holds every primitive image inside A·S, so the
  // retained set does not depend on which S was chosen.
  std::vector<kernels::MotifSite> motif;
  motif.reserve(static_cast<std::size_t>(selection.s.determinant()) * spec.basis.size());
  for (int m1 = 0; m1 < s[0]; ++m1) {
    for (int m2 = 0; m2 < s[1]; ++m2) {
      for (int m3 = 0; m3 < s[2]; ++m3) {
        for (const auto& site : spec.basis) {
          motif.push_back({site.element, lattice.columns * (Vec3(m1, m2, m3) + site.fractional)});
        }
      }
    }
  }

  const Vec3 center = lattice.columns * spec.basis.front().fractional;
  const double radius = nm_to_angstrom(radius_nm);
  const auto box = enumeration_box(translations, center, radius);
  auto retained = kernels::retain_within_sphere(translations, motif, box, center, radius);

  std::vector<Atom> atoms;
  atoms.reserve(retained.size());
  constexpr double tol2 = kDuplicateTolerance * kDuplicateTolerance;
  for (auto& a : retained) {
    const bool dup = std::any_of(atoms.begin(), atoms.end(), [&](const Atom& b) {
      return (a.position - b.position).squaredNorm() <= tol2;
    });
    if (!dup) atoms.push_back(std::move(a));
  }
  if (atoms.empty()) {
    throw GenerationError(fmt::format("no atoms retained for material '{}' at R = {} nm", spec.name, radius_nm));
  }

  SupercellBuild out;
  out.cell = Supercell{spec.name, radius_nm, std::move(atoms), center};
  out.multiplicity = selection;
  out.index_box = box;
  return out;
}

Supercell generate_supercell(const MaterialSpec& spec, double radius_nm) {
  return build_supercell(spec, radius_nm).cell;
}

}  // namespace xtalbench
