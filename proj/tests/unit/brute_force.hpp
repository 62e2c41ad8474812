#pragma once

// Independent reference enumeration for cubic FCC-based materials: loop over
// conventional cubic cells, place the four FCC offsets (plus the rock-salt
// partner when present), keep sites within R of the origin.

#include "xtalbench/materials.hpp"
#include "xtalbench/supercell.hpp"

#include <cmath>
#include <string>
#include <vector>

namespace testutil {

inline std::vector<xtalbench::Atom> brute_force_fcc(const xtalbench::MaterialSpec& spec, double radius_nm) {
  using xtalbench::Vec3;
  const double a = spec.a0;
  const double r = radius_nm * 10.0;
  const Vec3 fcc[4] = {{0, 0, 0}, {0, 0.5, 0.5}, {0.5, 0, 0.5}, {0.5, 0.5, 0}};
  // Basis sites given in primitive fractional coordinates f map to the
  // conventional offset (a/2)(f2+f3, f1+f3, f1+f2).
  std::vector<std::pair<std::string, Vec3>> basis;
  for (const auto& site : spec.basis) {
    const Vec3& f = site.fractional;
    basis.emplace_back(site.element, 0.5 * Vec3(f.y() + f.z(), f.x() + f.z(), f.x() + f.y()));
  }
  const Vec3 origin = a * basis.front().second;
  const int m = static_cast<int>(std::ceil(r / a)) + 2;
  std::vector<xtalbench::Atom> out;
  for (int i = -m; i <= m; ++i) {
    for (int j = -m; j <= m; ++j) {
      for (int k = -m; k <= m; ++k) {
        for (const auto& corner : fcc) {
          for (const auto& [element, offset] : basis) {
            const Vec3 p = a * (Vec3(i, j, k) + corner + offset);
            if ((p - origin).norm() <= r) out.push_back({element, p});
          }
        }
      }
    }
  }
  return out;
}

/// True when the sets match one to one: same element, coordinates within
/// `tol` on every axis.
inline bool same_atom_set(const std::vector<xtalbench::Atom>& x, const std::vector<xtalbench::Atom>& y, double tol) {
  if (x.size() != y.size()) return false;
  std::vector<bool> used(y.size(), false);
  for (const auto& p : x) {
    bool found = false;
    for (std::size_t j = 0; j < y.size(); ++j) {
      if (used[j] || y[j].element != p.element) continue;
      if ((y[j].position - p.position).cwiseAbs().maxCoeff() <= tol) {
        used[j] = true;
        found = true;
        break;
      }
    }
    if (!found) return false;
  }
  return true;
}

}  // namespace testutil
