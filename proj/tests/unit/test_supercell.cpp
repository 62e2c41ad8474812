#include <doctest.h>

#include "brute_force.hpp"
#include "xtalbench/supercell.hpp"

#include <cmath>
#include <map>

using namespace xtalbench;

namespace {

const std::vector<double> kRadii{0.7, 0.8, 0.9, 1.0};

// Atom counts of the bundled corpus, frozen from the generator.
const std::map<std::string, std::array<int, 4>> kCounts{
    {"Ag", {79, 135, 177, 225}},        {"Au", {79, 135, 177, 249}},     {"CH3NH3PbI3", {77, 101, 113, 207}},
    {"Fe2O3", {143, 209, 308, 414}},    {"MoS2", {75, 125, 161, 251}},   {"PbS", {57, 81, 123, 171}},
    {"SnO2", {105, 189, 263, 349}},     {"SrTiO3", {119, 173, 257, 377}}, {"TiO2", {123, 189, 269, 351}},
    {"ZnO", {125, 177, 259, 340}},
};

double min_pair_distance(const std::vector<Atom>& atoms) {
  double best = INFINITY;
  for (std::size_t i = 0; i < atoms.size(); ++i) {
    for (std::size_t j = i + 1; j < atoms.size(); ++j) {
      best = std::min(best, (atoms[i].position - atoms[j].position).norm());
    }
  }
  return best;
}

}  // namespace

TEST_CASE("cubic close-packed cells match the brute-force enumeration") {
  const auto ms = load_materials();
  for (const char* name : {"Ag", "Au", "PbS"}) {
    for (double r : kRadii) {
      CAPTURE(name);
      CAPTURE(r);
      const auto cell = generate_supercell(find_material(ms, name), r);
      const auto ref = testutil::brute_force_fcc(find_material(ms, name), r);
      CHECK(cell.atoms.size() == ref.size());
      CHECK(testutil::same_atom_set(cell.atoms, ref, 1e-9));
    }
  }
}

TEST_CASE("atom counts of every corpus supercell") {
  const auto ms = load_materials();
  for (const auto& [name, counts] : kCounts) {
    for (std::size_t i = 0; i < kRadii.size(); ++i) {
      CAPTURE(name);
      CAPTURE(kRadii[i]);
      CHECK(generate_supercell(find_material(ms, name), kRadii[i]).atoms.size() == static_cast<std::size_t>(counts[i]));
    }
  }
}

TEST_CASE("every atom lies within R and no two coincide") {
  for (const auto& m : load_materials()) {
    const auto cell = generate_supercell(m, 0.8);
    CAPTURE(m.name);
    for (const auto& a : cell.atoms) CHECK((a.position - cell.center).norm() <= 8.0 + 1e-12);
    // Shortest bond in the table is C-H / N-H of methylammonium.
    CHECK(min_pair_distance(cell.atoms) > 0.9);
  }
}

TEST_CASE("result does not depend on the multiplicity chosen") {
  // A larger radius uses a larger S; restricting its cluster to the smaller
  // sphere must give back the smaller cluster.
  const auto ti = find_material(load_materials(), "TiO2");
  const auto small = generate_supercell(ti, 0.7);
  const auto big = generate_supercell(ti, 1.0);
  std::vector<Atom> cut;
  for (const auto& a : big.atoms) {
    if ((a.position - big.center).norm() <= 7.0) cut.push_back(a);
  }
  CHECK(testutil::same_atom_set(small.atoms, cut, 1e-9));
}

TEST_CASE("multiplicity covers the sphere") {
  for (const auto& m : load_materials()) {
    const auto lattice = lattice_matrix(m);
    for (double r : kRadii) {
      const auto sel = select_multiplicity(lattice, r);
      Mat3 t = lattice.columns;
      for (int i = 0; i < 3; ++i) t.col(i) *= sel.s.diagonal[i];
      const double v = std::abs(t.determinant());
      for (int i = 0; i < 3; ++i) {
        const double width = v / t.col((i + 1) % 3).cross(t.col((i + 2) % 3)).norm();
        CHECK(width >= 2 * 10 * r - 1e-9);
        // Minimal: one fewer replica along this axis would not cover.
        if (sel.s.diagonal[i] > 1) CHECK(width * (sel.s.diagonal[i] - 1) / sel.s.diagonal[i] < 2 * 10 * r);
      }
      CHECK(sel.exceeds_determinant_limit == (sel.s.determinant() > kMultiplicityDeterminantLimit));
    }
  }
}

TEST_CASE("lattice from cell parameters") {
  const auto l = lattice_from_parameters(3.0, 3.0, 5.0, 90, 90, 120);
  CHECK(l.vector(0).norm() == doctest::Approx(3.0));
  CHECK(l.vector(1).norm() == doctest::Approx(3.0));
  CHECK(l.vector(2).norm() == doctest::Approx(5.0));
  const double gamma = std::acos(l.vector(0).dot(l.vector(1)) / 9.0) * 180 / M_PI;
  CHECK(gamma == doctest::Approx(120.0));
  CHECK(l.volume() == doctest::Approx(3.0 * 3.0 * 5.0 * std::sqrt(3.0) / 2));

  const auto r = lattice_from_parameters(5.0, 5.0, 5.0, 55, 55, 55);
  CHECK(r.vector(2).norm() == doctest::Approx(5.0));
  CHECK(std::acos(r.vector(1).dot(r.vector(2)) / 25.0) * 180 / M_PI == doctest::Approx(55.0));

  CHECK_THROWS_AS(lattice_from_parameters(1, 1, 1, 10, 10, 120), GenerationError);
  CHECK_THROWS_AS(lattice_from_parameters(0, 1, 1, 90, 90, 90), GenerationError);
}

TEST_CASE("fcc primitive vectors") {
  const auto l = fcc_lattice(4.0);
  CHECK(l.volume() == doctest::Approx(16.0));
  CHECK(l.vector(0) == Vec3(0, 2, 2));
}

TEST_CASE("bad radius") {
  const auto au = find_material(load_materials(), "Au");
  CHECK_THROWS_AS(generate_supercell(au, 0.0), ArgumentError);
  CHECK_THROWS_AS(generate_supercell(au, -1.0), ArgumentError);
}

TEST_CASE("generation is deterministic") {
  const auto fe = find_material(load_materials(), "Fe2O3");
  const auto x = generate_supercell(fe, 0.9);
  const auto y = generate_supercell(fe, 0.9);
  CHECK(x.atoms == y.atoms);
}
