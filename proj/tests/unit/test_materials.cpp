#include <doctest.h>

#include "xtalbench/materials.hpp"

#include <algorithm>
#include <set>

using namespace xtalbench;

namespace {

const char* kMinimal = R"(
# comment
[material Foo]
formula = Fo
structure = test
a = 3
b = 3
c = 4
alpha = 90
beta = 90
gamma = 120
space_group = P6_3mc
space_group_number = 186
lattice_system = hexagonal
site = Zn 1/3 2/3 0
site = O  1/3 2/3 0.3819
)";

std::string replace(std::string text, const std::string& from, const std::string& to) {
  const auto pos = text.find(from);
  REQUIRE(pos != std::string::npos);
  return text.replace(pos, from.size(), to);
}

}  // namespace

TEST_CASE("bundled table holds the ten materials") {
  const auto ms = load_materials();
  std::set<std::string> names;
  for (const auto& m : ms) names.insert(m.name);
  const std::set<std::string> expected{"Ag",   "Au",   "CH3NH3PbI3", "Fe2O3",  "MoS2",
                                       "PbS",  "SnO2", "SrTiO3",     "TiO2",   "ZnO"};
  CHECK(names == expected);
  for (const auto& m : ms) {
    CHECK_NOTHROW(validate(m));
    for (const auto& site : m.basis) CHECK(ElementTable::bundled().contains(site.element));
  }
}

TEST_CASE("gold entry") {
  const auto ms = load_materials();
  const auto& au = find_material(ms, "Au");
  CHECK(au.a0 == 4.0782);
  CHECK(au.lattice_system == LatticeSystem::CubicFcc);
  CHECK(au.space_group.symbol == "Fm-3m");
  CHECK(au.space_group.number == 225);
  REQUIRE(au.basis.size() == 1);
  CHECK(au.basis[0].element == "Au");
  CHECK(au.basis[0].fractional == Vec3::Zero());
}

TEST_CASE("zinc oxide is hexagonal wurtzite") {
  const auto zno = find_material(load_materials(), "ZnO");
  CHECK(zno.lattice_system == LatticeSystem::Hexagonal);
  CHECK(zno.gamma0 == 120);
  CHECK(zno.structure.find("wurtzite") != std::string::npos);
}

TEST_CASE("unknown material is a lookup error") {
  CHECK_THROWS_AS(find_material(load_materials(), "Unobtainium"), LookupError);
}

TEST_CASE("parser accepts fractions") {
  const auto ms = parse_materials(kMinimal);
  REQUIRE(ms.size() == 1);
  CHECK(ms[0].basis[0].fractional.x() == doctest::Approx(1.0 / 3.0).epsilon(1e-15));
  CHECK(ms[0].basis[0].fractional.y() == doctest::Approx(2.0 / 3.0).epsilon(1e-15));
  CHECK(ms[0].lattice_system == LatticeSystem::Hexagonal);
}

TEST_CASE("load errors name the material and the field") {
  auto message = [](const std::string& text) {
    try {
      parse_materials(text, "t.dat");
    } catch (const LoadError& e) {
      return std::string(e.what());
    }
    return std::string("no error");
  };
  SUBCASE("missing field") {
    const auto m = message(replace(kMinimal, "space_group_number = 186\n", ""));
    CHECK(m.find("Foo") != std::string::npos);
    CHECK(m.find("space_group_number") != std::string::npos);
  }
  SUBCASE("bad angle") {
    const auto m = message(replace(kMinimal, "gamma = 120", "gamma = 180"));
    CHECK(m.find("gamma") != std::string::npos);
  }
  SUBCASE("non-numeric edge") {
    const auto m = message(replace(kMinimal, "a = 3", "a = three"));
    CHECK(m.find("t.dat:") != std::string::npos);
    CHECK(m.find("'a'") != std::string::npos);
  }
  SUBCASE("fractional coordinate out of range") {
    const auto m = message(replace(kMinimal, "0.3819", "1.2"));
    CHECK(m.find("site") != std::string::npos);
  }
  SUBCASE("space group number out of range") {
    const auto m = message(replace(kMinimal, "= 186", "= 231"));
    CHECK(m.find("space_group_number") != std::string::npos);
  }
  SUBCASE("duplicate key") {
    const auto m = message(replace(kMinimal, "a = 3\n", "a = 3\na = 3\n"));
    CHECK(m.find("twice") != std::string::npos);
  }
}

TEST_CASE("element table") {
  const auto& au = element_data("Au");
  CHECK(au.mass == doctest::Approx(196.966569));
  CHECK(au.covalent_radius > 0);
  CHECK_THROWS_AS(element_data("Xx"), LookupError);
  CHECK_THROWS_AS(ElementTable::parse("Au 1 2 3 4"), LoadError);
  CHECK_THROWS_AS(ElementTable::parse("Au -1 1.3 0 0 0"), LoadError);
  CHECK_THROWS_AS(ElementTable::parse("Au 1 1.3 0 0 256"), LoadError);
  const auto t = ElementTable::parse("# c\nAu 1 1.3 1 2 3\n");
  CHECK(t.size() == 1);
  CHECK(t.at("Au").color == Rgb{1, 2, 3});
}
