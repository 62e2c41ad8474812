#include <doctest.h>

#include "xtalbench/gateway.hpp"
#include "xtalbench/prediction.hpp"

#include <cmath>
#include <random>

using namespace xtalbench;

namespace {

void check_rel(std::optional<double> got, double want) {
  REQUIRE(got.has_value());
  CHECK(std::abs(*got - want) <= 1e-9 * std::abs(want));
}

AnnotationRecord sample_record() {
  AnnotationRecord r;
  r.n_atoms = 135;
  r.cell_volume = 4000.5;
  r.a = 15.5;
  r.b = 16.25;
  r.c = 15.875;
  r.mean_nn_distance = 2.88;
  r.density = 11.2;
  r.a_p = 4.0782;
  r.b_p = 4.0782;
  r.c_p = 4.0782;
  r.alpha_p = 90;
  r.beta_p = 90;
  r.gamma_p = 90;
  r.space_group = "Fm-3m";
  r.description = "Gold \"cluster\" {with braces}";
  return r;
}

}  // namespace

TEST_CASE("structured block with every field") {
  const auto ref = sample_record();
  const auto p = parse_response("Here you go:\n" + oracle_response(ref) + "\nHope this helps.");
  CHECK(p.parse_ok);
  CHECK(p.kinds.size() == 15);
  for (auto f : kAllFields) {
    if (is_numeric(f)) CHECK(*p.number(f) == numeric_value(ref, f));
  }
  CHECK(p.space_group == "Fm-3m");
  CHECK(p.description == ref.description);
  CHECK(p == parse_response(p.raw_response));
}

TEST_CASE("bare JSON object and nesting") {
  const auto p = parse_response(R"(Prediction: {"Material Properties": {"density": 5.61, "a": "4.08 nm"}})");
  CHECK(p.parse_ok);
  check_rel(p.number(Field::Density), 5.61);
  check_rel(p.number(Field::A), 40.8);
  CHECK(p.kinds.at(Field::A) == ValueKind::String);
  CHECK(p.kinds.at(Field::Density) == ValueKind::Number);
}

TEST_CASE("prose with a single labelled value") {
  const auto p = parse_response("The lattice is cubic, and a = 4.08 \xC3\x85 according to my estimate.");
  CHECK(p.parse_ok);
  check_rel(p.number(Field::A), 4.08);
  CHECK(p.kinds.size() == 1);
  CHECK(!p.has(Field::B));
}

TEST_CASE("length unit spellings") {
  check_rel(parse_response("a: 4.08 Å").number(Field::A), 4.08);
  check_rel(parse_response("a: 4.08 \xE2\x84\xAB").number(Field::A), 4.08);
  check_rel(parse_response("a: 4.08 A").number(Field::A), 4.08);
  check_rel(parse_response("a: 4.08 angstrom").number(Field::A), 4.08);
  check_rel(parse_response("a: 4.08 Angstroms").number(Field::A), 4.08);
  check_rel(parse_response("a: 0.408 nm").number(Field::A), 4.08);
  check_rel(parse_response("a: 0.408 nanometers").number(Field::A), 4.08);
  check_rel(parse_response("a: 408 pm").number(Field::A), 4.08);
  check_rel(parse_response("b_p = 5.2e-1 nm").number(Field::BPrim), 5.2);
  check_rel(parse_response("Mean nearest-neighbour distance: 2.88 Å").number(Field::MeanNnDistance), 2.88);
}

TEST_CASE("volume, density and angle units") {
  check_rel(parse_response("cell volume: 4.0005 nm^3").number(Field::CellVolume), 4000.5);
  check_rel(parse_response("cell volume: 4.0005 nm\xC2\xB3").number(Field::CellVolume), 4000.5);
  check_rel(parse_response("volume = 4000.5 Å^3").number(Field::CellVolume), 4000.5);
  check_rel(parse_response("density: 5.61 g/cm^3").number(Field::Density), 5.61);
  check_rel(parse_response("density: 5.61 g cm\xE2\x81\xBB\xC2\xB3").number(Field::Density), 5.61);
  check_rel(parse_response("\xCF\x81 = 5610 kg/m^3").number(Field::Density), 5.61);
  check_rel(parse_response("gamma: 120\xC2\xB0").number(Field::GammaPrim), 120);
  check_rel(parse_response("\xCE\xB1 = 1.5707963267948966 rad").number(Field::AlphaPrim), 90);
}

TEST_CASE("labelled lines") {
  const auto p = parse_response(
      "Material Properties:\n"
      "- Number of atoms: 135\n"
      "- Cell volume: 4000.5 Å^3\n"
      "- Lattice constant a: 15.5 Å\n"
      "- Density: 11.2 g/cm^3\n"
      "- Space group: Fm-3m\n"
      "- Primitive a: 4.0782 Å\n");
  CHECK(p.parse_ok);
  check_rel(p.number(Field::NAtoms), 135);
  check_rel(p.number(Field::CellVolume), 4000.5);
  check_rel(p.number(Field::A), 15.5);
  check_rel(p.number(Field::Density), 11.2);
  check_rel(p.number(Field::APrim), 4.0782);
  CHECK(p.space_group == "Fm-3m");
}

TEST_CASE("negative and zero values are kept") {
  check_rel(parse_response("density: -3.5 g/cm^3").number(Field::Density), -3.5);
  const auto z = parse_response(R"({"n_atoms": 0})");
  REQUIRE(z.number(Field::NAtoms));
  CHECK(*z.number(Field::NAtoms) == 0);
}

TEST_CASE("first occurrence wins") {
  const auto p = parse_response(R"({"a": 1.0, "lattice_a": 2.0})");
  check_rel(p.number(Field::A), 1.0);
}

TEST_CASE("failures") {
  CHECK(!parse_response("").parse_ok);
  CHECK(!parse_response("I cannot determine these properties.").parse_ok);
  CHECK(!parse_response("{\"unknown\": 3}").parse_ok);
  const auto nan = parse_response("{\"a\": \"NaN\"}");
  CHECK(!nan.number(Field::A));
  CHECK(nan.kinds.at(Field::A) == ValueKind::String);
  CHECK(!parse_quantity("1e308 nm", Field::A));
  CHECK(!parse_response("```json\n{\"a\": 4.0\n```").has(Field::B));
  const std::string raw = "nothing here";
  CHECK(parse_response(raw).raw_response == raw);
}

TEST_CASE("aliases and quantities") {
  CHECK(field_from_alias("Lattice constant a") == Field::A);
  CHECK(field_from_alias("rho") == Field::Density);
  CHECK(field_from_alias("Space Group") == Field::SpaceGroup);
  CHECK(!field_from_alias("colour"));
  check_rel(parse_quantity("4.08 nm", Field::A), 40.8);
  check_rel(parse_quantity("  7 ", Field::NAtoms), 7);
  CHECK(!parse_quantity("four", Field::A));
}

TEST_CASE("scaled response parses to scaled values") {
  const auto ref = sample_record();
  const auto p = parse_response(scaled_response(ref, 1.15));
  for (auto f : kAllFields) {
    if (is_numeric(f)) check_rel(p.number(f), 1.15 * numeric_value(ref, f));
  }
  CHECK(p.space_group == ref.space_group);
}

TEST_CASE("prediction JSON round trip") {
  auto p = parse_response(R"({"a": "4.0 nm", "b": 3, "space_group": 225, "description": "x"})");
  const auto back = prediction_from_json(prediction_to_json(p));
  CHECK(back.numbers == p.numbers);
  CHECK(back.kinds == p.kinds);
  CHECK(back.space_group == p.space_group);
  CHECK(back.description == p.description);
  CHECK(back.parse_ok == p.parse_ok);
}

TEST_CASE("totality on random bytes") {
  std::mt19937_64 rng(12345);
  std::uniform_int_distribution<int> len(0, 256), byte(0, 255), mode(0, 3);
  static constexpr std::string_view fragments[] = {
      "{", "}", "\"a\"", ":", " = ", "nm", "Å", "```json\n", "```", "density", "1e308", "-", ".", "[", "]",
      "\xCF\x81", "\xE2\x81\xBB", "\n", "1/0", "NaN", "inf", "\\", "\"", ",", "null", "true", "a: "};
  std::size_t parsed = 0;
  for (int t = 0; t < 100000; ++t) {
    std::string s;
    const int n = len(rng);
    const int m = mode(rng);
    for (int i = 0; i < n; ++i) {
      if (m == 0) {
        s.push_back(static_cast<char>(byte(rng)));
      } else {
        s += fragments[static_cast<std::size_t>(byte(rng)) % std::size(fragments)];
      }
    }
    PredictionRecord p;
    REQUIRE_NOTHROW(p = parse_response(s));
    CHECK(p.parse_ok == !p.kinds.empty());
    for (const auto& [f, v] : p.numbers) REQUIRE(std::isfinite(v));
    parsed += p.parse_ok;
  }
  MESSAGE("records extracted from random input: " << parsed);
}
