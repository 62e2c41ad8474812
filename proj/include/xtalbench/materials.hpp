#pragma once

#include "xtalbench/common.hpp"

#include <array>
#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <string_view>
#include <vector>

namespace xtalbench {

enum class LatticeSystem { CubicFcc, Cubic, Tetragonal, Hexagonal, Rhombohedral, Triclinic };

std::string_view to_string(LatticeSystem system);
LatticeSystem lattice_system_from_string(std::string_view text);

struct SpaceGroup {
  std::string symbol;  // Hermann-Mauguin, ASCII bar form ("Fm-3m")
  int number = 0;      // International Tables number

  bool operator==(const SpaceGroup&) const = default;
};

struct BasisSite {
  std::string element;
  Vec3 fractional = Vec3::Zero();

  bool operator==(const BasisSite&) const = default;
};

/// Primitive-cell description of one bundled material.
///
/// For `LatticeSystem::CubicFcc` the edges are the conventional cube edge and
/// basis coordinates refer to the FCC primitive vectors.
struct MaterialSpec {
  std::string name;
  std::string formula;
  std::string structure;  // free-text structure type, e.g. "wurtzite"
  double a0 = 0, b0 = 0, c0 = 0;
  double alpha0 = 90, beta0 = 90, gamma0 = 90;
  SpaceGroup space_group;
  std::vector<BasisSite> basis;
  LatticeSystem lattice_system = LatticeSystem::Triclinic;

  bool operator==(const MaterialSpec&) const = default;
};

/// Throws LoadError naming the material and the offending field.
void validate(const MaterialSpec& spec);

/// The ten bundled materials, in file order.
std::vector<MaterialSpec> load_materials();
std::vector<MaterialSpec> load_materials_file(const std::filesystem::path& path);
std::vector<MaterialSpec> parse_materials(std::string_view text, std::string_view source = "<text>");

const MaterialSpec& find_material(const std::vector<MaterialSpec>& materials, std::string_view name);

struct Rgb {
  std::uint8_t r = 0, g = 0, b = 0;
  bool operator==(const Rgb&) const = default;
};

struct ElementData {
  std::string symbol;
  double mass = 0;             // amu
  double covalent_radius = 0;  // angstrom
  Rgb color;
};

class ElementTable {
 public:
  static ElementTable parse(std::string_view text, std::string_view source = "<text>");
  static const ElementTable& bundled();

  /// Throws LookupError for unknown symbols.
  const ElementData& at(std::string_view symbol) const;
  bool contains(std::string_view symbol) const;
  std::size_t size() const { return entries_.size(); }

 private:
  std::map<std::string, ElementData, std::less<>> entries_;
};

/// Lookup in the bundled element table.
const ElementData& element_data(std::string_view symbol);

namespace detail {
std::string_view bundled_materials_text();
std::string_view bundled_elements_text();
}  // namespace detail

}  // namespace xtalbench
