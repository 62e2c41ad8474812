#pragma once

#include "xtalbench/common.hpp"
#include "xtalbench/materials.hpp"
#include "xtalbench/supercell.hpp"

#include <array>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>

namespace xtalbench {

/// Material Properties record for one supercell.
///
/// a, b, c are the axis-aligned bounding-box extents of the atom positions,
/// each padded by twice the largest covalent radius present; V = a b c and
/// the density is total mass over V. Primitive fields are copied from the
/// material definition.
struct AnnotationRecord {
  int n_atoms = 0;
  double cell_volume = 0;       // A^3
  double a = 0, b = 0, c = 0;   // A
  double mean_nn_distance = 0;  // A
  double density = 0;           // g/cm^3
  double a_p = 0, b_p = 0, c_p = 0;
  double alpha_p = 0, beta_p = 0, gamma_p = 0;
  std::string space_group;
  std::string description;

  bool operator==(const AnnotationRecord&) const = default;
};

/// Schema fields in serialization order.
enum class Field {
  NAtoms,
  CellVolume,
  A,
  B,
  C,
  MeanNnDistance,
  Density,
  APrim,
  BPrim,
  CPrim,
  AlphaPrim,
  BetaPrim,
  GammaPrim,
  SpaceGroup,
  Description,
};

inline constexpr std::array<Field, 15> kAllFields{
    Field::NAtoms, Field::CellVolume, Field::A,        Field::B,         Field::C,
    Field::MeanNnDistance, Field::Density, Field::APrim, Field::BPrim,   Field::CPrim,
    Field::AlphaPrim, Field::BetaPrim, Field::GammaPrim, Field::SpaceGroup, Field::Description};

std::string_view field_name(Field field);
std::optional<Field> field_from_name(std::string_view name);
bool is_numeric(Field field);

/// Throws ArgumentError for the two text fields.
double numeric_value(const AnnotationRecord& record, Field field);

inline constexpr double kGramPerAmu = 1.66053906660e-24;
inline constexpr double kCubicCentimetrePerCubicAngstrom = 1e-24;

double density_g_per_cm3(double mass_amu, double volume_cubic_angstrom);

struct BoxExtents {
  double a = 0, b = 0, c = 0;
};

BoxExtents padded_bounding_box(std::span<const Atom> atoms, const ElementTable& elements);

/// Throws ArgumentError for cells with fewer than two atoms.
double mean_nearest_neighbor_distance(std::span<const Atom> atoms);

AnnotationRecord annotate(const Supercell& cell, const MaterialSpec& spec,
                          const ElementTable& elements = ElementTable::bundled());

std::string render_description(const AnnotationRecord& record, const MaterialSpec& spec, double radius_nm);

/// Pretty-printed JSON object with the schema fields in fixed order.
std::string to_json_text(const AnnotationRecord& record);
AnnotationRecord annotation_from_json_text(std::string_view text);

void write_annotation(const AnnotationRecord& record, const std::filesystem::path& path);
AnnotationRecord read_annotation(const std::filesystem::path& path);

}  // namespace xtalbench
