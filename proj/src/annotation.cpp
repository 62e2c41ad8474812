#include "xtalbench/annotation.hpp"

#include "xtalbench/kernels.hpp"

#include <fmt/format.h>
#include <json.hpp>

#include <algorithm>
#include <fstream>
#include <limits>
#include <sstream>

namespace xtalbench {

using ordered_json = nlohmann::ordered_json;

std::string_view field_name(Field field) {
  switch (field) {
    case Field::NAtoms: return "n_atoms";
    case Field::CellVolume: return "cell_volume";
    case Field::A: return "a";
    case Field::B: return "b";
    case Field::C: return "c";
    case Field::MeanNnDistance: return "mean_nn_distance";
    case Field::Density: return "density";
    case Field::APrim: return "a_p";
    case Field::BPrim: return "b_p";
    case Field::CPrim: return "c_p";
    case Field::AlphaPrim: return "alpha_p";
    case Field::BetaPrim: return "beta_p";
    case Field::GammaPrim: return "gamma_p";
    case Field::SpaceGroup: return "space_group";
    case Field::Description: return "description";
  }
  return "";
}

std::optional<Field> field_from_name(std::string_view name) {
  for (auto f : kAllFields) {
    if (field_name(f) == name) return f;
  }
  return std::nullopt;
}

bool is_numeric(Field field) { return field != Field::SpaceGroup && field != Field::Description; }

double numeric_value(const AnnotationRecord& r, Field field) {
  switch (field) {
    case Field::NAtoms: return r.n_atoms;
    case Field::CellVolume: return r.cell_volume;
    case Field::A: return r.a;
    case Field::B: return r.b;
    case Field::C: return r.c;
    case Field::MeanNnDistance: return r.mean_nn_distance;
    case Field::Density: return r.density;
    case Field::APrim: return r.a_p;
    case Field::BPrim: return r.b_p;
    case Field::CPrim: return r.c_p;
    case Field::AlphaPrim: return r.alpha_p;
    case Field::BetaPrim: return r.beta_p;
    case Field::GammaPrim: return r.gamma_p;
    default: break;
  }
  throw ArgumentError(fmt::format("field '{}' is not numeric", field_name(field)));
}

double density_g_per_cm3(double mass_amu, double volume_cubic_angstrom) {
  return mass_amu * kGramPerAmu / (volume_cubic_angstrom * kCubicCentimetrePerCubicAngstrom);
}

BoxExtents padded_bounding_box(std::span<const Atom> atoms, const ElementTable& elements) {
  if (atoms.empty()) throw ArgumentError("bounding box of an empty atom list");
  Vec3 lo = Vec3::Constant(std::numeric_limits<double>::infinity());
  Vec3 hi = -lo;
  double max_cov = 0;
  for (const auto& a : atoms) {
    lo = lo.cwiseMin(a.position);
    hi = hi.cwiseMax(a.position);
    max_cov = std::max(max_cov, elements.at(a.element).covalent_radius);
  }
  const Vec3 extent = (hi - lo).array() + 2.0 * max_cov;
  return {extent.x(), extent.y(), extent.z()};
}

double mean_nearest_neighbor_distance(std::span<const Atom> atoms) {
  return kernels::mean_nearest_neighbor(atoms);
}

AnnotationRecord annotate(const Supercell& cell, const MaterialSpec& spec, const ElementTable& elements) {
  if (cell.atoms.empty()) throw ArgumentError(fmt::format("cannot annotate empty supercell of '{}'", cell.material));
  AnnotationRecord r;
  r.n_atoms = static_cast<int>(cell.atoms.size());
  const auto box = padded_bounding_box(cell.atoms, elements);
  r.a = box.a;
  r.b = box.b;
  r.c = box.c;
  r.cell_volume = r.a * r.b * r.c;
  r.mean_nn_distance = mean_nearest_neighbor_distance(cell.atoms);
  double mass = 0;
  for (const auto& a : cell.atoms) mass += elements.at(a.element).mass;
  r.density = density_g_per_cm3(mass, r.cell_volume);
  r.a_p = spec.a0;
  r.b_p = spec.b0;
  r.c_p = spec.c0;
  r.alpha_p = spec.alpha0;
  r.beta_p = spec.beta0;
  r.gamma_p = spec.gamma0;
  r.space_group = spec.space_group.symbol;
  r.description = render_description(r, spec, cell.radius_nm);
  return r;
}

std::string render_description(const AnnotationRecord& r, const MaterialSpec& spec, double radius_nm) {
  return fmt::format(
      "{} ({}) {} cluster cut as a sphere of radius {} nm ({:.1f} A) containing {} atoms. "
      "The parent crystal is {} with space group {} (No. {}) and primitive cell "
      "a = {:.4f} A, b = {:.4f} A, c = {:.4f} A, alpha = {:.2f} deg, beta = {:.2f} deg, gamma = {:.2f} deg. "
      "Mean nearest-neighbour distance {:.4f} A; cluster volume {:.2f} A^3; density {:.4f} g/cm^3.",
      spec.name, spec.formula, spec.structure, radius_nm, nm_to_angstrom(radius_nm), r.n_atoms,
      to_string(spec.lattice_system), spec.space_group.symbol, spec.space_group.number, r.a_p, r.b_p, r.c_p,
      r.alpha_p, r.beta_p, r.gamma_p, r.mean_nn_distance, r.cell_volume, r.density);
}

std::string to_json_text(const AnnotationRecord& r) {
  ordered_json j;
  for (auto f : kAllFields) {
    const auto key = std::string(field_name(f));
    if (f == Field::NAtoms) {
      j[key] = r.n_atoms;
    } else if (f == Field::SpaceGroup) {
      j[key] = r.space_group;
    } else if (f == Field::Description) {
      j[key] = r.description;
    } else {
      j[key] = numeric_value(r, f);
    }
  }
  return j.dump(2) + "\n";
}

AnnotationRecord annotation_from_json_text(std::string_view text) {
  const auto j = ordered_json::parse(text, nullptr, false);
  if (j.is_discarded() || !j.is_object()) throw ParseError("annotation: not a JSON object");
  AnnotationRecord r;
  auto number = [&](Field f) {
    const auto key = std::string(field_name(f));
    if (!j.contains(key) || !j[key].is_number()) throw ParseError(fmt::format("annotation: missing numeric field '{}'", key));
    return j[key].get<double>();
  };
  auto text_field = [&](Field f) {
    const auto key = std::string(field_name(f));
    if (!j.contains(key) || !j[key].is_string()) throw ParseError(fmt::format("annotation: missing text field '{}'", key));
    return j[key].get<std::string>();
  };
  if (!j.contains("n_atoms") || !j["n_atoms"].is_number_integer()) throw ParseError("annotation: missing integer field 'n_atoms'");
  r.n_atoms = j["n_atoms"].get<int>();
  r.cell_volume = number(Field::CellVolume);
  r.a = number(Field::A);
  r.b = number(Field::B);
  r.c = number(Field::C);
  r.mean_nn_distance = number(Field::MeanNnDistance);
  r.density = number(Field::Density);
  r.a_p = number(Field::APrim);
  r.b_p = number(Field::BPrim);
  r.c_p = number(Field::CPrim);
  r.alpha_p = number(Field::AlphaPrim);
  r.beta_p = number(Field::BetaPrim);
  r.gamma_p = number(Field::GammaPrim);
  r.space_group = text_field(Field::SpaceGroup);
  r.description = text_field(Field::Description);
  return r;
}

void write_annotation(const AnnotationRecord& record, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(fmt::format("cannot open '{}' for writing", path.string()));
  out << to_json_text(record);
}

AnnotationRecord read_annotation(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(fmt::format("cannot open '{}'", path.string()));
  std::stringstream buf;
  buf << in.rdbuf();
  return annotation_from_json_text(buf.str());
}

}  // namespace xtalbench
