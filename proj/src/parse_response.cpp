#include "xtalbench/prediction.hpp"

#include <json.hpp>

#include <array>
#include <cctype>
#include <charconv>
#include <cmath>
#include <numbers>
#include <utility>
#include <vector>

namespace xtalbench {

namespace {

using json = nlohmann::json;

enum class UnitClass { None, Length, Volume, Density, Angle };

UnitClass unit_class(Field f) {
  switch (f) {
    case Field::A:
    case Field::B:
    case Field::C:
    case Field::APrim:
    case Field::BPrim:
    case Field::CPrim:
    case Field::MeanNnDistance: return UnitClass::Length;
    case Field::CellVolume: return UnitClass::Volume;
    case Field::Density: return UnitClass::Density;
    case Field::AlphaPrim:
    case Field::BetaPrim:
    case Field::GammaPrim: return UnitClass::Angle;
    default: return UnitClass::None;
  }
}

// Greek letters and the angstrom sign spelled out so the ASCII tables below
// can match them.
std::string transliterate(std::string_view s) {
  static constexpr std::array<std::pair<std::string_view, std::string_view>, 11> table{{
      {"\xCF\x81", "rho"},        // ρ
      {"\xCE\xB1", "alpha"},      // α
      {"\xCE\xB2", "beta"},       // β
      {"\xCE\xB3", "gamma"},      // γ
      {"\xC3\x85", "angstrom"},   // Å
      {"\xE2\x84\xAB", "angstrom"},  // Å (angstrom sign)
      {"\xC2\xB3", "^3"},         // ³
      {"\xC2\xB0", "deg"},        // °
      {"\xE2\x81\xBB\xC2\xB3", "^-3"},  // ⁻³
      {"\xC2\xB7", " "},          // ·
      {"\xE2\x9F\xA8", ""},       // ⟨
  }};
  std::string out;
  out.reserve(s.size());
  std::size_t i = 0;
  while (i < s.size()) {
    bool matched = false;
    for (const auto& [from, to] : table) {
      if (s.substr(i, from.size()) == from) {
        out += to;
        i += from.size();
        matched = true;
        break;
      }
    }
    if (!matched) out += s[i++];
  }
  return out;
}

// Lowercase, every run of non-alphanumerics collapsed to one underscore.
std::string normalize_label(std::string_view s) {
  const auto t = transliterate(s);
  std::string out;
  for (char ch : t) {
    const auto c = static_cast<unsigned char>(ch);
    if (std::isalnum(c)) {
      out += static_cast<char>(std::tolower(c));
    } else if (!out.empty() && out.back() != '_') {
      out += '_';
    }
  }
  while (!out.empty() && out.back() == '_') out.pop_back();
  return out;
}

struct Alias {
  std::string_view label;
  Field field;
};

constexpr std::array kAliases{
    Alias{"n_atoms", Field::NAtoms},
    Alias{"natoms", Field::NAtoms},
    Alias{"n", Field::NAtoms},
    Alias{"atoms", Field::NAtoms},
    Alias{"atom_count", Field::NAtoms},
    Alias{"num_atoms", Field::NAtoms},
    Alias{"number_of_atoms", Field::NAtoms},
    Alias{"total_atoms", Field::NAtoms},
    Alias{"cell_volume", Field::CellVolume},
    Alias{"volume", Field::CellVolume},
    Alias{"v", Field::CellVolume},
    Alias{"v_cell", Field::CellVolume},
    Alias{"supercell_volume", Field::CellVolume},
    Alias{"a", Field::A},
    Alias{"lattice_a", Field::A},
    Alias{"lattice_parameter_a", Field::A},
    Alias{"lattice_constant_a", Field::A},
    Alias{"b", Field::B},
    Alias{"lattice_b", Field::B},
    Alias{"lattice_parameter_b", Field::B},
    Alias{"lattice_constant_b", Field::B},
    Alias{"c", Field::C},
    Alias{"lattice_c", Field::C},
    Alias{"lattice_parameter_c", Field::C},
    Alias{"lattice_constant_c", Field::C},
    Alias{"mean_nn_distance", Field::MeanNnDistance},
    Alias{"nn_distance", Field::MeanNnDistance},
    Alias{"r_nn", Field::MeanNnDistance},
    Alias{"mean_nearest_neighbor_distance", Field::MeanNnDistance},
    Alias{"average_nearest_neighbor_distance", Field::MeanNnDistance},
    Alias{"nearest_neighbor_distance", Field::MeanNnDistance},
    Alias{"mean_nearest_neighbour_distance", Field::MeanNnDistance},
    Alias{"average_nearest_neighbour_distance", Field::MeanNnDistance},
    Alias{"nearest_neighbour_distance", Field::MeanNnDistance},
    Alias{"density", Field::Density},
    Alias{"rho", Field::Density},
    Alias{"bulk_density", Field::Density},
    Alias{"mass_density", Field::Density},
    Alias{"a_p", Field::APrim},
    Alias{"a0", Field::APrim},
    Alias{"a_0", Field::APrim},
    Alias{"a_prim", Field::APrim},
    Alias{"primitive_a", Field::APrim},
    Alias{"b_p", Field::BPrim},
    Alias{"b0", Field::BPrim},
    Alias{"b_0", Field::BPrim},
    Alias{"b_prim", Field::BPrim},
    Alias{"primitive_b", Field::BPrim},
    Alias{"c_p", Field::CPrim},
    Alias{"c0", Field::CPrim},
    Alias{"c_0", Field::CPrim},
    Alias{"c_prim", Field::CPrim},
    Alias{"primitive_c", Field::CPrim},
    Alias{"alpha_p", Field::AlphaPrim},
    Alias{"alpha", Field::AlphaPrim},
    Alias{"alpha_prim", Field::AlphaPrim},
    Alias{"primitive_alpha", Field::AlphaPrim},
    Alias{"beta_p", Field::BetaPrim},
    Alias{"beta", Field::BetaPrim},
    Alias{"beta_prim", Field::BetaPrim},
    Alias{"primitive_beta", Field::BetaPrim},
    Alias{"gamma_p", Field::GammaPrim},
    Alias{"gamma", Field::GammaPrim},
    Alias{"gamma_prim", Field::GammaPrim},
    Alias{"primitive_gamma", Field::GammaPrim},
    Alias{"space_group", Field::SpaceGroup},
    Alias{"spacegroup", Field::SpaceGroup},
    Alias{"sg", Field::SpaceGroup},
    Alias{"space_group_symbol", Field::SpaceGroup},
    Alias{"description", Field::Description},
    Alias{"desc", Field::Description},
    Alias{"summary", Field::Description},
};

std::string_view skip_space(std::string_view s) {
  std::size_t i = 0;
  while (i < s.size() && (s[i] == ' ' || s[i] == '\t' || s[i] == '"' || s[i] == '\'' || s[i] == '~' || s[i] == '*')) ++i;
  return s.substr(i);
}

std::optional<double> unit_factor(UnitClass cls, std::string_view unit_raw) {
  const auto unit = normalize_label(unit_raw);
  if (unit.empty()) return 1.0;
  auto starts = [&](std::string_view prefix) { return unit.rfind(prefix, 0) == 0; };
  switch (cls) {
    case UnitClass::Length:
      if (starts("nm") || starts("nanomet")) return 10.0;
      if (starts("pm") || starts("picomet")) return 0.01;
      if (starts("angstrom") || unit == "a" || starts("ang")) return 1.0;
      return 1.0;
    case UnitClass::Volume:
      if (starts("nm") || starts("cubic_nm") || starts("cubic_nanomet")) return 1000.0;
      if (starts("pm") || starts("cubic_pm") || starts("cubic_picomet")) return 1e-6;
      return 1.0;
    case UnitClass::Density:
      if (starts("kg")) return 1e-3;
      return 1.0;
    case UnitClass::Angle:
      if (starts("rad")) return 180.0 / std::numbers::pi;
      return 1.0;
    case UnitClass::None: return 1.0;
  }
  return 1.0;
}

// Unit text runs to the next separator.
std::string_view unit_token(std::string_view s) {
  std::size_t i = 0;
  while (i < s.size() && (s[i] == ' ' || s[i] == '\t')) ++i;
  const auto start = i;
  while (i < s.size()) {
    const char ch = s[i];
    if (ch == ',' || ch == ';' || ch == '\n' || ch == '\r' || ch == ')' || ch == '(' || ch == '"' || ch == '}') break;
    // "4.08 A and" stops at the word after the unit.
    if ((ch == ' ' || ch == '\t') && i > start) {
      const auto rest = s.substr(i + 1);
      const bool per = rest.rfind("per ", 0) == 0 || rest.rfind("cm", 0) == 0 || rest.rfind("m^", 0) == 0 ||
                       rest.rfind("m3", 0) == 0 || rest.rfind("^", 0) == 0;
      if (!per) break;
    }
    ++i;
  }
  return s.substr(start, i - start);
}

constexpr std::size_t kMaxJsonCandidates = 64;

bool absorb_json_value(PredictionRecord& r, Field f, const json& value) {
  if (r.has(f)) return false;
  if (value.is_number()) {
    const double v = value.get<double>();
    if (!std::isfinite(v)) return false;
    if (is_numeric(f)) {
      r.set_number(f, v);
    } else {
      // A space-group number given as a bare integer.
      std::string text = value.is_number_integer() ? std::to_string(value.get<long long>()) : value.dump();
      if (f == Field::SpaceGroup) r.space_group = std::move(text);
      if (f == Field::Description) r.description = std::move(text);
      r.kinds[f] = ValueKind::Number;
    }
    return true;
  }
  if (value.is_string()) {
    const auto& text = value.get_ref<const std::string&>();
    if (is_numeric(f)) {
      if (const auto v = parse_quantity(text, f)) {
        r.set_number(f, *v, ValueKind::String);
      } else {
        r.kinds[f] = ValueKind::String;
      }
    } else {
      r.set_text(f, text);
    }
    return true;
  }
  return false;
}

void absorb_json(PredictionRecord& r, const json& node, int depth) {
  if (depth > 4 || !node.is_object()) return;
  for (const auto& [key, value] : node.items()) {
    if (const auto f = field_from_alias(key)) {
      if (absorb_json_value(r, *f, value)) continue;
    }
    if (value.is_object()) absorb_json(r, value, depth + 1);
  }
}

// Closing brace for the object opening at `open`, honouring string literals.
std::optional<std::size_t> matching_brace(std::string_view s, std::size_t open) {
  int depth = 0;
  bool in_string = false;
  for (std::size_t i = open; i < s.size(); ++i) {
    const char ch = s[i];
    if (in_string) {
      if (ch == '\\') {
        ++i;
      } else if (ch == '"') {
        in_string = false;
      }
      continue;
    }
    if (ch == '"') {
      in_string = true;
    } else if (ch == '{') {
      ++depth;
    } else if (ch == '}') {
      if (--depth == 0) return i;
    }
  }
  return std::nullopt;
}

std::vector<std::string_view> json_candidates(std::string_view raw) {
  std::vector<std::string_view> out;
  // Fenced blocks first.
  for (std::size_t pos = raw.find("```"); pos != std::string_view::npos && out.size() < kMaxJsonCandidates;) {
    auto body_start = raw.find('\n', pos + 3);
    if (body_start == std::string_view::npos) break;
    ++body_start;
    const auto end = raw.find("```", body_start);
    if (end == std::string_view::npos) break;
    out.push_back(raw.substr(body_start, end - body_start));
    pos = raw.find("```", end + 3);
  }
  std::size_t scanned = 0;
  for (std::size_t pos = raw.find('{'); pos != std::string_view::npos && scanned < kMaxJsonCandidates;
       pos = raw.find('{', pos + 1)) {
    ++scanned;
    if (const auto close = matching_brace(raw, pos)) {
      out.push_back(raw.substr(pos, *close - pos + 1));
      pos = *close;
    }
  }
  return out;
}

bool parse_json_block(PredictionRecord& r, std::string_view raw) {
  for (const auto candidate : json_candidates(raw)) {
    const auto j = json::parse(candidate, nullptr, false);
    if (j.is_discarded() || !j.is_object()) continue;
    PredictionRecord trial;
    absorb_json(trial, j, 0);
    if (!trial.kinds.empty()) {
      trial.raw_response = std::move(r.raw_response);
      r = std::move(trial);
      return true;
    }
  }
  return false;
}

std::vector<std::string_view> label_words(std::string_view label) {
  std::vector<std::string_view> words;
  std::size_t i = 0;
  while (i < label.size()) {
    while (i < label.size() && (label[i] == ' ' || label[i] == '\t')) ++i;
    const auto start = i;
    while (i < label.size() && label[i] != ' ' && label[i] != '\t') ++i;
    if (i > start) words.push_back(label.substr(start, i - start));
  }
  return words;
}

std::optional<Field> match_label(std::string_view label) {
  const auto words = label_words(label);
  const std::size_t max_words = std::min<std::size_t>(4, words.size());
  for (std::size_t n = max_words; n >= 1; --n) {
    const auto* first = words[words.size() - n].data();
    const auto* last = words.back().data() + words.back().size();
    if (const auto f = field_from_alias(std::string_view(first, static_cast<std::size_t>(last - first)))) return f;
  }
  return std::nullopt;
}

std::string_view trim_text(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r\"'*`");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r\"'*`.,;");
  if (last == std::string_view::npos || last < first) return {};
  return s.substr(first, last - first + 1);
}

void parse_labeled(PredictionRecord& r, std::string_view raw) {
  for (std::size_t i = 0; i < raw.size(); ++i) {
    if (raw[i] != ':' && raw[i] != '=') continue;
    auto label_start = raw.find_last_of("\n,;({|", i == 0 ? 0 : i - 1);
    label_start = (label_start == std::string_view::npos || i == 0) ? 0 : label_start + 1;
    if (i == 0) continue;
    const auto f = match_label(raw.substr(label_start, i - label_start));
    if (!f || r.has(*f)) continue;
    auto line_end = raw.find('\n', i + 1);
    if (line_end == std::string_view::npos) line_end = raw.size();
    const auto value = raw.substr(i + 1, line_end - i - 1);
    if (is_numeric(*f)) {
      if (const auto v = parse_quantity(value, *f)) r.set_number(*f, *v);
    } else if (*f == Field::SpaceGroup) {
      auto text = trim_text(value);
      const auto stop = text.find_first_of(",;(");
      text = trim_text(text.substr(0, stop));
      if (!text.empty()) r.set_text(*f, std::string(text));
    } else {
      const auto text = trim_text(value);
      if (!text.empty()) r.set_text(*f, std::string(text));
    }
  }
}

}  // namespace

std::optional<Field> field_from_alias(std::string_view label) {
  const auto key = normalize_label(label);
  if (key.empty()) return std::nullopt;
  for (const auto& alias : kAliases) {
    if (alias.label == key) return alias.field;
  }
  return std::nullopt;
}

std::optional<double> parse_quantity(std::string_view text, Field field) {
  auto s = skip_space(text);
  if (!s.empty() && s.front() == '+') s.remove_prefix(1);
  double v = 0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc{} || !std::isfinite(v)) return std::nullopt;
  const auto rest = s.substr(static_cast<std::size_t>(ptr - s.data()));
  // "4.08nm" and "4.08 nm" both accepted; a letter glued to the number after
  // the exponent is part of the unit.
  const auto factor = unit_factor(unit_class(field), unit_token(rest));
  if (!factor) return std::nullopt;
  const double scaled = v * *factor;
  if (!std::isfinite(scaled)) return std::nullopt;
  return scaled;
}

PredictionRecord parse_response(std::string_view raw) {
  PredictionRecord r;
  r.raw_response = std::string(raw);
  try {
    if (!parse_json_block(r, raw)) parse_labeled(r, raw);
  } catch (const std::exception&) {
    // Allocation failure on adversarial input; report nothing extracted.
    r = PredictionRecord{};
    r.raw_response = std::string(raw);
  }
  r.parse_ok = !r.kinds.empty();
  return r;
}

}  // namespace xtalbench
