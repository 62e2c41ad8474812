#include "xtalbench/materials.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <charconv>
#include <fstream>
#include <optional>
#include <sstream>

namespace xtalbench {

namespace {

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

std::vector<std::string_view> split_ws(std::string_view s) {
  std::vector<std::string_view> out;
  std::size_t i = 0;
  while (i < s.size()) {
    while (i < s.size() && (s[i] == ' ' || s[i] == '\t')) ++i;
    const auto start = i;
    while (i < s.size() && s[i] != ' ' && s[i] != '\t') ++i;
    if (i > start) out.push_back(s.substr(start, i - start));
  }
  return out;
}

std::optional<double> parse_plain(std::string_view s) {
  double v = 0;
  const auto* end = s.data() + s.size();
  auto [ptr, ec] = std::from_chars(s.data(), end, v);
  if (ec != std::errc{} || ptr != end) return std::nullopt;
  return v;
}

// Accepts a decimal literal or an exact fraction "p/q".
std::optional<double> parse_number(std::string_view s) {
  if (const auto slash = s.find('/'); slash != std::string_view::npos) {
    const auto num = parse_plain(s.substr(0, slash));
    const auto den = parse_plain(s.substr(slash + 1));
    if (!num || !den || *den == 0) return std::nullopt;
    return *num / *den;
  }
  return parse_plain(s);
}

struct Context {
  std::string_view source;
  std::size_t line = 0;
  std::string material;

  [[noreturn]] void fail(std::string_view field, std::string_view what) const {
    throw LoadError(fmt::format("{}:{}: material '{}', field '{}': {}", source, line,
                                material.empty() ? "<none>" : material, field, what));
  }
};

double require_number(const Context& ctx, std::string_view field, std::string_view value) {
  const auto v = parse_number(value);
  if (!v) ctx.fail(field, fmt::format("expected a number, got '{}'", value));
  return *v;
}

}  // namespace

std::string_view to_string(LatticeSystem system) {
  switch (system) {
    case LatticeSystem::CubicFcc: return "cubic-FCC";
    case LatticeSystem::Cubic: return "cubic";
    case LatticeSystem::Tetragonal: return "tetragonal";
    case LatticeSystem::Hexagonal: return "hexagonal";
    case LatticeSystem::Rhombohedral: return "rhombohedral";
    case LatticeSystem::Triclinic: return "triclinic";
  }
  return "unknown";
}

LatticeSystem lattice_system_from_string(std::string_view text) {
  for (auto s : {LatticeSystem::CubicFcc, LatticeSystem::Cubic, LatticeSystem::Tetragonal,
                 LatticeSystem::Hexagonal, LatticeSystem::Rhombohedral, LatticeSystem::Triclinic}) {
    if (to_string(s) == text) return s;
  }
  throw LoadError(fmt::format("unknown lattice system '{}'", text));
}

void validate(const MaterialSpec& spec) {
  auto fail = [&](std::string_view field, std::string_view what) {
    throw LoadError(fmt::format("material '{}', field '{}': {}", spec.name, field, what));
  };
  if (spec.name.empty()) fail("name", "empty");
  const std::array<std::pair<std::string_view, double>, 3> edges{
      {{"a", spec.a0}, {"b", spec.b0}, {"c", spec.c0}}};
  for (const auto& [field, v] : edges) {
    if (!(v > 0)) fail(field, fmt::format("edge must be > 0, got {}", v));
  }
  const std::array<std::pair<std::string_view, double>, 3> angles{
      {{"alpha", spec.alpha0}, {"beta", spec.beta0}, {"gamma", spec.gamma0}}};
  for (const auto& [field, v] : angles) {
    if (!(v > 0 && v < 180)) fail(field, fmt::format("angle must be in (0, 180), got {}", v));
  }
  if (spec.space_group.symbol.empty()) fail("space_group", "missing");
  if (spec.space_group.number < 1 || spec.space_group.number > 230) {
    fail("space_group_number", fmt::format("must be in [1, 230], got {}", spec.space_group.number));
  }
  if (spec.basis.empty()) fail("site", "no basis sites");
  for (const auto& site : spec.basis) {
    if (site.element.empty()) fail("site", "empty element symbol");
    for (int i = 0; i < 3; ++i) {
      const double f = site.fractional[i];
      if (!(f >= 0.0 && f < 1.0)) {
        fail("site", fmt::format("{} fractional coordinate {} outside [0,1)", site.element, f));
      }
    }
  }
}

std::vector<MaterialSpec> parse_materials(std::string_view text, std::string_view source) {
  std::vector<MaterialSpec> out;
  Context ctx{source, 0, {}};
  std::optional<MaterialSpec> current;
  // Every scalar field must be given exactly once.
  std::vector<std::string> seen;

  auto finish = [&]() {
    if (!current) return;
    static constexpr std::array<std::string_view, 11> required{
        "formula", "a", "b", "c", "alpha", "beta", "gamma",
        "space_group", "space_group_number", "lattice_system", "structure"};
    for (auto key : required) {
      if (std::find(seen.begin(), seen.end(), key) == seen.end()) ctx.fail(key, "missing");
    }
    validate(*current);
    out.push_back(std::move(*current));
    current.reset();
    seen.clear();
  };

  std::size_t pos = 0;
  while (pos <= text.size()) {
    const auto nl = text.find('\n', pos);
    const auto raw = text.substr(pos, nl == std::string_view::npos ? text.size() - pos : nl - pos);
    pos = nl == std::string_view::npos ? text.size() + 1 : nl + 1;
    ++ctx.line;

    const auto line = trim(raw);
    if (line.empty() || line.front() == '#') continue;

    if (line.front() == '[') {
      if (line.back() != ']') ctx.fail("header", fmt::format("unterminated section '{}'", line));
      const auto parts = split_ws(line.substr(1, line.size() - 2));
      if (parts.size() != 2 || parts[0] != "material") {
        ctx.fail("header", fmt::format("expected [material <name>], got '{}'", line));
      }
      finish();
      current.emplace();
      current->name = std::string(parts[1]);
      ctx.material = current->name;
      if (std::any_of(out.begin(), out.end(), [&](const auto& m) { return m.name == current->name; })) {
        ctx.fail("name", "duplicate material");
      }
      continue;
    }

    if (!current) ctx.fail("header", "key/value outside a [material] block");
    const auto eq = line.find('=');
    if (eq == std::string_view::npos) ctx.fail(line, "expected key = value");
    const auto key = std::string(trim(line.substr(0, eq)));
    const auto value = trim(line.substr(eq + 1));
    if (value.empty()) ctx.fail(key, "empty value");

    if (key == "site") {
      const auto parts = split_ws(value);
      if (parts.size() != 4) ctx.fail(key, fmt::format("expected '<element> x y z', got '{}'", value));
      BasisSite site;
      site.element = std::string(parts[0]);
      for (int i = 0; i < 3; ++i) site.fractional[i] = require_number(ctx, key, parts[i + 1]);
      current->basis.push_back(std::move(site));
      continue;
    }

    if (std::find(seen.begin(), seen.end(), key) != seen.end()) ctx.fail(key, "given twice");
    seen.push_back(key);

    if (key == "formula") {
      current->formula = std::string(value);
    } else if (key == "structure") {
      current->structure = std::string(value);
    } else if (key == "a") {
      current->a0 = require_number(ctx, key, value);
    } else if (key == "b") {
      current->b0 = require_number(ctx, key, value);
    } else if (key == "c") {
      current->c0 = require_number(ctx, key, value);
    } else if (key == "alpha") {
      current->alpha0 = require_number(ctx, key, value);
    } else if (key == "beta") {
      current->beta0 = require_number(ctx, key, value);
    } else if (key == "gamma") {
      current->gamma0 = require_number(ctx, key, value);
    } else if (key == "space_group") {
      current->space_group.symbol = std::string(value);
    } else if (key == "space_group_number") {
      const double n = require_number(ctx, key, value);
      if (n != static_cast<int>(n)) ctx.fail(key, "must be an integer");
      current->space_group.number = static_cast<int>(n);
    } else if (key == "lattice_system") {
      try {
        current->lattice_system = lattice_system_from_string(value);
      } catch (const LoadError& e) {
        ctx.fail(key, e.what());
      }
    } else {
      ctx.fail(key, "unknown field");
    }
  }
  finish();
  return out;
}

std::vector<MaterialSpec> load_materials() {
  return parse_materials(detail::bundled_materials_text(), "materials.dat");
}

std::vector<MaterialSpec> load_materials_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw LoadError(fmt::format("cannot open materials file '{}'", path.string()));
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_materials(buf.str(), path.string());
}

const MaterialSpec& find_material(const std::vector<MaterialSpec>& materials, std::string_view name) {
  const auto it = std::find_if(materials.begin(), materials.end(), [&](const auto& m) { return m.name == name; });
  if (it == materials.end()) throw LookupError(fmt::format("unknown material '{}'", name));
  return *it;
}

ElementTable ElementTable::parse(std::string_view text, std::string_view source) {
  ElementTable table;
  std::istringstream in{std::string(text)};
  std::string raw;
  std::size_t line_no = 0;
  while (std::getline(in, raw)) {
    ++line_no;
    const auto line = trim(raw);
    if (line.empty() || line.front() == '#') continue;
    const auto parts = split_ws(line);
    auto fail = [&](std::string_view what) {
      throw LoadError(fmt::format("{}:{}: element '{}': {}", source, line_no,
                                  parts.empty() ? "" : parts[0], what));
    };
    if (parts.size() != 6) fail("expected 'symbol mass covalent_radius r g b'");
    ElementData e;
    e.symbol = std::string(parts[0]);
    const auto mass = parse_plain(parts[1]);
    const auto radius = parse_plain(parts[2]);
    if (!mass || !(*mass > 0)) fail("mass must be a positive number");
    if (!radius || !(*radius > 0)) fail("covalent radius must be a positive number");
    e.mass = *mass;
    e.covalent_radius = *radius;
    std::array<std::uint8_t, 3> rgb{};
    for (int i = 0; i < 3; ++i) {
      const auto c = parse_plain(parts[3 + i]);
      if (!c || *c < 0 || *c > 255 || *c != static_cast<int>(*c)) fail("colour channel must be an integer in [0,255]");
      rgb[i] = static_cast<std::uint8_t>(*c);
    }
    e.color = {rgb[0], rgb[1], rgb[2]};
    if (table.entries_.count(e.symbol)) fail("duplicate element");
    table.entries_.emplace(e.symbol, std::move(e));
  }
  return table;
}

const ElementTable& ElementTable::bundled() {
  static const ElementTable table = parse(detail::bundled_elements_text(), "elements.dat");
  return table;
}

const ElementData& ElementTable::at(std::string_view symbol) const {
  const auto it = entries_.find(symbol);
  if (it == entries_.end()) throw LookupError(fmt::format("unknown element '{}'", symbol));
  return it->second;
}

bool ElementTable::contains(std::string_view symbol) const { return entries_.find(symbol) != entries_.end(); }

const ElementData& element_data(std::string_view symbol) { return ElementTable::bundled().at(symbol); }

}  // namespace xtalbench
