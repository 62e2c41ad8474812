#include "xtalbench/xyz.hpp"

#include "xtalbench/orientation.hpp"

#include <fmt/format.h>

#include <charconv>
#include <fstream>
#include <sstream>
#include <vector>

namespace xtalbench {

namespace {

std::vector<std::string_view> tokens(std::string_view s) {
  std::vector<std::string_view> out;
  std::size_t i = 0;
  while (i < s.size()) {
    while (i < s.size() && (s[i] == ' ' || s[i] == '\t' || s[i] == '\r')) ++i;
    const auto start = i;
    while (i < s.size() && s[i] != ' ' && s[i] != '\t' && s[i] != '\r') ++i;
    if (i > start) out.push_back(s.substr(start, i - start));
  }
  return out;
}

template <class T>
bool parse_full(std::string_view s, T& out) {
  const auto* end = s.data() + s.size();
  auto [ptr, ec] = std::from_chars(s.data(), end, out);
  return ec == std::errc{} && ptr == end;
}

// Six decimals, with "-0.000000" written as "0.000000".
std::string coordinate(double v) {
  auto s = fmt::format("{:.6f}", v);
  if (s == "-0.000000") s.erase(0, 1);
  return s;
}

}  // namespace

std::string format_xyz_atoms(const Supercell& cell) {
  std::string out;
  for (const auto& a : cell.atoms) {
    out += fmt::format("{} {} {} {}\n", a.element, coordinate(a.position.x()), coordinate(a.position.y()),
                       coordinate(a.position.z()));
  }
  return out;
}

std::string format_xyz(const Supercell& cell, int pose) {
  return fmt::format("{}\nmaterial={} R={} pose={}\n", cell.atoms.size(), cell.material, cell.radius_nm, pose) +
         format_xyz_atoms(cell);
}

void write_xyz(const Supercell& cell, const std::filesystem::path& path, int pose) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(fmt::format("cannot open '{}' for writing", path.string()));
  out << format_xyz(cell, pose);
}

XyzFile parse_xyz(std::string_view text) {
  std::vector<std::string_view> lines;
  std::size_t pos = 0;
  while (pos < text.size()) {
    const auto nl = text.find('\n', pos);
    lines.push_back(text.substr(pos, nl == std::string_view::npos ? text.size() - pos : nl - pos));
    pos = nl == std::string_view::npos ? text.size() : nl + 1;
  }
  auto fail = [](std::size_t line, std::string_view what) -> void {
    throw ParseError(fmt::format("xyz line {}: {}", line, what));
  };
  if (lines.empty()) fail(1, "empty file");

  const auto count_tok = tokens(lines[0]);
  long long count = -1;
  if (count_tok.size() != 1 || !parse_full(count_tok[0], count) || count < 0) fail(1, "expected an atom count");

  XyzFile out;
  if (lines.size() < 2) fail(2, "missing comment line");
  for (auto kv : tokens(lines[1])) {
    const auto eq = kv.find('=');
    if (eq == std::string_view::npos) continue;
    const auto key = kv.substr(0, eq);
    const auto value = kv.substr(eq + 1);
    if (key == "material") {
      out.cell.material = std::string(value);
    } else if (key == "R") {
      if (!parse_full(value, out.cell.radius_nm)) fail(2, fmt::format("bad radius '{}'", value));
    } else if (key == "pose") {
      if (!parse_full(value, out.pose)) fail(2, fmt::format("bad pose '{}'", value));
    }
  }

  std::size_t line = 2;
  for (; line < lines.size(); ++line) {
    const auto tok = tokens(lines[line]);
    if (tok.empty()) {
      // Only trailing blank lines are allowed.
      for (auto rest = line; rest < lines.size(); ++rest) {
        if (!tokens(lines[rest]).empty()) fail(rest + 1, "atom line after a blank line");
      }
      break;
    }
    if (tok.size() != 4) fail(line + 1, fmt::format("expected '<El> x y z', got {} fields", tok.size()));
    Atom a;
    a.element = std::string(tok[0]);
    for (int i = 0; i < 3; ++i) {
      double v = 0;
      if (!parse_full(tok[static_cast<std::size_t>(i) + 1], v)) {
        fail(line + 1, fmt::format("bad coordinate '{}'", tok[static_cast<std::size_t>(i) + 1]));
      }
      a.position[i] = v;
    }
    out.cell.atoms.push_back(std::move(a));
  }
  if (static_cast<long long>(out.cell.atoms.size()) != count) {
    fail(line + 1, fmt::format("atom count {} does not match {} atom lines", count, out.cell.atoms.size()));
  }
  out.cell.center = centroid(out.cell.atoms);
  return out;
}

XyzFile read_xyz(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(fmt::format("cannot open '{}'", path.string()));
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_xyz(buf.str());
}

}  // namespace xtalbench
