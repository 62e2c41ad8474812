#pragma once

#include "xtalbench/supercell.hpp"

#include <filesystem>
#include <string>
#include <string_view>

namespace xtalbench {

// XYZ layout:
//   line 1  atom count
//   line 2  material=<name> R=<nm> pose=<k>
//   then    <El> <x> <y> <z>, six decimals, single spaces

std::string format_xyz(const Supercell& cell, int pose = 0);
void write_xyz(const Supercell& cell, const std::filesystem::path& path, int pose = 0);

struct XyzFile {
  Supercell cell;  // center is the centroid of the parsed atoms
  int pose = 0;
};

/// Throws ParseError with a line number on malformed input.
XyzFile parse_xyz(std::string_view text);
XyzFile read_xyz(const std::filesystem::path& path);

/// Atom lines only, without count or comment.
std::string format_xyz_atoms(const Supercell& cell);

}  // namespace xtalbench
