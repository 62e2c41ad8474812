#pragma once

#include "xtalbench/common.hpp"
#include "xtalbench/materials.hpp"
#include "xtalbench/supercell.hpp"

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace xtalbench {

struct ProjectedAtom {
  std::string element;
  double x = 0, y = 0;  // image-plane coordinates, angstrom
  double z = 0;         // kept only for draw ordering
};

/// Orthographic projection onto the xy-plane.
std::vector<ProjectedAtom> project(const Supercell& cell);
std::vector<ProjectedAtom> project(std::span<const Atom> atoms);

struct RenderConfig {
  int width = 64;
  int height = 64;
  std::optional<double> blur_sigma;    // pixels; default 0.35 x disk radius, at least 0.5
  std::optional<double> radius_scale;  // pixels per angstrom of covalent radius; default = framing scale
  Rgb background{0, 0, 0};
  bool depth_sort = true;
  // Framing: the sphere of frame_radius (plus the largest covalent radius
  // present) around frame_center fills fill_fraction of the short side.
  std::optional<double> frame_radius;  // angstrom; default = max distance from the centroid
  std::optional<Vec3> frame_center;    // angstrom; default = centroid
  double fill_fraction = 0.9;
  int jpeg_quality = 90;

  /// Throws ArgumentError.
  void validate() const;
};

struct Image {
  int width = 0;
  int height = 0;
  std::vector<std::uint8_t> rgb;  // row-major, 3 bytes per pixel

  bool operator==(const Image&) const = default;
  std::array<std::uint8_t, 3> pixel(int x, int y) const;
};

/// Draws Gaussian-blurred disks back to front by z. Pure function of its
/// inputs. Returns the background image (with a warning) when no disk can
/// be seen.
Image rasterize(std::span<const ProjectedAtom> projected, const ElementTable& elements, const RenderConfig& cfg);

/// Same pixels as rasterize(), composited with the serial reference kernel.
Image rasterize_serial(std::span<const ProjectedAtom> projected, const ElementTable& elements,
                       const RenderConfig& cfg);

std::vector<std::uint8_t> encode_png(const Image& image);
Image decode_png(std::span<const std::uint8_t> bytes);
std::vector<std::uint8_t> encode_jpeg(const Image& image, int quality);

void write_bytes(const std::filesystem::path& path, std::span<const std::uint8_t> bytes);
std::vector<std::uint8_t> read_bytes(const std::filesystem::path& path);

}  // namespace xtalbench
