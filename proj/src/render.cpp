#include "xtalbench/render.hpp"

#include "xtalbench/kernels.hpp"

#include <fmt/format.h>
#include <spdlog/spdlog.h>

#include <algorithm>
#include <cmath>

namespace xtalbench {

std::vector<ProjectedAtom> project(std::span<const Atom> atoms) {
  std::vector<ProjectedAtom> out;
  out.reserve(atoms.size());
  for (const auto& a : atoms) out.push_back({a.element, a.position.x(), a.position.y(), a.position.z()});
  return out;
}

std::vector<ProjectedAtom> project(const Supercell& cell) { return project(cell.atoms); }

void RenderConfig::validate() const {
  if (width < 16 || height < 16) {
    throw ArgumentError(fmt::format("image must be at least 16x16, got {}x{}", width, height));
  }
  if (blur_sigma && !(*blur_sigma >= 0)) throw ArgumentError("blur_sigma must be >= 0");
  if (radius_scale && !(*radius_scale > 0)) throw ArgumentError("radius_scale must be > 0");
  if (frame_radius && !(*frame_radius >= 0)) throw ArgumentError("frame_radius must be >= 0");
  if (!(fill_fraction > 0 && fill_fraction <= 1)) throw ArgumentError("fill_fraction must be in (0, 1]");
  if (jpeg_quality < 1 || jpeg_quality > 100) throw ArgumentError("jpeg_quality must be in [1, 100]");
}

std::array<std::uint8_t, 3> Image::pixel(int x, int y) const {
  const auto i = (static_cast<std::size_t>(y) * width + x) * 3;
  return {rgb[i], rgb[i + 1], rgb[i + 2]};
}

namespace {

Image blank(const RenderConfig& cfg) {
  Image img{cfg.width, cfg.height, std::vector<std::uint8_t>(static_cast<std::size_t>(cfg.width) * cfg.height * 3)};
  for (std::size_t i = 0; i < img.rgb.size(); i += 3) {
    img.rgb[i] = cfg.background.r;
    img.rgb[i + 1] = cfg.background.g;
    img.rgb[i + 2] = cfg.background.b;
  }
  return img;
}

std::vector<kernels::Disk> layout_disks(std::span<const ProjectedAtom> projected, const ElementTable& elements,
                                        const RenderConfig& cfg) {
  Vec3 center = Vec3::Zero();
  if (cfg.frame_center) {
    center = *cfg.frame_center;
  } else {
    for (const auto& p : projected) center += Vec3(p.x, p.y, p.z);
    center /= static_cast<double>(projected.size());
  }
  double extent = 0;
  if (cfg.frame_radius) {
    extent = *cfg.frame_radius;
  } else {
    for (const auto& p : projected) extent = std::max(extent, (Vec3(p.x, p.y, p.z) - center).norm());
  }
  double max_cov = 0;
  for (const auto& p : projected) max_cov = std::max(max_cov, elements.at(p.element).covalent_radius);

  const double scale = cfg.fill_fraction * std::min(cfg.width, cfg.height) / (2.0 * (extent + max_cov));
  const double disk_scale = cfg.radius_scale.value_or(scale);

  std::vector<std::size_t> order(projected.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  if (cfg.depth_sort) {
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return projected[a].z < projected[b].z; });
  }

  std::vector<kernels::Disk> disks;
  disks.reserve(projected.size());
  for (auto i : order) {
    const auto& p = projected[i];
    const auto& e = elements.at(p.element);
    kernels::Disk d;
    d.cx = cfg.width / 2.0 + (p.x - center.x()) * scale;
    d.cy = cfg.height / 2.0 - (p.y - center.y()) * scale;
    d.radius = disk_scale * e.covalent_radius;
    d.sigma = cfg.blur_sigma.value_or(std::max(0.35 * d.radius, 0.5));
    d.color = e.color;
    disks.push_back(d);
  }
  return disks;
}

bool any_visible(std::span<const kernels::Disk> disks, const RenderConfig& cfg) {
  return std::any_of(disks.begin(), disks.end(), [&](const kernels::Disk& d) {
    const double reach = d.radius + d.sigma;
    return d.radius >= 0.5 && d.cx + reach >= 0 && d.cx - reach <= cfg.width && d.cy + reach >= 0 &&
           d.cy - reach <= cfg.height;
  });
}

Image quantize(const kernels::Canvas& canvas) {
  Image img{canvas.width, canvas.height, std::vector<std::uint8_t>(canvas.rgb.size())};
  for (std::size_t i = 0; i < canvas.rgb.size(); ++i) {
    img.rgb[i] = static_cast<std::uint8_t>(std::clamp(std::lround(canvas.rgb[i]), 0L, 255L));
  }
  return img;
}

template <class Composite>
Image rasterize_with(std::span<const ProjectedAtom> projected, const ElementTable& elements, const RenderConfig& cfg,
                     Composite composite) {
  cfg.validate();
  if (projected.empty()) return blank(cfg);
  const auto disks = layout_disks(projected, elements, cfg);
  if (!any_visible(disks, cfg)) {
    spdlog::warn("render: no disk is visible in a {}x{} image; returning a blank frame", cfg.width, cfg.height);
    return blank(cfg);
  }
  kernels::Canvas canvas(cfg.width, cfg.height, cfg.background);
  composite(canvas, disks);
  return quantize(canvas);
}

}  // namespace

Image rasterize(std::span<const ProjectedAtom> projected, const ElementTable& elements, const RenderConfig& cfg) {
  return rasterize_with(projected, elements, cfg,
                        [](kernels::Canvas& c, std::span<const kernels::Disk> d) { kernels::composite_disks(c, d); });
}

Image rasterize_serial(std::span<const ProjectedAtom> projected, const ElementTable& elements,
                       const RenderConfig& cfg) {
  return rasterize_with(projected, elements, cfg, [](kernels::Canvas& c, std::span<const kernels::Disk> d) {
    kernels::composite_disks_serial(c, d);
  });
}

}  // namespace xtalbench
