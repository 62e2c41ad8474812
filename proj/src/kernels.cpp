#include "xtalbench/kernels.hpp"

#include <omp.h>

#include <algorithm>
#include <cmath>
#include <iterator>
#include <limits>

namespace xtalbench::kernels {

namespace {

inline void append_slab(const Mat3& translations, std::span<const MotifSite> motif, const IndexBox& box,
                        int n1, const Vec3& center, double radius, std::vector<Atom>& out) {
  for (int n2 = box.lo[1]; n2 <= box.hi[1]; ++n2) {
    for (int n3 = box.lo[2]; n3 <= box.hi[2]; ++n3) {
      const Vec3 origin = translations * Vec3(n1, n2, n3);
      for (const auto& site : motif) {
        const Vec3 r = origin + site.offset;
        if ((r - center).norm() <= radius) out.push_back({site.element, r});
      }
    }
  }
}

inline double nearest_distance(std::span<const Atom> atoms, std::size_t i) {
  double best = std::numeric_limits<double>::infinity();
  for (std::size_t j = 0; j < atoms.size(); ++j) {
    if (j == i) continue;
    best = std::min(best, (atoms[i].position - atoms[j].position).norm());
  }
  return best;
}

inline void check_nn_input(std::span<const Atom> atoms) {
  if (atoms.size() < 2) throw ArgumentError("nearest-neighbour distance needs at least two atoms");
}

inline double disk_extent(const Disk& d) { return d.radius + 4.0 * d.sigma; }

inline void shade_pixel(double* px, const Disk& d, int x, int y) {
  const double dx = (x + 0.5) - d.cx;
  const double dy = (y + 0.5) - d.cy;
  const double dist = std::sqrt(dx * dx + dy * dy);
  const double alpha = d.sigma > 0 ? 0.5 * std::erfc((dist - d.radius) / (d.sigma * std::sqrt(2.0)))
                                   : (dist <= d.radius ? 1.0 : 0.0);
  px[0] += alpha * (d.color.r - px[0]);
  px[1] += alpha * (d.color.g - px[1]);
  px[2] += alpha * (d.color.b - px[2]);
}

inline void row_span(const Disk& d, int width, int& x0, int& x1) {
  const double ext = disk_extent(d);
  x0 = std::max(0, static_cast<int>(std::floor(d.cx - ext)));
  x1 = std::min(width - 1, static_cast<int>(std::ceil(d.cx + ext)));
}

inline bool covers_row(const Disk& d, int y) {
  const double ext = disk_extent(d);
  return y >= std::floor(d.cy - ext) && y <= std::ceil(d.cy + ext);
}

}  // namespace

std::vector<Atom> retain_within_sphere(const Mat3& translations, std::span<const MotifSite> motif,
                                       const IndexBox& box, const Vec3& center, double radius) {
  const int slabs = box.hi[0] - box.lo[0] + 1;
  if (slabs <= 0) return {};
  std::vector<std::vector<Atom>> per_slab(static_cast<std::size_t>(slabs));
#pragma omp parallel for schedule(dynamic)
  for (int s = 0; s < slabs; ++s) {
    append_slab(translations, motif, box, box.lo[0] + s, center, radius, per_slab[static_cast<std::size_t>(s)]);
  }
  std::vector<Atom> out;
  for (auto& slab : per_slab) {
    std::move(slab.begin(), slab.end(), std::back_inserter(out));
  }
  return out;
}

std::vector<Atom> retain_within_sphere_serial(const Mat3& translations, std::span<const MotifSite> motif,
                                              const IndexBox& box, const Vec3& center, double radius) {
  std::vector<Atom> out;
  for (int n1 = box.lo[0]; n1 <= box.hi[0]; ++n1) {
    append_slab(translations, motif, box, n1, center, radius, out);
  }
  return out;
}

double mean_nearest_neighbor(std::span<const Atom> atoms) {
  check_nn_input(atoms);
  const auto n = static_cast<long long>(atoms.size());
  std::vector<double> nearest(atoms.size());
#pragma omp parallel for schedule(static)
  for (long long i = 0; i < n; ++i) {
    nearest[static_cast<std::size_t>(i)] = nearest_distance(atoms, static_cast<std::size_t>(i));
  }
  double sum = 0;
  for (double d : nearest) sum += d;
  return sum / static_cast<double>(atoms.size());
}

double mean_nearest_neighbor_serial(std::span<const Atom> atoms) {
  check_nn_input(atoms);
  double sum = 0;
  for (std::size_t i = 0; i < atoms.size(); ++i) sum += nearest_distance(atoms, i);
  return sum / static_cast<double>(atoms.size());
}

std::vector<Atom> rotate_about(std::span<const Atom> atoms, const Mat3& rotation, const Vec3& center) {
  std::vector<Atom> out(atoms.begin(), atoms.end());
  const auto n = static_cast<long long>(out.size());
#pragma omp parallel for schedule(static)
  for (long long i = 0; i < n; ++i) {
    auto& a = out[static_cast<std::size_t>(i)];
    a.position = rotation * (a.position - center) + center;
  }
  return out;
}

std::vector<Atom> rotate_about_serial(std::span<const Atom> atoms, const Mat3& rotation, const Vec3& center) {
  std::vector<Atom> out(atoms.begin(), atoms.end());
  for (auto& a : out) a.position = rotation * (a.position - center) + center;
  return out;
}

Canvas::Canvas(int w, int h, Rgb background) : width(w), height(h), rgb(static_cast<std::size_t>(w) * h * 3) {
  for (std::size_t i = 0; i < rgb.size(); i += 3) {
    rgb[i] = background.r;
    rgb[i + 1] = background.g;
    rgb[i + 2] = background.b;
  }
}

void composite_disks(Canvas& canvas, std::span<const Disk> disks) {
  const int height = canvas.height;
  const int width = canvas.width;
#pragma omp parallel for schedule(static)
  for (int y = 0; y < height; ++y) {
    double* row = canvas.rgb.data() + static_cast<std::size_t>(y) * width * 3;
    for (const auto& d : disks) {
      if (!covers_row(d, y)) continue;
      int x0 = 0, x1 = -1;
      row_span(d, width, x0, x1);
      for (int x = x0; x <= x1; ++x) shade_pixel(row + 3 * x, d, x, y);
    }
  }
}

void composite_disks_serial(Canvas& canvas, std::span<const Disk> disks) {
  for (const auto& d : disks) {
    const double ext = disk_extent(d);
    const int y0 = std::max(0, static_cast<int>(std::floor(d.cy - ext)));
    const int y1 = std::min(canvas.height - 1, static_cast<int>(std::ceil(d.cy + ext)));
    int x0 = 0, x1 = -1;
    row_span(d, canvas.width, x0, x1);
    for (int y = y0; y <= y1; ++y) {
      double* row = canvas.rgb.data() + static_cast<std::size_t>(y) * canvas.width * 3;
      for (int x = x0; x <= x1; ++x) shade_pixel(row + 3 * x, d, x, y);
    }
  }
}

}  // namespace xtalbench::kernels
