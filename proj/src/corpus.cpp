#include "xtalbench/corpus.hpp"

#include "xtalbench/checksum.hpp"
#include "xtalbench/orientation.hpp"

#include <fmt/format.h>
#include <json.hpp>
#include <spdlog/spdlog.h>

#include <algorithm>
#include <exception>
#include <fstream>
#include <sstream>

namespace xtalbench {

namespace fs = std::filesystem;
using ordered_json = nlohmann::ordered_json;

fs::path sample_dir(const fs::path& root, const std::string& material, double radius_nm) {
  return root / material / radius_label(radius_nm);
}

fs::path xyz_path(const fs::path& root, const SampleRef& ref) {
  return sample_dir(root, ref.material, ref.radius_nm) / fmt::format("{}.xyz", ref.pose);
}

fs::path png_path(const fs::path& root, const SampleRef& ref) {
  return sample_dir(root, ref.material, ref.radius_nm) / fmt::format("{}.png", ref.pose);
}

fs::path jpg_path(const fs::path& root, const SampleRef& ref) {
  return sample_dir(root, ref.material, ref.radius_nm) / fmt::format("{}.jpg", ref.pose);
}

fs::path annotation_path(const fs::path& root, const std::string& material, double radius_nm) {
  return sample_dir(root, material, radius_nm) / "annotation.json";
}

std::string manifest_to_json(const DatasetManifest& m) {
  ordered_json j;
  j["format"] = m.format;
  j["input_hash"] = m.input_hash;
  j["corpus_hash"] = m.corpus_hash;
  j["materials"] = m.materials;
  j["radii_nm"] = m.radii_nm;
  j["pose_count"] = m.pose_count;
  auto cells = ordered_json::array();
  for (const auto& s : m.supercells) {
    cells.push_back(ordered_json{{"material", s.material},
                                 {"radius_nm", s.radius_nm},
                                 {"n_atoms", s.n_atoms},
                                 {"multiplicity", s.multiplicity},
                                 {"exceeds_determinant_limit", s.exceeds_determinant_limit},
                                 {"atom_count_in_range", s.atom_count_in_range}});
  }
  j["supercells"] = std::move(cells);
  j["warnings"] = m.warnings;
  auto files = ordered_json::array();
  for (const auto& f : m.files) files.push_back(ordered_json{{"path", f.path}, {"sha256", f.sha256}});
  j["files"] = std::move(files);
  return j.dump(2) + "\n";
}

DatasetManifest manifest_from_json(std::string_view text) {
  const auto j = ordered_json::parse(text, nullptr, false);
  if (j.is_discarded()) throw ParseError("manifest: malformed JSON");
  DatasetManifest m;
  try {
    m.format = j.at("format").get<std::string>();
    if (m.format != kDatasetFormat) throw ParseError(fmt::format("manifest: unsupported format '{}'", m.format));
    m.input_hash = j.at("input_hash").get<std::string>();
    m.corpus_hash = j.at("corpus_hash").get<std::string>();
    m.materials = j.at("materials").get<std::vector<std::string>>();
    m.radii_nm = j.at("radii_nm").get<std::vector<double>>();
    m.pose_count = j.at("pose_count").get<int>();
    for (const auto& c : j.at("supercells")) {
      SupercellSummary s;
      s.material = c.at("material").get<std::string>();
      s.radius_nm = c.at("radius_nm").get<double>();
      s.n_atoms = c.at("n_atoms").get<int>();
      s.multiplicity = c.at("multiplicity").get<std::array<int, 3>>();
      s.exceeds_determinant_limit = c.at("exceeds_determinant_limit").get<bool>();
      s.atom_count_in_range = c.at("atom_count_in_range").get<bool>();
      m.supercells.push_back(std::move(s));
    }
    m.warnings = j.at("warnings").get<std::vector<std::string>>();
    for (const auto& f : j.at("files")) m.files.push_back({f.at("path").get<std::string>(), f.at("sha256").get<std::string>()});
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(fmt::format("manifest: {}", e.what()));
  }
  return m;
}

std::string corpus_hash(const std::vector<ManifestFile>& files) {
  auto sorted = files;
  std::sort(sorted.begin(), sorted.end(), [](const auto& a, const auto& b) { return a.path < b.path; });
  std::string text;
  for (const auto& f : sorted) text += fmt::format("{}  {}\n", f.sha256, f.path);
  return sha256_hex(text);
}

namespace {

std::vector<MaterialSpec> select_materials(const std::vector<std::string>& names) {
  auto all = load_materials();
  if (names.empty()) {
    std::sort(all.begin(), all.end(), [](const auto& a, const auto& b) { return a.name < b.name; });
    return all;
  }
  std::vector<MaterialSpec> out;
  for (const auto& n : names) {
    try {
      out.push_back(find_material(all, n));
    } catch (const LookupError& e) {
      throw ConfigError(e.what());
    }
  }
  std::sort(out.begin(), out.end(), [](const auto& a, const auto& b) { return a.name < b.name; });
  out.erase(std::unique(out.begin(), out.end(), [](const auto& a, const auto& b) { return a.name == b.name; }),
            out.end());
  return out;
}

void check_options(const GenerateOptions& o) {
  if (o.root.empty()) throw ConfigError("output directory not set");
  if (o.radii_nm.empty()) throw ConfigError("no radii given");
  for (double r : o.radii_nm) {
    if (!(r > 0)) throw ConfigError(fmt::format("radius must be > 0 nm, got {}", r));
  }
  if (o.pose_count < 1 || o.pose_count > kPoseCount) {
    throw ConfigError(fmt::format("pose count must be in [1, {}], got {}", kPoseCount, o.pose_count));
  }
  try {
    o.render.validate();
  } catch (const ArgumentError& e) {
    throw ConfigError(e.what());
  }
}

std::vector<double> sorted_radii(std::vector<double> radii) {
  std::sort(radii.begin(), radii.end());
  radii.erase(std::unique(radii.begin(), radii.end()), radii.end());
  return radii;
}

std::string relative_name(const fs::path& root, const fs::path& p) { return fs::relative(p, root).generic_string(); }

std::string read_text(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) throw Error(fmt::format("cannot open '{}'", p.string()));
  std::stringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

struct TaskOutput {
  SupercellSummary summary;
  std::vector<fs::path> files;
  std::vector<std::string> warnings;
};

TaskOutput generate_one(const GenerateOptions& o, const MaterialSpec& spec, double radius_nm,
                        const std::vector<RotationMatrix>& poses) {
  TaskOutput out;
  const auto build = build_supercell(spec, radius_nm);
  const auto& cell = build.cell;
  const auto n_atoms = static_cast<int>(cell.atoms.size());
  out.summary = {spec.name, radius_nm, n_atoms, build.multiplicity.s.diagonal,
                 build.multiplicity.exceeds_determinant_limit,
                 n_atoms >= kAtomCountMin && n_atoms <= kAtomCountMax};
  if (out.summary.exceeds_determinant_limit) {
    out.warnings.push_back(fmt::format("{} R={}: multiplicity det(S) = {} exceeds {}", spec.name,
                                       radius_label(radius_nm), build.multiplicity.s.determinant(),
                                       kMultiplicityDeterminantLimit));
  }
  if (!out.summary.atom_count_in_range) {
    out.warnings.push_back(fmt::format("{} R={}: {} atoms outside [{}, {}]", spec.name, radius_label(radius_nm),
                                       n_atoms, kAtomCountMin, kAtomCountMax));
  }

  const auto dir = sample_dir(o.root, spec.name, radius_nm);
  fs::create_directories(dir);
  const auto record = annotate(cell, spec);
  const auto ann = annotation_path(o.root, spec.name, radius_nm);
  write_annotation(record, ann);
  out.files.push_back(ann);

  // Same framing for every pose of one supercell.
  RenderConfig render = o.render;
  if (!render.frame_radius) render.frame_radius = nm_to_angstrom(radius_nm);
  if (!render.frame_center) render.frame_center = cell.center;

  for (int k = 0; k < static_cast<int>(poses.size()); ++k) {
    const SampleRef ref{spec.name, radius_nm, k};
    const auto posed = rotate_about_com(cell, poses[static_cast<std::size_t>(k)]);
    write_xyz(posed, xyz_path(o.root, ref), k);
    const auto image = rasterize(project(posed), ElementTable::bundled(), render);
    write_bytes(png_path(o.root, ref), encode_png(image));
    write_bytes(jpg_path(o.root, ref), encode_jpeg(image, render.jpeg_quality));
    out.files.push_back(xyz_path(o.root, ref));
    out.files.push_back(png_path(o.root, ref));
    out.files.push_back(jpg_path(o.root, ref));
  }
  return out;
}

void write_atomically(const fs::path& path, const std::string& text) {
  const auto tmp = fs::path(path.string() + ".tmp");
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(fmt::format("cannot open '{}' for writing", tmp.string()));
    out << text;
    if (!out.flush()) throw Error(fmt::format("write to '{}' failed", tmp.string()));
  }
  fs::rename(tmp, path);
}

}  // namespace

std::string generation_input_hash(const GenerateOptions& o) {
  const auto& r = o.render;
  std::string text = fmt::format("{}\n", kDatasetFormat);
  text += detail::bundled_materials_text();
  text += detail::bundled_elements_text();
  auto names = o.materials;
  std::sort(names.begin(), names.end());
  text += fmt::format("materials={}\nradii={}\nposes={}\n", fmt::join(names, ","),
                      fmt::join(sorted_radii(o.radii_nm), ","), o.pose_count);
  text += fmt::format("render={}x{} sigma={} scale={} bg={},{},{} depth={} frame={} fill={} q={}\n", r.width,
                      r.height, r.blur_sigma.value_or(-1), r.radius_scale.value_or(-1), r.background.r,
                      r.background.g, r.background.b, r.depth_sort, r.frame_radius.value_or(-1), r.fill_fraction,
                      r.jpeg_quality);
  if (r.frame_center) text += fmt::format("center={},{},{}\n", (*r.frame_center)[0], (*r.frame_center)[1], (*r.frame_center)[2]);
  return sha256_hex(text);
}

GenerateResult generate_dataset(const GenerateOptions& options) {
  check_options(options);
  const auto materials = select_materials(options.materials);
  const auto radii = sorted_radii(options.radii_nm);
  const auto input_hash = generation_input_hash(options);
  const auto manifest_path = options.root / kManifestName;

  if (!options.force && fs::exists(manifest_path)) {
    try {
      auto existing = Dataset::open(options.root);
      if (existing.manifest().input_hash == input_hash) {
        const auto problems = existing.verify();
        if (problems.empty()) {
          GenerateResult r;
          r.skipped = true;
          r.entries = existing.index().size();
          r.manifest = existing.manifest();
          return r;
        }
        spdlog::warn("dataset at '{}' failed verification ({} problems); regenerating", options.root.string(),
                     problems.size());
      }
    } catch (const Error& e) {
      spdlog::warn("existing manifest unusable ({}); regenerating", e.what());
    }
  }

  fs::create_directories(options.root);
  fs::remove(manifest_path);

  const auto poses = pose_rotations(options.pose_count);
  std::vector<std::pair<const MaterialSpec*, double>> tasks;
  for (const auto& m : materials) {
    for (double r : radii) tasks.emplace_back(&m, r);
  }
  std::vector<TaskOutput> outputs(tasks.size());
  std::vector<std::exception_ptr> errors(tasks.size());
  const auto n_tasks = static_cast<long long>(tasks.size());
#pragma omp parallel for schedule(dynamic)
  for (long long t = 0; t < n_tasks; ++t) {
    const auto i = static_cast<std::size_t>(t);
    try {
      outputs[i] = generate_one(options, *tasks[i].first, tasks[i].second, poses);
    } catch (...) {
      errors[i] = std::current_exception();
    }
  }
  for (const auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }

  DatasetManifest manifest;
  manifest.input_hash = input_hash;
  for (const auto& m : materials) manifest.materials.push_back(m.name);
  manifest.radii_nm = radii;
  manifest.pose_count = options.pose_count;
  for (auto& out : outputs) {
    manifest.supercells.push_back(out.summary);
    for (auto& w : out.warnings) manifest.warnings.push_back(std::move(w));
    for (const auto& f : out.files) manifest.files.push_back({relative_name(options.root, f), sha256_file(f)});
  }
  std::sort(manifest.files.begin(), manifest.files.end(), [](const auto& a, const auto& b) { return a.path < b.path; });
  manifest.corpus_hash = corpus_hash(manifest.files);
  write_atomically(manifest_path, manifest_to_json(manifest));

  GenerateResult result;
  result.entries = materials.size() * radii.size() * static_cast<std::size_t>(options.pose_count);
  result.manifest = std::move(manifest);
  return result;
}

Dataset Dataset::open(const fs::path& root) {
  const auto path = root / kManifestName;
  if (!fs::exists(path)) {
    throw ConfigError(fmt::format("no dataset manifest at '{}' (run 'generate' first)", path.string()));
  }
  Dataset d;
  d.root_ = root;
  try {
    d.manifest_ = manifest_from_json(read_text(path));
  } catch (const ParseError& e) {
    throw ConfigError(fmt::format("'{}': {}", path.string(), e.what()));
  }
  return d;
}

CorpusIndex Dataset::index() const {
  return CorpusIndex::product(manifest_.materials, manifest_.radii_nm, manifest_.pose_count);
}

AnnotationRecord Dataset::annotation(const std::string& material, double radius_nm) const {
  const auto key = std::make_pair(material, radius_nm);
  {
    std::lock_guard lock(cache_->mutex);
    if (const auto it = cache_->annotations.find(key); it != cache_->annotations.end()) return it->second;
  }
  auto record = read_annotation(annotation_path(root_, material, radius_nm));
  std::lock_guard lock(cache_->mutex);
  return cache_->annotations.emplace(key, std::move(record)).first->second;
}

XyzFile Dataset::xyz(const SampleRef& ref) const { return read_xyz(xyz_path(root_, ref)); }

std::vector<std::string> Dataset::verify() const {
  std::vector<std::string> problems;
  for (const auto& f : manifest_.files) {
    const auto p = root_ / f.path;
    if (!fs::exists(p)) {
      problems.push_back(fmt::format("{}: missing", f.path));
    } else if (sha256_file(p) != f.sha256) {
      problems.push_back(fmt::format("{}: checksum mismatch", f.path));
    }
  }
  if (corpus_hash(manifest_.files) != manifest_.corpus_hash) problems.push_back("manifest: corpus hash mismatch");
  return problems;
}

}  // namespace xtalbench
