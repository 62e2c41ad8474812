#pragma once

#include "xtalbench/annotation.hpp"
#include "xtalbench/protocols.hpp"
#include "xtalbench/render.hpp"
#include "xtalbench/xyz.hpp"

#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <string>
#include <vector>

namespace xtalbench {

inline constexpr std::string_view kDatasetFormat = "xtalbench-dataset/1";
inline constexpr std::string_view kManifestName = "manifest.json";

/// Published atom-count range of the corpus supercells.
inline constexpr int kAtomCountMin = 57;
inline constexpr int kAtomCountMax = 390;

inline const std::vector<double>& default_radii_nm() {
  static const std::vector<double> radii{0.7, 0.8, 0.9, 1.0};
  return radii;
}

// <root>/<material>/<R>/{<pose>.xyz, <pose>.png, <pose>.jpg, annotation.json}
std::filesystem::path sample_dir(const std::filesystem::path& root, const std::string& material, double radius_nm);
std::filesystem::path xyz_path(const std::filesystem::path& root, const SampleRef& ref);
std::filesystem::path png_path(const std::filesystem::path& root, const SampleRef& ref);
std::filesystem::path jpg_path(const std::filesystem::path& root, const SampleRef& ref);
std::filesystem::path annotation_path(const std::filesystem::path& root, const std::string& material, double radius_nm);

struct SupercellSummary {
  std::string material;
  double radius_nm = 0;
  int n_atoms = 0;
  std::array<int, 3> multiplicity{1, 1, 1};
  bool exceeds_determinant_limit = false;
  bool atom_count_in_range = true;
};

struct ManifestFile {
  std::string path;  // relative to the dataset root, '/' separated
  std::string sha256;
};

struct DatasetManifest {
  std::string format{kDatasetFormat};
  std::string input_hash;
  std::string corpus_hash;
  std::vector<std::string> materials;
  std::vector<double> radii_nm;
  int pose_count = 0;
  std::vector<SupercellSummary> supercells;
  std::vector<std::string> warnings;
  std::vector<ManifestFile> files;  // sorted by path
};

std::string manifest_to_json(const DatasetManifest& manifest);
DatasetManifest manifest_from_json(std::string_view text);

/// Hash over the sorted (path, checksum) list.
std::string corpus_hash(const std::vector<ManifestFile>& files);

struct GenerateOptions {
  std::filesystem::path root;
  std::vector<std::string> materials;  // empty = all bundled
  std::vector<double> radii_nm = default_radii_nm();
  int pose_count = 10;
  RenderConfig render;
  bool force = false;
};

struct GenerateResult {
  bool skipped = false;  // inputs unchanged and every file verified
  std::size_t entries = 0;
  DatasetManifest manifest;
};

/// Hash of everything the generated tree depends on.
std::string generation_input_hash(const GenerateOptions& options);

/// Writes the tree, then the manifest last (via rename) so an interrupted run
/// leaves no manifest behind. Throws ConfigError / GenerationError.
GenerateResult generate_dataset(const GenerateOptions& options);

/// A generated tree opened through its manifest.
class Dataset {
 public:
  /// Throws ConfigError when the manifest is missing or unreadable.
  static Dataset open(const std::filesystem::path& root);

  const std::filesystem::path& root() const { return root_; }
  const DatasetManifest& manifest() const { return manifest_; }
  CorpusIndex index() const;

  /// Cached; safe to call from several threads.
  AnnotationRecord annotation(const std::string& material, double radius_nm) const;
  XyzFile xyz(const SampleRef& ref) const;

  /// Missing or modified files, one message each.
  std::vector<std::string> verify() const;

 private:
  std::filesystem::path root_;
  DatasetManifest manifest_;
  struct Cache {
    std::mutex mutex;
    std::map<std::pair<std::string, double>, AnnotationRecord> annotations;
  };
  std::shared_ptr<Cache> cache_ = std::make_shared<Cache>();
};

}  // namespace xtalbench
