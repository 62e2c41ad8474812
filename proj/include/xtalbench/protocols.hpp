#pragma once

#include "xtalbench/common.hpp"

#include <compare>
#include <filesystem>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace xtalbench {

enum class Protocol { SpatialExclusion, CompositionalExclusion };

std::string_view to_string(Protocol protocol);  // "SE" / "CE"
Protocol protocol_from_string(std::string_view text);

/// Poses 0..4 (native + first four Fibonacci rotations) enter the protocols;
/// poses 5..9 are held back for consistency analysis.
inline constexpr int kProtocolPoses = 5;

struct SampleRef {
  std::string material;
  double radius_nm = 0;
  int pose = 0;

  auto operator<=>(const SampleRef&) const = default;
  bool operator==(const SampleRef&) const = default;
};

std::string radius_label(double radius_nm);  // "0.7"

/// The set of (material, radius, pose) entries present on disk.
class CorpusIndex {
 public:
  CorpusIndex() = default;
  explicit CorpusIndex(std::vector<SampleRef> entries);

  /// Full product materials x radii x poses [0, pose_count).
  static CorpusIndex product(std::span<const std::string> materials, std::span<const double> radii, int pose_count);

  bool contains(const SampleRef& ref) const { return entries_.count(ref) > 0; }
  std::vector<std::string> materials() const;         // sorted
  std::vector<double> radii(std::string_view material) const;  // ascending
  std::size_t size() const { return entries_.size(); }
  const std::set<SampleRef>& entries() const { return entries_; }

 private:
  std::set<SampleRef> entries_;
};

struct BenchmarkInstance {
  std::string id;
  Protocol protocol = Protocol::SpatialExclusion;
  SampleRef target;
  std::vector<SampleRef> context;  // materials alphabetical, radii ascending, poses ascending
};

std::string instance_id(Protocol protocol, const SampleRef& target);

/// One instance per (material, held-out radius, pose < kProtocolPoses); context
/// holds the same material's other radii. Throws GenerationError listing gaps.
std::vector<BenchmarkInstance> build_se_instances(const CorpusIndex& corpus);

/// One instance per (material, radius, pose < kProtocolPoses); context holds
/// every other material's radii.
std::vector<BenchmarkInstance> build_ce_instances(const CorpusIndex& corpus);

/// True when the context breaks the protocol's exclusion rule or uses a
/// non-protocol pose.
bool violates_exclusion(const BenchmarkInstance& instance);

/// Per-instance loss: the per-example mean percent error, or nothing when the
/// response could not be scored.
struct InstanceLoss {
  std::string instance_id;
  std::optional<double> loss;
};

struct AggregateError {
  Protocol protocol = Protocol::SpatialExclusion;
  std::optional<double> mean;  // over scored instances; empty if none scored
  std::size_t n_instances = 0;
  std::size_t n_failed = 0;
  std::vector<InstanceLoss> losses;

  double failure_rate() const {
    return n_instances == 0 ? 0.0 : static_cast<double>(n_failed) / static_cast<double>(n_instances);
  }
};

/// E = mean of scored losses; unscored instances count toward the failure rate.
/// Throws ArgumentError on an empty list.
AggregateError aggregate(std::span<const InstanceLoss> losses, Protocol protocol);

/// One JSON object per line: id, protocol, target, context.
std::string instance_to_json_line(const BenchmarkInstance& instance);
BenchmarkInstance instance_from_json_line(std::string_view line);
void write_instance_manifest(std::span<const BenchmarkInstance> instances, const std::filesystem::path& path);

}  // namespace xtalbench
