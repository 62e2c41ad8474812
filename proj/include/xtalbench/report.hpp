#pragma once

#include "xtalbench/corpus.hpp"
#include "xtalbench/metrics.hpp"
#include "xtalbench/run_log.hpp"

#include <array>
#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace xtalbench {

/// Loss properties per protocol, matching the layout of the two error tables.
inline constexpr std::array<Field, 6> kSeLossFields{Field::NAtoms, Field::CellVolume, Field::A,
                                                    Field::B,      Field::C,          Field::Density};
inline constexpr std::array<Field, 4> kCeLossFields{Field::NAtoms, Field::APrim, Field::BPrim, Field::CPrim};

std::span<const Field> loss_fields(Protocol protocol);

struct InstanceScore {
  std::string instance_id;
  Protocol protocol = Protocol::SpatialExclusion;
  SampleRef target;
  std::string endpoint;
  bool parse_ok = false;
  std::map<Field, double> errors;        // percent
  std::map<Field, double> angle_errors;  // degrees
  std::optional<double> loss;            // per-example mean over loss_fields(protocol)
  int sg_match = 0;
  double s_phys = 0;
  double s_hall = 0;
  FormatScore format;
  double latency_s = 0;
};

InstanceScore score_record(const RunRecord& record, const AnnotationRecord& reference);

/// Scores in a fixed order: endpoint, protocol (SE first), material, radius, pose.
std::vector<InstanceScore> score_logs(std::span<const RunLog> logs, const Dataset& dataset);

/// Throws ConfigError when the logs come from different corpora or from a
/// corpus other than `dataset`.
void check_same_corpus(std::span<const RunLog> logs, const Dataset& dataset);

std::string score_to_json_line(const InstanceScore& score);

struct TransferRow {
  std::string endpoint;
  std::optional<double> se, ce;
  std::optional<double> transfer;  // may be +inf
  double g_max = 0;
  std::optional<double> t_se, t_ce;
  double failure_se = 0, failure_ce = 0;
};

std::vector<TransferRow> transfer_rows(std::span<const InstanceScore> scores);

/// Error columns used for correlation: percent errors of the numeric fields
/// and absolute errors of the angles.
ErrorTable error_table(std::span<const InstanceScore> scores, Protocol protocol);

/// File name -> contents. Pure: equal scores give equal bytes.
std::map<std::string, std::string> build_reports(std::span<const InstanceScore> scores, const std::string& corpus_hash);

void write_reports(const std::map<std::string, std::string>& files, const std::filesystem::path& out_dir);

}  // namespace xtalbench
