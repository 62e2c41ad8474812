#pragma once

#include "xtalbench/prediction.hpp"
#include "xtalbench/protocols.hpp"

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <optional>
#include <set>
#include <string>
#include <vector>

namespace xtalbench {

inline constexpr std::string_view kRunLogFormat = "xtalbench-runlog/1";

// JSONL: the first line is the header, every later line one result.
struct RunHeader {
  std::string format{kRunLogFormat};
  std::string corpus_hash;
  std::string endpoint;
  std::string prompt_version;
  std::uint64_t seed = 0;

  bool operator==(const RunHeader&) const = default;
};

struct RunRecord {
  std::string instance_id;
  Protocol protocol = Protocol::SpatialExclusion;
  SampleRef target;
  std::string endpoint;
  std::string timestamp;  // UTC, ISO 8601
  double latency_s = 0;
  int attempts = 0;
  std::optional<std::string> raw_response;
  std::string error;
  PredictionRecord parsed;
};

std::string header_to_json_line(const RunHeader& header);
std::string record_to_json_line(const RunRecord& record);
RunRecord record_from_json_line(std::string_view line);

struct RunLog {
  std::filesystem::path path;
  RunHeader header;
  std::vector<RunRecord> records;
  bool torn_tail = false;  // last line was incomplete and ignored
};

/// A trailing line without a newline is treated as torn and skipped; any
/// other malformed line throws ParseError.
RunLog read_run_log(const std::filesystem::path& path);

std::string utc_timestamp();

class RunLogWriter {
 public:
  /// Starts a new log, replacing any existing file.
  static RunLogWriter create(const std::filesystem::path& path, const RunHeader& header);

  /// Reopens a log for appending after cutting a torn last line. Throws
  /// ConfigError when the header does not match.
  static RunLogWriter resume(const std::filesystem::path& path, const RunHeader& header);

  const std::set<std::string>& completed() const { return completed_; }
  void append(const RunRecord& record);

 private:
  std::ofstream out_;
  std::set<std::string> completed_;
};

}  // namespace xtalbench
