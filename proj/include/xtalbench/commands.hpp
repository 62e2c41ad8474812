#pragma once

#include "xtalbench/corpus.hpp"
#include "xtalbench/gateway.hpp"
#include "xtalbench/report.hpp"

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace xtalbench {

enum ExitCode : int { kExitOk = 0, kExitConfig = 1, kExitPartial = 2, kExitHard = 3 };

enum class ProtocolSelection { SE, CE, Both };

ProtocolSelection protocol_selection_from_string(std::string_view text);

struct RunConfig {
  std::filesystem::path dataset;
  std::string endpoint;
  std::optional<std::filesystem::path> endpoints_file;
  ProtocolSelection protocols = ProtocolSelection::Both;
  std::filesystem::path log;  // default runs/<endpoint>.jsonl
  bool resume = false;
  bool force = false;
  std::uint64_t seed = 0;
  std::optional<std::size_t> stop_after;  // simulate an interrupted run
  Sleeper sleep = real_sleep;
};

struct RunSummary {
  std::filesystem::path log;
  std::size_t instances = 0;  // in the selected protocols
  std::size_t skipped = 0;    // already in the log
  std::size_t queried = 0;
  std::size_t failed = 0;     // queried with no usable response
  std::vector<std::string> queried_ids;
};

std::vector<BenchmarkInstance> select_instances(const CorpusIndex& corpus, ProtocolSelection protocols);

GenerateResult cmd_generate(const GenerateOptions& options);

/// Throws ConfigError for bad setup (missing dataset, unknown endpoint,
/// existing log without --resume/--force, dataset failing verification).
RunSummary cmd_run(const RunConfig& config);

/// Reads the logs and refuses mixed corpora.
std::vector<InstanceScore> load_scores(const std::vector<std::filesystem::path>& logs,
                                       const std::filesystem::path& dataset);

/// scores.jsonl plus summary.{csv,txt}.
std::vector<InstanceScore> cmd_score(const std::vector<std::filesystem::path>& logs,
                                     const std::filesystem::path& dataset, const std::filesystem::path& out_dir);

/// Every report table as CSV and text.
std::map<std::string, std::string> cmd_report(const std::vector<std::filesystem::path>& logs,
                                              const std::filesystem::path& dataset,
                                              const std::filesystem::path& out_dir);

}  // namespace xtalbench
