#include "xtalbench/commands.hpp"

#include <fmt/format.h>
#include <spdlog/spdlog.h>

#include <algorithm>

namespace xtalbench {

namespace fs = std::filesystem;

ProtocolSelection protocol_selection_from_string(std::string_view text) {
  if (text == "se" || text == "SE") return ProtocolSelection::SE;
  if (text == "ce" || text == "CE") return ProtocolSelection::CE;
  if (text == "both") return ProtocolSelection::Both;
  throw ConfigError(fmt::format("unknown protocol selection '{}' (se, ce, both)", text));
}

std::vector<BenchmarkInstance> select_instances(const CorpusIndex& corpus, ProtocolSelection protocols) {
  std::vector<BenchmarkInstance> out;
  try {
    if (protocols != ProtocolSelection::CE) out = build_se_instances(corpus);
    if (protocols != ProtocolSelection::SE) {
      auto ce = build_ce_instances(corpus);
      out.insert(out.end(), std::make_move_iterator(ce.begin()), std::make_move_iterator(ce.end()));
    }
  } catch (const GenerationError& e) {
    throw ConfigError(e.what());
  }
  return out;
}

GenerateResult cmd_generate(const GenerateOptions& options) { return generate_dataset(options); }

RunSummary cmd_run(const RunConfig& config) {
  const auto dataset = Dataset::open(config.dataset);
  if (const auto problems = dataset.verify(); !problems.empty()) {
    throw ConfigError(fmt::format("dataset at '{}' failed verification ({} problems, first: {}); rerun generate",
                                  config.dataset.string(), problems.size(), problems.front()));
  }

  auto endpoints = builtin_endpoints();
  if (config.endpoints_file) {
    for (auto& e : load_endpoints(*config.endpoints_file)) {
      std::erase_if(endpoints, [&](const ModelEndpoint& b) { return b.name == e.name; });
      endpoints.push_back(std::move(e));
    }
  }
  const auto& endpoint = find_endpoint(endpoints, config.endpoint);

  RunSummary summary;
  summary.log = config.log.empty() ? fs::path("runs") / (endpoint.name + ".jsonl") : config.log;
  if (fs::exists(summary.log) && !config.resume && !config.force) {
    throw ConfigError(fmt::format("run log '{}' exists; pass --resume to continue it or --force to replace it",
                                  summary.log.string()));
  }

  const auto instances = select_instances(dataset.index(), config.protocols);
  summary.instances = instances.size();

  const RunHeader header{std::string(kRunLogFormat), dataset.manifest().corpus_hash, endpoint.name,
                         std::string(kPromptVersion), config.seed};
  auto writer = config.resume && !config.force ? RunLogWriter::resume(summary.log, header)
                                               : RunLogWriter::create(summary.log, header);
  write_instance_manifest(instances, fs::path(summary.log.string() + ".instances.jsonl"));

  std::vector<BenchmarkInstance> pending;
  for (const auto& inst : instances) {
    if (writer.completed().count(inst.id)) {
      ++summary.skipped;
    } else {
      pending.push_back(inst);
    }
  }

  auto transport = make_transport(endpoint, dataset, config.seed);
  DispatchOptions options;
  options.stop_after = config.stop_after;
  options.sleep = config.sleep;
  summary.queried = dispatch(
      pending, endpoint, *transport, [&](const BenchmarkInstance& inst) { return build_prompt(inst, dataset); },
      [&](const BenchmarkInstance& inst, const QueryResult& result) {
        RunRecord r;
        r.instance_id = inst.id;
        r.protocol = inst.protocol;
        r.target = inst.target;
        r.endpoint = endpoint.name;
        r.timestamp = utc_timestamp();
        r.latency_s = result.latency_s;
        r.attempts = result.attempts;
        r.raw_response = result.raw_response;
        r.error = result.error;
        r.parsed = result.parsed;
        writer.append(r);
        summary.queried_ids.push_back(inst.id);
        if (!result.raw_response || !result.parsed.parse_ok) ++summary.failed;
      },
      options);
  return summary;
}

std::vector<InstanceScore> load_scores(const std::vector<fs::path>& logs, const fs::path& dataset_root) {
  if (logs.empty()) throw ConfigError("no run logs given");
  const auto dataset = Dataset::open(dataset_root);
  std::vector<RunLog> loaded;
  for (const auto& p : logs) {
    try {
      loaded.push_back(read_run_log(p));
    } catch (const ParseError& e) {
      throw ConfigError(e.what());
    }
    if (loaded.back().torn_tail) spdlog::warn("{}: ignoring an incomplete last line", p.string());
  }
  return score_logs(loaded, dataset);
}

std::vector<InstanceScore> cmd_score(const std::vector<fs::path>& logs, const fs::path& dataset,
                                     const fs::path& out_dir) {
  auto scores = load_scores(logs, dataset);
  if (scores.empty()) throw ConfigError("run logs hold no results");
  const auto files = build_reports(scores, Dataset::open(dataset).manifest().corpus_hash);
  std::map<std::string, std::string> subset;
  for (const auto* name : {"scores.jsonl", "summary.csv", "summary.txt"}) subset[name] = files.at(name);
  write_reports(subset, out_dir);
  return scores;
}

std::map<std::string, std::string> cmd_report(const std::vector<fs::path>& logs, const fs::path& dataset,
                                              const fs::path& out_dir) {
  const auto scores = load_scores(logs, dataset);
  if (scores.empty()) throw ConfigError("run logs hold no results");
  auto files = build_reports(scores, Dataset::open(dataset).manifest().corpus_hash);
  write_reports(files, out_dir);
  return files;
}

}  // namespace xtalbench
