#include "xtalbench/run_log.hpp"

#include <fmt/chrono.h>
#include <fmt/format.h>
#include <json.hpp>

#include <chrono>
#include <sstream>

namespace xtalbench {

namespace fs = std::filesystem;
using ordered_json = nlohmann::ordered_json;

std::string header_to_json_line(const RunHeader& h) {
  ordered_json j{{"format", h.format},
                 {"corpus_hash", h.corpus_hash},
                 {"endpoint", h.endpoint},
                 {"prompt_version", h.prompt_version},
                 {"seed", h.seed}};
  return j.dump();
}

namespace {

RunHeader header_from_json(const ordered_json& j) {
  RunHeader h;
  h.format = j.at("format").get<std::string>();
  if (h.format != kRunLogFormat) throw ParseError(fmt::format("run log: unsupported format '{}'", h.format));
  h.corpus_hash = j.at("corpus_hash").get<std::string>();
  h.endpoint = j.at("endpoint").get<std::string>();
  h.prompt_version = j.at("prompt_version").get<std::string>();
  h.seed = j.at("seed").get<std::uint64_t>();
  return h;
}

}  // namespace

std::string record_to_json_line(const RunRecord& r) {
  ordered_json j;
  j["instance_id"] = r.instance_id;
  j["protocol"] = std::string(to_string(r.protocol));
  j["target"] = ordered_json{{"material", r.target.material}, {"radius_nm", r.target.radius_nm}, {"pose", r.target.pose}};
  j["endpoint"] = r.endpoint;
  j["timestamp"] = r.timestamp;
  j["latency_s"] = r.latency_s;
  j["attempts"] = r.attempts;
  j["raw_response"] = r.raw_response ? ordered_json(*r.raw_response) : ordered_json(nullptr);
  j["error"] = r.error;
  const auto parsed = ordered_json::parse(prediction_to_json(r.parsed));
  j["parse_ok"] = r.parsed.parse_ok;
  j["parsed"] = parsed.at("fields");
  j["field_kinds"] = parsed.at("field_kinds");
  return j.dump();
}

RunRecord record_from_json_line(std::string_view line) {
  const auto j = ordered_json::parse(line, nullptr, false);
  if (j.is_discarded() || !j.is_object()) throw ParseError("run log: malformed record");
  try {
    RunRecord r;
    r.instance_id = j.at("instance_id").get<std::string>();
    r.protocol = protocol_from_string(j.at("protocol").get<std::string>());
    const auto& t = j.at("target");
    r.target = {t.at("material").get<std::string>(), t.at("radius_nm").get<double>(), t.at("pose").get<int>()};
    r.endpoint = j.at("endpoint").get<std::string>();
    r.timestamp = j.at("timestamp").get<std::string>();
    r.latency_s = j.at("latency_s").get<double>();
    r.attempts = j.at("attempts").get<int>();
    if (!j.at("raw_response").is_null()) r.raw_response = j.at("raw_response").get<std::string>();
    r.error = j.at("error").get<std::string>();
    ordered_json p{{"parse_ok", j.at("parse_ok")}, {"fields", j.at("parsed")}, {"field_kinds", j.at("field_kinds")}};
    r.parsed = prediction_from_json(p.dump());
    r.parsed.raw_response = r.raw_response.value_or("");
    return r;
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(fmt::format("run log: {}", e.what()));
  } catch (const ArgumentError& e) {
    throw ParseError(fmt::format("run log: {}", e.what()));
  }
}

namespace {

std::string read_all(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError(fmt::format("cannot open run log '{}'", path.string()));
  std::stringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

}  // namespace

RunLog read_run_log(const fs::path& path) {
  const auto text = read_all(path);
  RunLog log;
  log.path = path;
  std::size_t pos = 0;
  std::size_t line_no = 0;
  bool have_header = false;
  while (pos < text.size()) {
    const auto nl = text.find('\n', pos);
    ++line_no;
    if (nl == std::string::npos) {
      log.torn_tail = true;
      break;
    }
    const std::string_view line(text.data() + pos, nl - pos);
    pos = nl + 1;
    if (line.empty()) continue;
    try {
      if (!have_header) {
        const auto j = ordered_json::parse(line, nullptr, false);
        if (j.is_discarded()) throw ParseError("malformed header");
        log.header = header_from_json(j);
        have_header = true;
      } else {
        log.records.push_back(record_from_json_line(line));
      }
    } catch (const nlohmann::json::exception& e) {
      throw ParseError(fmt::format("{}:{}: {}", path.string(), line_no, e.what()));
    } catch (const ParseError& e) {
      throw ParseError(fmt::format("{}:{}: {}", path.string(), line_no, e.what()));
    }
  }
  if (!have_header) throw ParseError(fmt::format("{}: run log has no header", path.string()));
  return log;
}

std::string utc_timestamp() {
  const auto now = std::chrono::time_point_cast<std::chrono::seconds>(std::chrono::system_clock::now());
  return fmt::format("{:%Y-%m-%dT%H:%M:%SZ}", fmt::gmtime(std::chrono::system_clock::to_time_t(now)));
}

RunLogWriter RunLogWriter::create(const fs::path& path, const RunHeader& header) {
  RunLogWriter w;
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  w.out_.open(path, std::ios::binary | std::ios::trunc);
  if (!w.out_) throw ConfigError(fmt::format("cannot open run log '{}' for writing", path.string()));
  w.out_ << header_to_json_line(header) << '\n';
  w.out_.flush();
  return w;
}

RunLogWriter RunLogWriter::resume(const fs::path& path, const RunHeader& header) {
  if (!fs::exists(path)) return create(path, header);
  RunLog existing;
  try {
    existing = read_run_log(path);
  } catch (const ParseError& e) {
    throw ConfigError(fmt::format("cannot resume: {}", e.what()));
  }
  if (!(existing.header == header)) {
    throw ConfigError(fmt::format("cannot resume '{}': it was written for endpoint '{}' against corpus {} "
                                  "(now '{}' against {})",
                                  path.string(), existing.header.endpoint, existing.header.corpus_hash.substr(0, 12),
                                  header.endpoint, header.corpus_hash.substr(0, 12)));
  }
  if (existing.torn_tail) {
    const auto text = read_all(path);
    fs::resize_file(path, text.rfind('\n') + 1);
  }
  RunLogWriter w;
  for (const auto& r : existing.records) w.completed_.insert(r.instance_id);
  w.out_.open(path, std::ios::binary | std::ios::app);
  if (!w.out_) throw ConfigError(fmt::format("cannot open run log '{}' for appending", path.string()));
  return w;
}

void RunLogWriter::append(const RunRecord& record) {
  out_ << record_to_json_line(record) << '\n';
  out_.flush();
  if (!out_) throw Error("run log write failed");
  completed_.insert(record.instance_id);
}

}  // namespace xtalbench
