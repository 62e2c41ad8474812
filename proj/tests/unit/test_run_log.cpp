#include <doctest.h>

#include "test_util.hpp"
#include "xtalbench/run_log.hpp"

#include <fstream>

using namespace xtalbench;

namespace {

RunHeader header() {
  RunHeader h;
  h.corpus_hash = "abc123";
  h.endpoint = "mock-oracle";
  h.prompt_version = "xtalbench-prompt/1";
  h.seed = 42;
  return h;
}

RunRecord record(int i) {
  RunRecord r;
  r.target = {"Au", 0.8, i % 5};
  r.protocol = i % 2 ? Protocol::CompositionalExclusion : Protocol::SpatialExclusion;
  r.instance_id = instance_id(r.protocol, r.target) + fmt::format("-{}", i);
  r.endpoint = "mock-oracle";
  r.timestamp = "2026-01-01T00:00:00Z";
  r.latency_s = 0.25 + i;
  r.attempts = 1 + i % 3;
  if (i % 4 != 3) {
    r.raw_response = fmt::format("```json\n{{\"a\": {}, \"space_group\": \"Fm-3m\"}}\n```\n\"quoted\"\n", 4 + i);
    r.parsed = parse_response(*r.raw_response);
  } else {
    r.error = "null endpoint returns no response";
  }
  return r;
}

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

void check_same(const RunRecord& a, const RunRecord& b) {
  CHECK(a.instance_id == b.instance_id);
  CHECK(a.protocol == b.protocol);
  CHECK(a.target == b.target);
  CHECK(a.endpoint == b.endpoint);
  CHECK(a.timestamp == b.timestamp);
  CHECK(a.latency_s == b.latency_s);
  CHECK(a.attempts == b.attempts);
  CHECK(a.raw_response == b.raw_response);
  CHECK(a.error == b.error);
  CHECK(a.parsed.numbers == b.parsed.numbers);
  CHECK(a.parsed.kinds == b.parsed.kinds);
  CHECK(a.parsed.space_group == b.parsed.space_group);
  CHECK(a.parsed.parse_ok == b.parsed.parse_ok);
}

}  // namespace

TEST_CASE("record line round trip") {
  for (int i = 0; i < 8; ++i) {
    const auto r = record(i);
    const auto line = record_to_json_line(r);
    CHECK(line.find('\n') == std::string::npos);
    check_same(record_from_json_line(line), r);
  }
  CHECK_THROWS_AS(record_from_json_line("{"), ParseError);
  CHECK_THROWS_AS(record_from_json_line("[1]"), ParseError);
}

TEST_CASE("write then read") {
  testutil::TempDir dir("runlog");
  const auto path = dir.path() / "sub" / "run.jsonl";
  {
    auto w = RunLogWriter::create(path, header());
    for (int i = 0; i < 6; ++i) w.append(record(i));
    CHECK(w.completed().size() == 6);
  }
  const auto log = read_run_log(path);
  CHECK(log.header == header());
  CHECK(!log.torn_tail);
  REQUIRE(log.records.size() == 6);
  for (int i = 0; i < 6; ++i) check_same(log.records[i], record(i));
}

TEST_CASE("torn tail is ignored and cut on resume") {
  testutil::TempDir dir("runlog");
  const auto path = dir.path() / "run.jsonl";
  {
    auto w = RunLogWriter::create(path, header());
    for (int i = 0; i < 3; ++i) w.append(record(i));
  }
  const auto intact = slurp(path);
  {
    std::ofstream out(path, std::ios::app | std::ios::binary);
    const auto partial = record_to_json_line(record(3));
    out << partial.substr(0, partial.size() / 2);
  }
  const auto torn = read_run_log(path);
  CHECK(torn.torn_tail);
  CHECK(torn.records.size() == 3);

  auto w = RunLogWriter::resume(path, header());
  CHECK(slurp(path) == intact);
  CHECK(w.completed().size() == 3);
  CHECK(w.completed().count(record(1).instance_id) == 1);
  w.append(record(3));
  w.append(record(4));
  const auto log = read_run_log(path);
  CHECK(!log.torn_tail);
  REQUIRE(log.records.size() == 5);
  check_same(log.records[4], record(4));
}

TEST_CASE("resume refuses a different run") {
  testutil::TempDir dir("runlog");
  const auto path = dir.path() / "run.jsonl";
  RunLogWriter::create(path, header()).append(record(0));
  auto other = header();
  other.endpoint = "mock-null";
  CHECK_THROWS_AS(RunLogWriter::resume(path, other), ConfigError);
  other = header();
  other.corpus_hash = "zzz";
  CHECK_THROWS_AS(RunLogWriter::resume(path, other), ConfigError);
  // Resuming a log that does not exist yet starts a fresh one.
  CHECK(RunLogWriter::resume(dir.path() / "absent.jsonl", header()).completed().empty());
}

TEST_CASE("corrupt middle line is an error") {
  testutil::TempDir dir("runlog");
  const auto path = dir.path() / "run.jsonl";
  {
    std::ofstream out(path, std::ios::binary);
    out << header_to_json_line(header()) << "\n" << "garbage\n" << record_to_json_line(record(0)) << "\n";
  }
  CHECK_THROWS_AS(read_run_log(path), ParseError);
  {
    std::ofstream out(path, std::ios::binary);
    out << "{\"format\": \"other/9\"}\n";
  }
  CHECK_THROWS_AS(read_run_log(path), ParseError);
}

TEST_CASE("timestamps") {
  const auto t = utc_timestamp();
  CHECK(t.size() == 20);
  CHECK(t[4] == '-');
  CHECK(t[10] == 'T');
  CHECK(t.back() == 'Z');
}
