#include <doctest.h>

#include "test_util.hpp"
#include "xtalbench/commands.hpp"

#include <algorithm>
#include <fstream>
#include <set>

using namespace xtalbench;
namespace fs = std::filesystem;

namespace {

GenerateOptions small_options(const fs::path& root) {
  GenerateOptions o;
  o.root = root;
  o.materials = {"Ag", "PbS", "ZnO"};
  o.radii_nm = {0.7, 0.8, 0.9};
  o.pose_count = kProtocolPoses;
  return o;
}

RunConfig run_config(const fs::path& dataset, const std::string& endpoint, const fs::path& log) {
  RunConfig c;
  c.dataset = dataset;
  c.endpoint = endpoint;
  c.log = log;
  c.sleep = [](double) {};
  return c;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

}  // namespace

TEST_CASE("generate, run, resume and report") {
  testutil::TempDir dir("e2e");
  const auto ds = dir.path() / "ds";
  const auto first = cmd_generate(small_options(ds));
  CHECK(!first.skipped);
  CHECK(first.entries == 3 * 3 * kProtocolPoses);
  const auto second = cmd_generate(small_options(ds));
  CHECK(second.skipped);
  CHECK(second.manifest.corpus_hash == first.manifest.corpus_hash);

  const auto dataset = Dataset::open(ds);
  const auto all = select_instances(dataset.index(), ProtocolSelection::Both);
  CHECK(all.size() == 2 * 45);

  const auto log = dir.path() / "runs" / "oracle.jsonl";
  auto config = run_config(ds, "mock-oracle", log);
  config.stop_after = 7;
  const auto partial = cmd_run(config);
  CHECK(partial.queried == 7);
  CHECK(read_run_log(log).records.size() == 7);

  // Without --resume or --force the existing log is protected.
  config.stop_after.reset();
  CHECK_THROWS_AS(cmd_run(config), ConfigError);

  config.resume = true;
  const auto rest = cmd_run(config);
  CHECK(rest.skipped == 7);
  CHECK(rest.queried == all.size() - 7);
  std::set<std::string> done;
  for (const auto& r : read_run_log(log).records) done.insert(r.instance_id);
  CHECK(done.size() == all.size());
  for (const auto& id : rest.queried_ids) CHECK(std::count(partial.queried_ids.begin(), partial.queried_ids.end(), id) == 0);

  const auto again = cmd_run(config);
  CHECK(again.queried == 0);

  const auto null_log = dir.path() / "runs" / "null.jsonl";
  const auto null_run = cmd_run(run_config(ds, "mock-null", null_log));
  CHECK(null_run.failed == null_run.queried);

  const auto out1 = dir.path() / "report1";
  const auto out2 = dir.path() / "report2";
  const auto files1 = cmd_report({log, null_log}, ds, out1);
  const auto files2 = cmd_report({log, null_log}, ds, out2);
  CHECK(files1 == files2);
  for (const auto& [name, content] : files1) {
    CAPTURE(name);
    CHECK(slurp(out1 / name) == slurp(out2 / name));
    CHECK(slurp(out1 / name) == content);
  }

  const auto scores = load_scores({log}, ds);
  CHECK(scores.size() == all.size());
  for (const auto& s : scores) {
    CHECK(*s.loss == 0.0);
    CHECK(s.s_phys == 1.0);
    CHECK(s.s_hall == 0.0);
  }

  // A run against a different corpus cannot be mixed in.
  const auto other = dir.path() / "other";
  auto o = small_options(other);
  o.radii_nm = {0.7, 0.8};
  cmd_generate(o);
  const auto other_log = dir.path() / "runs" / "other.jsonl";
  cmd_run(run_config(other, "mock-oracle", other_log));
  CHECK_THROWS_AS(load_scores({log, other_log}, ds), ConfigError);
  CHECK_THROWS_AS(load_scores({other_log}, ds), ConfigError);
}

TEST_CASE("run refuses bad setup") {
  testutil::TempDir dir("e2e");
  CHECK_THROWS_AS(cmd_run(run_config(dir.path() / "missing", "mock-oracle", dir.path() / "x.jsonl")), ConfigError);
  const auto ds = dir.path() / "ds";
  auto o = small_options(ds);
  o.materials = {"Ag", "PbS"};
  o.radii_nm = {0.7, 0.8};
  cmd_generate(o);
  CHECK_THROWS_AS(cmd_run(run_config(ds, "no-such-endpoint", dir.path() / "x.jsonl")), ConfigError);

  // Tampering with a file is caught before any query.
  {
    std::ofstream out(ds / "Ag" / "0.7" / "0.xyz", std::ios::app);
    out << "\n";
  }
  CHECK_THROWS_AS(cmd_run(run_config(ds, "mock-oracle", dir.path() / "y.jsonl")), ConfigError);
}
