#include <doctest.h>

#include "test_util.hpp"
#include "xtalbench/protocols.hpp"

#include <fstream>
#include <map>
#include <numeric>
#include <random>
#include <set>

using namespace xtalbench;

namespace {

// Random corpus: 1..6 materials, each with its own 1..5 radii and 10 poses.
CorpusIndex random_corpus(std::mt19937_64& rng, std::map<std::string, std::size_t>& radii_count) {
  std::uniform_int_distribution<int> n_mat(1, 6), n_rad(1, 5);
  std::vector<SampleRef> entries;
  const int nm = n_mat(rng);
  for (int m = 0; m < nm; ++m) {
    const auto name = fmt::format("M{}", m);
    const int nr = n_rad(rng);
    radii_count[name] = static_cast<std::size_t>(nr);
    for (int r = 0; r < nr; ++r) {
      for (int k = 0; k < 10; ++k) entries.push_back({name, 0.5 + 0.1 * r + 0.01 * m, k});
    }
  }
  return CorpusIndex(entries);
}

}  // namespace

TEST_CASE("full corpus counts") {
  const std::vector<std::string> materials{"Ag",   "Au",   "CH3NH3PbI3", "Fe2O3", "MoS2",
                                           "PbS",  "SnO2", "SrTiO3",     "TiO2",  "ZnO"};
  const std::vector<double> radii{0.7, 0.8, 0.9, 1.0};
  const auto corpus = CorpusIndex::product(materials, radii, 10);
  CHECK(corpus.size() == 400);
  const auto se = build_se_instances(corpus);
  const auto ce = build_ce_instances(corpus);
  CHECK(se.size() == 200);
  CHECK(ce.size() == 200);
  for (const auto& i : se) {
    CHECK(i.context.size() == 15);
    CHECK(!violates_exclusion(i));
  }
  for (const auto& i : ce) {
    CHECK(i.context.size() == 180);
    CHECK(!violates_exclusion(i));
  }
}

TEST_CASE("count identities on random corpus shapes") {
  std::mt19937_64 rng(2024);
  for (int trial = 0; trial < 200; ++trial) {
    std::map<std::string, std::size_t> rc;
    const auto corpus = random_corpus(rng, rc);
    const std::size_t total_radii =
        std::accumulate(rc.begin(), rc.end(), std::size_t{0}, [](std::size_t s, const auto& p) { return s + p.second; });
    const auto se = build_se_instances(corpus);
    const auto ce = build_ce_instances(corpus);
    CHECK(se.size() == total_radii * kProtocolPoses);
    CHECK(ce.size() == total_radii * kProtocolPoses);
    for (const auto& i : se) {
      CHECK(i.context.size() == (rc[i.target.material] - 1) * kProtocolPoses);
      CHECK(!violates_exclusion(i));
    }
    for (const auto& i : ce) {
      CHECK(i.context.size() == (total_radii - rc[i.target.material]) * kProtocolPoses);
      CHECK(!violates_exclusion(i));
    }
  }
}

TEST_CASE("context ordering and ids") {
  const std::vector<std::string> materials{"Zn", "Ag"};
  const std::vector<double> radii{0.9, 0.7};
  const auto corpus = CorpusIndex::product(materials, radii, 5);
  CHECK(corpus.materials() == std::vector<std::string>{"Ag", "Zn"});
  CHECK(corpus.radii("Ag") == std::vector<double>{0.7, 0.9});
  const auto ce = build_ce_instances(corpus);
  CHECK(ce.front().id == "CE/Ag/R0.7/p0");
  CHECK(std::is_sorted(ce.front().context.begin(), ce.front().context.end()));
  const auto se = build_se_instances(corpus);
  CHECK(se[7].id == "SE/Ag/R0.9/p2");
  CHECK(instance_id(Protocol::SpatialExclusion, {"Au", 1.0, 3}) == "SE/Au/R1.0/p3");
  CHECK(radius_label(0.8) == "0.8");
  CHECK(radius_label(1.0) == "1.0");
  CHECK(radius_label(2.0) == "2.0");
}

TEST_CASE("held-out poses never enter the protocols") {
  const std::vector<std::string> materials{"A", "B"};
  const std::vector<double> radii{0.7, 0.8};
  for (const auto& i : build_ce_instances(CorpusIndex::product(materials, radii, 10))) {
    CHECK(i.target.pose < kProtocolPoses);
    for (const auto& c : i.context) CHECK(c.pose < kProtocolPoses);
  }
}

TEST_CASE("exclusion checker catches leaks") {
  BenchmarkInstance se{"x", Protocol::SpatialExclusion, {"A", 0.7, 0}, {{"A", 0.8, 0}}};
  CHECK(!violates_exclusion(se));
  se.context.push_back({"A", 0.7, 1});
  CHECK(violates_exclusion(se));
  se.context = {{"B", 0.8, 0}};
  CHECK(violates_exclusion(se));
  se.context = {{"A", 0.8, 7}};
  CHECK(violates_exclusion(se));

  BenchmarkInstance ce{"y", Protocol::CompositionalExclusion, {"A", 0.7, 0}, {{"B", 0.7, 0}}};
  CHECK(!violates_exclusion(ce));
  ce.context.push_back({"A", 0.9, 0});
  CHECK(violates_exclusion(ce));
}

TEST_CASE("missing protocol entries are listed") {
  std::vector<SampleRef> entries;
  for (int k = 0; k < 5; ++k) entries.push_back({"A", 0.7, k});
  for (int k = 0; k < 4; ++k) entries.push_back({"A", 0.8, k});
  const CorpusIndex corpus(entries);
  try {
    build_se_instances(corpus);
    FAIL("expected an error");
  } catch (const GenerationError& e) {
    CHECK(std::string(e.what()).find("A/R0.8/p4") != std::string::npos);
  }
  CHECK_THROWS_AS(build_ce_instances(corpus), GenerationError);
  CHECK_THROWS_AS(build_se_instances(CorpusIndex{}), GenerationError);
}

TEST_CASE("aggregate") {
  SUBCASE("oracle losses") {
    std::vector<InstanceLoss> l(200);
    for (auto& x : l) x.loss = 0.0;
    const auto e = aggregate(l, Protocol::SpatialExclusion);
    CHECK(e.mean == 0.0);
    CHECK(e.failure_rate() == 0.0);
  }
  SUBCASE("mixed losses match an independent mean") {
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> u(0, 80);
    std::vector<InstanceLoss> l;
    double sum = 0;
    int scored = 0;
    for (int i = 0; i < 97; ++i) {
      if (i % 7 == 0) {
        l.push_back({fmt::format("i{}", i), std::nullopt});
      } else {
        const double v = u(rng);
        l.push_back({fmt::format("i{}", i), v});
        sum += v;
        ++scored;
      }
    }
    const auto e = aggregate(l, Protocol::CompositionalExclusion);
    CHECK(*e.mean == doctest::Approx(sum / scored).epsilon(1e-14));
    CHECK(e.n_failed == 14);
    CHECK(e.failure_rate() == doctest::Approx(14.0 / 97));
  }
  SUBCASE("all failed") {
    std::vector<InstanceLoss> l{{"a", std::nullopt}};
    const auto e = aggregate(l, Protocol::SpatialExclusion);
    CHECK(!e.mean);
    CHECK(e.failure_rate() == 1.0);
  }
  CHECK_THROWS_AS(aggregate(std::vector<InstanceLoss>{}, Protocol::SpatialExclusion), ArgumentError);
}

TEST_CASE("instance manifest round trip") {
  const std::vector<std::string> materials{"A", "B"};
  const std::vector<double> radii{0.7, 0.8};
  const auto ce = build_ce_instances(CorpusIndex::product(materials, radii, 5));
  for (const auto& i : ce) {
    const auto back = instance_from_json_line(instance_to_json_line(i));
    CHECK(back.id == i.id);
    CHECK(back.protocol == i.protocol);
    CHECK(back.target == i.target);
    CHECK(back.context == i.context);
  }
  testutil::TempDir dir("protocols");
  write_instance_manifest(ce, dir.path() / "m.jsonl");
  std::ifstream in(dir.path() / "m.jsonl");
  std::string line;
  std::size_t n = 0;
  while (std::getline(in, line)) ++n;
  CHECK(n == ce.size());
}

TEST_CASE("protocol names") {
  CHECK(to_string(Protocol::SpatialExclusion) == "SE");
  CHECK(protocol_from_string("CE") == Protocol::CompositionalExclusion);
  CHECK_THROWS(protocol_from_string("XX"));
}
