#include <doctest.h>

#include "test_util.hpp"
#include "xtalbench/corpus.hpp"
#include "xtalbench/gateway.hpp"

#include <atomic>
#include <cstdlib>
#include <thread>

using namespace xtalbench;

namespace {

// Au, TiO2 and SrTiO3 at four radii, protocol poses only.
struct SmallCorpus {
  testutil::TempDir dir{"gateway"};
  Dataset dataset;

  SmallCorpus() : dataset(make()) {}

  Dataset make() {
    GenerateOptions o;
    o.root = dir.path() / "ds";
    o.materials = {"Au", "TiO2", "SrTiO3"};
    o.pose_count = kProtocolPoses;
    generate_dataset(o);
    return Dataset::open(o.root);
  }
};

SmallCorpus& corpus() {
  static SmallCorpus c;
  return c;
}

Prompt dummy_prompt(const std::string& id) {
  Prompt p;
  p.instance_id = id;
  return p;
}

ModelEndpoint test_endpoint() {
  ModelEndpoint e;
  e.name = "t";
  e.kind = EndpointKind::MockOracle;
  e.retry.max_attempts = 3;
  e.retry.initial_backoff_s = 1.0;
  e.retry.multiplier = 2.0;
  e.retry.max_backoff_s = 30;
  return e;
}

// Fails `failures` times with the given status, then answers.
class ScriptedTransport : public Transport {
 public:
  ScriptedTransport(int failures, TransportReply::Status status, double fail_sleep = 0, double ok_sleep = 0,
                    bool throw_instead = false)
      : failures_(failures), status_(status), fail_sleep_(fail_sleep), ok_sleep_(ok_sleep), throw_(throw_instead) {}

  TransportReply send(const Prompt&) override {
    const int n = calls++;
    TransportReply r;
    if (n < failures_) {
      real_sleep(fail_sleep_);
      if (throw_) throw std::runtime_error("connection reset");
      r.status = status_;
      r.error = "scripted failure";
      return r;
    }
    real_sleep(ok_sleep_);
    r.status = TransportReply::Status::Ok;
    r.body = "density: 5.0 g/cm^3";
    return r;
  }

  std::atomic<int> calls{0};

 private:
  int failures_;
  TransportReply::Status status_;
  double fail_sleep_, ok_sleep_;
  bool throw_;
};

}  // namespace

TEST_CASE("retries with exponential backoff") {
  const auto ep = test_endpoint();
  std::vector<double> sleeps;
  auto record = [&](double s) { sleeps.push_back(s); };

  SUBCASE("two failures then success") {
    ScriptedTransport t(2, TransportReply::Status::Retryable);
    const auto r = query(ep, t, dummy_prompt("x"), record);
    CHECK(r.attempts == 3);
    CHECK(r.raw_response);
    CHECK(r.parsed.parse_ok);
    CHECK(r.error.empty());
    CHECK(sleeps == std::vector<double>{1.0, 2.0});
  }
  SUBCASE("exhausted") {
    ScriptedTransport t(5, TransportReply::Status::Retryable);
    const auto r = query(ep, t, dummy_prompt("x"), record);
    CHECK(r.attempts == 3);
    CHECK(t.calls == 3);
    CHECK(!r.raw_response);
    CHECK(!r.parsed.parse_ok);
    CHECK(r.error == "scripted failure");
    CHECK(sleeps == std::vector<double>{1.0, 2.0});
  }
  SUBCASE("fatal errors are not retried") {
    ScriptedTransport t(5, TransportReply::Status::Fatal);
    const auto r = query(ep, t, dummy_prompt("x"), record);
    CHECK(r.attempts == 1);
    CHECK(sleeps.empty());
    CHECK(!r.raw_response);
  }
  SUBCASE("exceptions are retryable") {
    ScriptedTransport t(1, TransportReply::Status::Retryable, 0, 0, true);
    const auto r = query(ep, t, dummy_prompt("x"), record);
    CHECK(r.attempts == 2);
    CHECK(r.raw_response);
  }
}

TEST_CASE("backoff is capped") {
  RetryPolicy p;
  p.initial_backoff_s = 1;
  p.multiplier = 3;
  p.max_backoff_s = 5;
  CHECK(p.backoff(1) == 1);
  CHECK(p.backoff(2) == 3);
  CHECK(p.backoff(3) == 5);
}

TEST_CASE("latency is the winning attempt's wall time") {
  auto ep = test_endpoint();
  ep.retry.initial_backoff_s = 0;
  ScriptedTransport t(2, TransportReply::Status::Retryable, 0.15, 0.05);
  const auto r = query(ep, t, dummy_prompt("x"), [](double) {});
  CHECK(r.attempts == 3);
  CHECK(r.latency_s >= 0.05);
  CHECK(r.latency_s < 0.15);
}

TEST_CASE("mocks report their simulated latency") {
  auto truth = [](const SampleRef&) { return AnnotationRecord{}; };
  auto t = make_oracle_transport(truth, 0.25);
  auto p = dummy_prompt("x");
  p.context_blocks = 15;
  const auto r = query(test_endpoint(), *t, p, [](double) {});
  CHECK(r.latency_s == doctest::Approx(0.25 + 15 * 0.002));
}

TEST_CASE("dispatch keeps instance order under concurrency") {
  std::vector<BenchmarkInstance> instances;
  for (int i = 0; i < 24; ++i) instances.push_back({fmt::format("i{:02}", i), Protocol::SpatialExclusion, {}, {}});

  class Jittery : public Transport {
   public:
    TransportReply send(const Prompt& p) override {
      const int now = ++in_flight;
      int seen = peak.load();
      while (now > seen && !peak.compare_exchange_weak(seen, now)) {
      }
      const int idx = std::stoi(p.instance_id.substr(1));
      real_sleep(0.002 * ((idx * 7) % 5));
      --in_flight;
      TransportReply r;
      r.status = TransportReply::Status::Ok;
      r.body = fmt::format("n_atoms: {}", idx);
      return r;
    }
    std::atomic<int> in_flight{0}, peak{0};
  } transport;

  auto ep = test_endpoint();
  ep.max_in_flight = 4;
  std::vector<std::string> order;
  std::thread::id sink_thread;
  const auto caller = std::this_thread::get_id();
  const auto n = dispatch(
      instances, ep, transport, [](const BenchmarkInstance& i) { return dummy_prompt(i.id); },
      [&](const BenchmarkInstance& i, const QueryResult& r) {
        order.push_back(i.id);
        CHECK(r.instance_id == i.id);
        CHECK(*r.parsed.number(Field::NAtoms) == std::stoi(i.id.substr(1)));
        sink_thread = std::this_thread::get_id();
      });
  CHECK(n == 24);
  REQUIRE(order.size() == 24);
  for (int i = 0; i < 24; ++i) CHECK(order[i] == instances[i].id);
  CHECK(transport.peak <= 4);
  CHECK(sink_thread == caller);

  DispatchOptions stop;
  stop.stop_after = 7;
  order.clear();
  CHECK(dispatch(instances, ep, transport, [](const BenchmarkInstance& i) { return dummy_prompt(i.id); },
                 [&](const BenchmarkInstance& i, const QueryResult&) { order.push_back(i.id); }, stop) == 7);
  CHECK(order.size() == 7);
  CHECK(order.back() == "i06");
}

TEST_CASE("dispatch surfaces prompt errors") {
  std::vector<BenchmarkInstance> instances{{"a", Protocol::SpatialExclusion, {}, {}}};
  ScriptedTransport t(0, TransportReply::Status::Ok);
  CHECK_THROWS_AS(dispatch(
                      instances, test_endpoint(), t,
                      [](const BenchmarkInstance&) -> Prompt { throw GenerationError("missing"); },
                      [](const BenchmarkInstance&, const QueryResult&) {}),
                  GenerationError);
}

TEST_CASE("token bucket") {
  TokenBucket unlimited(0, 1);
  const auto t0 = std::chrono::steady_clock::now();
  for (int i = 0; i < 1000; ++i) unlimited.acquire();
  CHECK(std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count() < 0.1);

  TokenBucket limited(40, 1);
  const auto t1 = std::chrono::steady_clock::now();
  for (int i = 0; i < 9; ++i) limited.acquire();
  // One token up front, then eight more at 40/s.
  CHECK(std::chrono::duration<double>(std::chrono::steady_clock::now() - t1).count() >= 0.19);
}

TEST_CASE("endpoint configuration") {
  const auto eps = parse_endpoints(R"([
    {"name": "remote", "kind": "http", "url": "https://example.invalid/v1/chat/completions",
     "model": "m-1", "api_key_env": "XTALBENCH_TEST_KEY", "max_in_flight": 2, "timeout_s": 60,
     "requests_per_second": 1.5, "retry": {"max_attempts": 5, "initial_backoff_s": 0.5,
     "multiplier": 3, "max_backoff_s": 9}},
    {"name": "noisy", "kind": "mock-noisy", "noise": 0.2, "simulated_latency_s": 1}
  ])");
  REQUIRE(eps.size() == 2);
  const auto& r = find_endpoint(eps, "remote");
  CHECK(r.kind == EndpointKind::Http);
  CHECK(r.model == "m-1");
  CHECK(r.max_in_flight == 2);
  CHECK(r.requests_per_second == 1.5);
  CHECK(r.retry.max_attempts == 5);
  CHECK(r.retry.backoff(2) == 1.5);
  CHECK(find_endpoint(eps, "noisy").noise == 0.2);
  CHECK_THROWS_AS(find_endpoint(eps, "nope"), ConfigError);

  CHECK_THROWS_AS(parse_endpoints("{}"), ConfigError);
  CHECK_THROWS_AS(parse_endpoints(R"([{"name": "x", "kind": "carrier-pigeon"}])"), ConfigError);
  CHECK_THROWS_AS(parse_endpoints(R"([{"name": "x", "kind": "http"}])"), ConfigError);
  CHECK_THROWS_AS(parse_endpoints(R"([{"name": "x", "kind": "mock-oracle", "max_in_flight": 0}])"), ConfigError);

  const auto builtin = builtin_endpoints();
  CHECK(builtin.size() == 5);
  for (const auto& e : builtin) CHECK_NOTHROW(e.validate());
}

TEST_CASE("http transport needs its key") {
  ModelEndpoint e;
  e.name = "remote";
  e.url = "https://example.invalid/v1/chat/completions";
  e.model = "m";
  e.api_key_env = "XTALBENCH_SURELY_UNSET_KEY";
  ::unsetenv("XTALBENCH_SURELY_UNSET_KEY");
  CHECK_THROWS_AS(make_http_transport(e), ConfigError);
}

TEST_CASE("prompt structure") {
  const auto& ds = corpus().dataset;
  const auto se = build_se_instances(ds.index());
  const auto ce = build_ce_instances(ds.index());

  const auto p = build_prompt(se.front(), ds);
  CHECK(p.context_blocks == 15);
  std::size_t images = 0;
  for (const auto& part : p.parts) images += part.kind == PromptPart::Kind::Image;
  CHECK(images == 15);
  CHECK(p.parts.back().text == prompt_instruction());
  for (auto f : kAllFields) CHECK(prompt_instruction().find(field_name(f)) != std::string::npos);
  CHECK(prompt_instruction().find(kPromptVersion) != std::string::npos);

  // The query carries coordinates only.
  const auto& query_text = p.parts[p.parts.size() - 2].text;
  const auto xyz = ds.xyz(se.front().target);
  CHECK(query_text.find(format_xyz_atoms(xyz.cell)) != std::string::npos);
  CHECK(query_text.find("material=") == std::string::npos);
  CHECK(query_text.find("density") == std::string::npos);

  // Same instance, same bytes.
  CHECK(build_prompt(se.front(), ds).canonical_text() == p.canonical_text());
}

TEST_CASE("compositional prompts never name the held-out material") {
  const auto& ds = corpus().dataset;
  for (const auto& inst : build_ce_instances(ds.index())) {
    const auto p = build_prompt(inst, ds);
    CHECK(p.context_blocks == 40);
    for (std::size_t i = 0; i + 2 < p.parts.size(); ++i) {
      CAPTURE(inst.id);
      CHECK(p.parts[i].text.find(inst.target.material) == std::string::npos);
    }
  }
}

TEST_CASE("missing corpus file") {
  const auto& ds = corpus().dataset;
  auto inst = build_se_instances(ds.index()).front();
  inst.context.push_back({"Au", 0.75, 0});
  CHECK_THROWS_AS(build_prompt(inst, ds), GenerationError);
}

TEST_CASE("mock transports") {
  const auto& ds = corpus().dataset;
  const auto inst = build_ce_instances(ds.index())[3];
  const auto prompt = build_prompt(inst, ds);
  const auto truth = ds.annotation(inst.target.material, inst.target.radius_nm);
  const auto builtin = builtin_endpoints();
  auto run = [&](std::string_view name, std::uint64_t seed = 0) {
    const auto& ep = find_endpoint(builtin, name);
    auto t = make_transport(ep, ds, seed);
    return query(ep, *t, prompt, [](double) {});
  };

  const auto oracle = run("mock-oracle");
  REQUIRE(oracle.parsed.parse_ok);
  for (auto f : kAllFields) {
    if (is_numeric(f)) CHECK(*oracle.parsed.number(f) == numeric_value(truth, f));
  }
  CHECK(oracle.parsed.space_group == truth.space_group);

  const auto scaled = run("mock-scaled");
  for (auto f : kAllFields) {
    if (is_numeric(f)) CHECK(*scaled.parsed.number(f) == doctest::Approx(1.15 * numeric_value(truth, f)).epsilon(1e-12));
  }

  const auto null = run("mock-null");
  CHECK(!null.raw_response);
  CHECK(!null.parsed.parse_ok);
  CHECK(null.attempts == 1);

  const auto garbage = run("mock-garbage", 4);
  REQUIRE(garbage.raw_response);
  CHECK(!garbage.raw_response->empty());
  CHECK(!garbage.parsed.parse_ok);

  const auto n1 = run("mock-noisy", 1);
  const auto n1b = run("mock-noisy", 1);
  const auto n2 = run("mock-noisy", 2);
  CHECK(n1.raw_response == n1b.raw_response);
  CHECK(n1.raw_response != n2.raw_response);
  CHECK(n1.parsed.parse_ok);
}
