#include "xtalbench/gateway.hpp"

#include <fmt/format.h>
#include <json.hpp>
#include <spdlog/spdlog.h>

#include <algorithm>
#include <atomic>
#include <cmath>
#include <condition_variable>
#include <fstream>
#include <limits>
#include <random>
#include <sstream>
#include <thread>

namespace xtalbench {

using ordered_json = nlohmann::ordered_json;

double RetryPolicy::backoff(int attempt) const {
  const double d = initial_backoff_s * std::pow(multiplier, std::max(0, attempt - 1));
  return std::min(d, max_backoff_s);
}

namespace {

constexpr std::array<std::pair<EndpointKind, std::string_view>, 6> kKindNames{{
    {EndpointKind::Http, "http"},
    {EndpointKind::MockOracle, "mock-oracle"},
    {EndpointKind::MockScaled, "mock-scaled"},
    {EndpointKind::MockNull, "mock-null"},
    {EndpointKind::MockGarbage, "mock-garbage"},
    {EndpointKind::MockNoisy, "mock-noisy"},
}};

EndpointKind kind_from_string(std::string_view s) {
  for (const auto& [k, name] : kKindNames) {
    if (name == s) return k;
  }
  throw ConfigError(fmt::format("unknown endpoint kind '{}'", s));
}

// Mocks report a fixed base latency plus a per-example cost so context size
// shows up in the latency columns without reading the clock.
constexpr double kMockSecondsPerContextBlock = 0.002;

double mock_latency(double base, const Prompt& p) {
  return base + kMockSecondsPerContextBlock * static_cast<double>(p.context_blocks);
}

std::uint64_t fnv1a(std::string_view s) {
  std::uint64_t h = 1469598103934665603ull;
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

class OracleTransport : public Transport {
 public:
  OracleTransport(GroundTruth truth, std::optional<double> factor, double latency)
      : truth_(std::move(truth)), factor_(factor), latency_(latency) {}

  TransportReply send(const Prompt& prompt) override {
    const auto record = truth_(prompt.target);
    TransportReply r;
    r.status = TransportReply::Status::Ok;
    r.body = factor_ ? scaled_response(record, *factor_) : oracle_response(record);
    r.simulated_latency_s = mock_latency(latency_, prompt);
    return r;
  }

 private:
  GroundTruth truth_;
  std::optional<double> factor_;
  double latency_;
};

class NoisyTransport : public Transport {
 public:
  NoisyTransport(GroundTruth truth, double noise, std::uint64_t seed, double latency)
      : truth_(std::move(truth)), noise_(noise), seed_(seed), latency_(latency) {}

  TransportReply send(const Prompt& prompt) override {
    TransportReply r;
    r.status = TransportReply::Status::Ok;
    r.body = noisy_response(truth_(prompt.target), noise_, seed_ ^ fnv1a(prompt.instance_id));
    r.simulated_latency_s = mock_latency(latency_, prompt);
    return r;
  }

 private:
  GroundTruth truth_;
  double noise_;
  std::uint64_t seed_;
  double latency_;
};

class NullTransport : public Transport {
 public:
  explicit NullTransport(double latency) : latency_(latency) {}

  TransportReply send(const Prompt& prompt) override {
    TransportReply r;
    r.status = TransportReply::Status::Fatal;
    r.error = "null endpoint returns no response";
    r.simulated_latency_s = mock_latency(latency_, prompt);
    return r;
  }

 private:
  double latency_;
};

class GarbageTransport : public Transport {
 public:
  GarbageTransport(std::uint64_t seed, double latency) : seed_(seed), latency_(latency) {}

  // Letters, spaces and full stops only: nothing a parser could take for a
  // label, a number or a JSON object.
  TransportReply send(const Prompt& prompt) override {
    static constexpr std::string_view alphabet = "abcdefghijklmnopqrstuvwxyz    .\n";
    std::mt19937_64 rng(seed_ ^ fnv1a(prompt.instance_id));
    std::uniform_int_distribution<std::size_t> pick(0, alphabet.size() - 1);
    std::uniform_int_distribution<int> length(64, 512);
    TransportReply r;
    r.status = TransportReply::Status::Ok;
    const int n = length(rng);
    r.body.reserve(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) r.body += alphabet[pick(rng)];
    r.simulated_latency_s = mock_latency(latency_, prompt);
    return r;
  }

 private:
  std::uint64_t seed_;
  double latency_;
};

}  // namespace

void ModelEndpoint::validate() const {
  if (name.empty()) throw ConfigError("endpoint without a name");
  auto fail = [&](std::string_view what) { throw ConfigError(fmt::format("endpoint '{}': {}", name, what)); };
  if (max_in_flight < 1) fail("max_in_flight must be >= 1");
  if (!(timeout_s > 0)) fail("timeout_s must be > 0");
  if (requests_per_second < 0) fail("requests_per_second must be >= 0");
  if (retry.max_attempts < 1) fail("retry.max_attempts must be >= 1");
  if (retry.initial_backoff_s < 0 || retry.multiplier < 1 || retry.max_backoff_s < 0) fail("bad retry policy");
  if (simulated_latency_s < 0) fail("simulated_latency_s must be >= 0");
  if (kind == EndpointKind::Http) {
    if (url.empty()) fail("url is required");
    if (model.empty()) fail("model is required");
    if (api_key_env.empty()) fail("api_key_env is required");
  }
  if (kind == EndpointKind::MockScaled && !(scale > 0)) fail("scale must be > 0");
  if (kind == EndpointKind::MockNoisy && !(noise >= 0)) fail("noise must be >= 0");
}

std::vector<ModelEndpoint> builtin_endpoints() {
  std::vector<ModelEndpoint> out;
  for (const auto& [kind, name] : kKindNames) {
    if (kind == EndpointKind::Http) continue;
    ModelEndpoint e;
    e.name = std::string(name);
    e.kind = kind;
    e.max_in_flight = 4;
    e.simulated_latency_s = 0.25;
    e.retry.initial_backoff_s = 0.01;
    out.push_back(std::move(e));
  }
  return out;
}

std::vector<ModelEndpoint> parse_endpoints(std::string_view text) {
  const auto j = ordered_json::parse(text, nullptr, false);
  if (j.is_discarded() || !j.is_array()) throw ConfigError("endpoints file: expected a JSON array");
  std::vector<ModelEndpoint> out;
  try {
    for (const auto& e : j) {
      ModelEndpoint m;
      m.name = e.at("name").get<std::string>();
      m.kind = kind_from_string(e.value("kind", std::string("http")));
      m.url = e.value("url", std::string());
      m.model = e.value("model", std::string());
      m.api_key_env = e.value("api_key_env", std::string());
      m.max_in_flight = e.value("max_in_flight", m.max_in_flight);
      m.timeout_s = e.value("timeout_s", m.timeout_s);
      m.requests_per_second = e.value("requests_per_second", m.requests_per_second);
      m.scale = e.value("scale", m.scale);
      m.noise = e.value("noise", m.noise);
      m.simulated_latency_s = e.value("simulated_latency_s", m.simulated_latency_s);
      if (const auto r = e.find("retry"); r != e.end()) {
        m.retry.max_attempts = r->value("max_attempts", m.retry.max_attempts);
        m.retry.initial_backoff_s = r->value("initial_backoff_s", m.retry.initial_backoff_s);
        m.retry.multiplier = r->value("multiplier", m.retry.multiplier);
        m.retry.max_backoff_s = r->value("max_backoff_s", m.retry.max_backoff_s);
      }
      m.validate();
      if (std::any_of(out.begin(), out.end(), [&](const auto& o) { return o.name == m.name; })) {
        throw ConfigError(fmt::format("endpoint '{}' defined twice", m.name));
      }
      out.push_back(std::move(m));
    }
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(fmt::format("endpoints file: {}", e.what()));
  }
  return out;
}

std::vector<ModelEndpoint> load_endpoints(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError(fmt::format("cannot open endpoints file '{}'", path.string()));
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_endpoints(buf.str());
}

const ModelEndpoint& find_endpoint(const std::vector<ModelEndpoint>& endpoints, std::string_view name) {
  const auto it = std::find_if(endpoints.begin(), endpoints.end(), [&](const auto& e) { return e.name == name; });
  if (it == endpoints.end()) throw ConfigError(fmt::format("unknown endpoint '{}'", name));
  return *it;
}

std::string oracle_response(const AnnotationRecord& record) {
  return "```json\n" + to_json_text(record) + "```\n";
}

std::string scaled_response(const AnnotationRecord& record, double factor) {
  ordered_json j;
  for (auto f : kAllFields) {
    const auto key = std::string(field_name(f));
    if (is_numeric(f)) {
      j[key] = numeric_value(record, f) * factor;
    } else if (f == Field::SpaceGroup) {
      j[key] = record.space_group;
    } else {
      j[key] = record.description;
    }
  }
  return "```json\n" + j.dump(2) + "\n```\n";
}

std::string noisy_response(const AnnotationRecord& record, double noise, std::uint64_t stream_seed) {
  std::mt19937_64 rng(stream_seed);
  std::normal_distribution<double> jitter(0.0, noise);
  ordered_json j;
  for (auto f : kAllFields) {
    const auto key = std::string(field_name(f));
    if (is_numeric(f)) {
      j[key] = numeric_value(record, f) * (1.0 + jitter(rng));
    } else if (f == Field::SpaceGroup) {
      j[key] = record.space_group;
    } else {
      j[key] = record.description;
    }
  }
  return "```json\n" + j.dump(2) + "\n```\n";
}

std::unique_ptr<Transport> make_noisy_transport(GroundTruth truth, double noise, std::uint64_t seed, double latency_s) {
  return std::make_unique<NoisyTransport>(std::move(truth), noise, seed, latency_s);
}

std::unique_ptr<Transport> make_oracle_transport(GroundTruth truth, double latency_s) {
  return std::make_unique<OracleTransport>(std::move(truth), std::nullopt, latency_s);
}

std::unique_ptr<Transport> make_scaled_transport(GroundTruth truth, double factor, double latency_s) {
  return std::make_unique<OracleTransport>(std::move(truth), factor, latency_s);
}

std::unique_ptr<Transport> make_null_transport(double latency_s) { return std::make_unique<NullTransport>(latency_s); }

std::unique_ptr<Transport> make_garbage_transport(std::uint64_t seed, double latency_s) {
  return std::make_unique<GarbageTransport>(seed, latency_s);
}

std::unique_ptr<Transport> make_transport(const ModelEndpoint& endpoint, const Dataset& dataset, std::uint64_t seed) {
  auto truth = [dataset](const SampleRef& ref) { return dataset.annotation(ref.material, ref.radius_nm); };
  switch (endpoint.kind) {
    case EndpointKind::Http: return make_http_transport(endpoint);
    case EndpointKind::MockOracle: return make_oracle_transport(truth, endpoint.simulated_latency_s);
    case EndpointKind::MockScaled: return make_scaled_transport(truth, endpoint.scale, endpoint.simulated_latency_s);
    case EndpointKind::MockNull: return make_null_transport(endpoint.simulated_latency_s);
    case EndpointKind::MockGarbage: return make_garbage_transport(seed, endpoint.simulated_latency_s);
    case EndpointKind::MockNoisy:
      return make_noisy_transport(truth, endpoint.noise, seed, endpoint.simulated_latency_s);
  }
  throw ConfigError("unhandled endpoint kind");
}

void real_sleep(double seconds) {
  if (seconds > 0) std::this_thread::sleep_for(std::chrono::duration<double>(seconds));
}

QueryResult query(const ModelEndpoint& endpoint, Transport& transport, const Prompt& prompt, const Sleeper& sleep) {
  QueryResult out;
  out.instance_id = prompt.instance_id;
  const int max_attempts = std::max(1, endpoint.retry.max_attempts);
  for (int attempt = 1; attempt <= max_attempts; ++attempt) {
    out.attempts = attempt;
    TransportReply reply;
    const auto t0 = std::chrono::steady_clock::now();
    try {
      reply = transport.send(prompt);
    } catch (const std::exception& e) {
      reply.status = TransportReply::Status::Retryable;
      reply.error = e.what();
    }
    const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    out.latency_s = reply.simulated_latency_s.value_or(wall);
    if (reply.status == TransportReply::Status::Ok) {
      out.raw_response = std::move(reply.body);
      out.error.clear();
      out.parsed = parse_response(*out.raw_response);
      return out;
    }
    out.error = reply.error;
    if (reply.status == TransportReply::Status::Fatal) break;
    if (attempt < max_attempts) {
      const double delay = endpoint.retry.backoff(attempt);
      spdlog::debug("{}: attempt {} failed ({}); retrying in {:.2f} s", prompt.instance_id, attempt, reply.error, delay);
      sleep(delay);
    }
  }
  out.parsed = PredictionRecord{};
  return out;
}

TokenBucket::TokenBucket(double rate, double capacity)
    : rate_(rate), capacity_(std::max(1.0, capacity)), tokens_(std::max(1.0, capacity)), last_(Clock::now()) {}

void TokenBucket::acquire() {
  if (rate_ <= 0) return;
  for (;;) {
    double wait = 0;
    {
      std::lock_guard lock(mutex_);
      const auto now = Clock::now();
      tokens_ = std::min(capacity_, tokens_ + rate_ * std::chrono::duration<double>(now - last_).count());
      last_ = now;
      if (tokens_ >= 1.0) {
        tokens_ -= 1.0;
        return;
      }
      wait = (1.0 - tokens_) / rate_;
    }
    std::this_thread::sleep_for(std::chrono::duration<double>(wait));
  }
}

std::size_t dispatch(std::span<const BenchmarkInstance> instances, const ModelEndpoint& endpoint,
                     Transport& transport, const PromptSource& prompts, const ResultSink& sink,
                     const DispatchOptions& options) {
  const std::size_t limit = std::min(instances.size(), options.stop_after.value_or(instances.size()));
  if (limit == 0) return 0;

  struct Slot {
    std::optional<QueryResult> result;
    std::exception_ptr error;
  };
  std::vector<Slot> slots(limit);
  std::mutex mutex;
  std::condition_variable ready;
  std::atomic<std::size_t> next{0};
  std::atomic<bool> cancelled{false};
  TokenBucket bucket(endpoint.requests_per_second, endpoint.max_in_flight);

  auto worker = [&] {
    for (;;) {
      const std::size_t i = next.fetch_add(1);
      if (i >= limit || cancelled.load()) return;
      Slot slot;
      try {
        const auto prompt = prompts(instances[i]);
        bucket.acquire();
        slot.result = query(endpoint, transport, prompt, options.sleep);
      } catch (...) {
        slot.error = std::current_exception();
      }
      {
        std::lock_guard lock(mutex);
        slots[i] = std::move(slot);
      }
      ready.notify_all();
    }
  };

  const auto n_threads = std::min<std::size_t>(static_cast<std::size_t>(endpoint.max_in_flight), limit);
  std::vector<std::thread> threads;
  threads.reserve(n_threads);
  for (std::size_t t = 0; t < n_threads; ++t) threads.emplace_back(worker);

  std::exception_ptr failure;
  std::size_t emitted = 0;
  for (std::size_t i = 0; i < limit && !failure; ++i) {
    Slot slot;
    {
      std::unique_lock lock(mutex);
      ready.wait(lock, [&] { return slots[i].result.has_value() || slots[i].error; });
      slot = std::move(slots[i]);
    }
    if (slot.error) {
      failure = slot.error;
      break;
    }
    try {
      sink(instances[i], *slot.result);
      ++emitted;
    } catch (...) {
      failure = std::current_exception();
    }
  }
  cancelled = true;
  for (auto& t : threads) t.join();
  if (failure) std::rethrow_exception(failure);
  return emitted;
}

}  // namespace xtalbench
