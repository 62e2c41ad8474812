#pragma once

#include "xtalbench/corpus.hpp"
#include "xtalbench/prediction.hpp"
#include "xtalbench/protocols.hpp"

#include <chrono>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <memory>
#include <mutex>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace xtalbench {

inline constexpr std::string_view kPromptVersion = "xtalbench-prompt/1";

struct PromptPart {
  enum class Kind { Text, Image };
  Kind kind = Kind::Text;
  std::string text;                  // Text
  std::filesystem::path image_path;  // Image (PNG)
};

struct Prompt {
  std::vector<PromptPart> parts;
  // Metadata for mocks and logging; never sent to a model.
  std::string instance_id;
  SampleRef target;
  std::size_t context_blocks = 0;

  /// Text parts verbatim and image parts as "<image sha256>", in order.
  std::string canonical_text() const;
};

/// The output-format instruction appended to every query.
std::string prompt_instruction();

/// Context blocks (image + annotation JSON) followed by the target's atom
/// lines and the instruction. Throws GenerationError if a referenced file is
/// missing.
Prompt build_prompt(const BenchmarkInstance& instance, const Dataset& dataset);

struct RetryPolicy {
  int max_attempts = 3;
  double initial_backoff_s = 1.0;
  double multiplier = 2.0;
  double max_backoff_s = 30.0;

  /// Delay after failed attempt `attempt` (1-based).
  double backoff(int attempt) const;
};

enum class EndpointKind { Http, MockOracle, MockScaled, MockNull, MockGarbage, MockNoisy };

struct ModelEndpoint {
  std::string name;
  EndpointKind kind = EndpointKind::Http;
  std::string url;      // full chat-completions URL
  std::string model;    // model id sent in the request
  std::string api_key_env;
  int max_in_flight = 1;
  double timeout_s = 120.0;
  double requests_per_second = 0;  // 0 = unlimited
  RetryPolicy retry;
  double scale = 1.15;             // MockScaled
  double noise = 0.10;             // MockNoisy: relative sd of the multiplicative noise
  double simulated_latency_s = 0;  // mocks: reported latency instead of wall time

  /// Throws ConfigError.
  void validate() const;
};

/// mock-oracle, mock-scaled, mock-null, mock-garbage, mock-noisy.
std::vector<ModelEndpoint> builtin_endpoints();

/// JSON list of endpoint objects; see README for the keys.
std::vector<ModelEndpoint> parse_endpoints(std::string_view text);
std::vector<ModelEndpoint> load_endpoints(const std::filesystem::path& path);
const ModelEndpoint& find_endpoint(const std::vector<ModelEndpoint>& endpoints, std::string_view name);

struct TransportReply {
  enum class Status { Ok, Retryable, Fatal };
  Status status = Status::Fatal;
  std::string body;
  std::string error;
  std::optional<double> simulated_latency_s;
};

class Transport {
 public:
  virtual ~Transport() = default;
  /// Must be safe to call from several threads at once.
  virtual TransportReply send(const Prompt& prompt) = 0;
};

using GroundTruth = std::function<AnnotationRecord(const SampleRef&)>;

std::unique_ptr<Transport> make_oracle_transport(GroundTruth truth, double latency_s = 0);
std::unique_ptr<Transport> make_scaled_transport(GroundTruth truth, double factor, double latency_s = 0);
std::unique_ptr<Transport> make_null_transport(double latency_s = 0);
std::unique_ptr<Transport> make_garbage_transport(std::uint64_t seed, double latency_s = 0);
/// Ground truth with every numeric field multiplied by (1 + N(0, noise)),
/// drawn from a stream seeded by `seed` and the instance id.
std::unique_ptr<Transport> make_noisy_transport(GroundTruth truth, double noise, std::uint64_t seed,
                                                double latency_s = 0);
/// OpenAI-compatible chat completions. Throws ConfigError when the key
/// variable is unset.
std::unique_ptr<Transport> make_http_transport(const ModelEndpoint& endpoint);

std::unique_ptr<Transport> make_transport(const ModelEndpoint& endpoint, const Dataset& dataset, std::uint64_t seed);

/// The ground-truth answer a mock sends, as a fenced JSON block.
std::string oracle_response(const AnnotationRecord& record);
std::string scaled_response(const AnnotationRecord& record, double factor);
std::string noisy_response(const AnnotationRecord& record, double noise, std::uint64_t stream_seed);

struct QueryResult {
  std::string instance_id;
  std::optional<std::string> raw_response;
  double latency_s = 0;  // winning attempt only
  int attempts = 0;
  std::string error;
  PredictionRecord parsed;
};

using Sleeper = std::function<void(double seconds)>;
void real_sleep(double seconds);

/// Up to retry.max_attempts sends with exponential backoff between them.
QueryResult query(const ModelEndpoint& endpoint, Transport& transport, const Prompt& prompt,
                  const Sleeper& sleep = real_sleep);

/// Token bucket: `rate` tokens per second, burst `capacity`.
class TokenBucket {
 public:
  TokenBucket(double rate, double capacity);
  void acquire();

 private:
  using Clock = std::chrono::steady_clock;
  double rate_;
  double capacity_;
  double tokens_;
  Clock::time_point last_;
  std::mutex mutex_;
};

struct DispatchOptions {
  std::optional<std::size_t> stop_after;  // emit this many results, then stop
  Sleeper sleep = real_sleep;
};

using PromptSource = std::function<Prompt(const BenchmarkInstance&)>;
using ResultSink = std::function<void(const BenchmarkInstance&, const QueryResult&)>;

/// Queries every instance with up to max_in_flight requests in flight.
/// `sink` runs on the calling thread only, in instance order. Returns the
/// number of results emitted.
std::size_t dispatch(std::span<const BenchmarkInstance> instances, const ModelEndpoint& endpoint,
                     Transport& transport, const PromptSource& prompts, const ResultSink& sink,
                     const DispatchOptions& options = {});

}  // namespace xtalbench
