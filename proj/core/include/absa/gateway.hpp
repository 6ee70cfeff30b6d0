#pragma once

#include <atomic>
#include <chrono>
#include <cstdint>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "absa/rng.hpp"
#include "absa/types.hpp"

namespace absa {

/// One completion call. `example_id` identifies the evaluation example for
/// the deterministic test backends (replay/scripted/perturb); the live
/// backend never puts it on the wire.
struct GenerationRequest {
  std::string prompt;
  double temperature = 0.8;
  std::string stop = "]";
  int seed = 0;
  int max_tokens = 256;
  std::string model;
  int example_id = -1;
};

enum class FinishReason { stop, length, error };

std::string to_string(FinishReason reason);

struct RawGeneration {
  std::string text;  // stop sequence excluded
  FinishReason finish_reason = FinishReason::stop;
  std::chrono::milliseconds latency{0};
  std::string backend;
  bool seed_forwarded = false;
};

/// Transport-level failures, each kind distinguishable from the others and
/// from validation failures (which are values, not exceptions).
class GatewayError : public std::runtime_error {
 public:
  enum class Kind { transport, auth, timeout, config };

  GatewayError(Kind kind, const std::string& message)
      : std::runtime_error(message), kind_(kind) {}

  Kind kind() const { return kind_; }

 private:
  Kind kind_;
};

/// Uniform generation interface. Implementations are safe for concurrent
/// callers; the deterministic backends return the same output for the same
/// request regardless of call interleaving.
class Backend {
 public:
  virtual ~Backend() = default;

  RawGeneration generate(const GenerationRequest& request) {
    if (request.temperature < 0)
      throw GatewayError(GatewayError::Kind::config, "temperature must be >= 0");
    if (request.max_tokens <= 0)
      throw GatewayError(GatewayError::Kind::config, "max_tokens must be > 0");
    calls_.fetch_add(1, std::memory_order_relaxed);
    return generate_impl(request);
  }

  virtual std::string name() const = 0;

  /// Total generate() invocations, for attempt-count assertions.
  std::uint64_t calls() const { return calls_.load(std::memory_order_relaxed); }

 protected:
  virtual RawGeneration generate_impl(const GenerationRequest& request) = 0;

 private:
  std::atomic<std::uint64_t> calls_{0};
};

enum class BackendKind { live, replay_gold, scripted, perturb };

std::string to_string(BackendKind kind);
std::optional<BackendKind> parse_backend_kind(std::string_view text);

struct BackendConfig {
  BackendKind kind = BackendKind::replay_gold;
  nlohmann::json params = nlohmann::json::object();
};

/// One scripted completion; `text` is returned as-is apart from stop
/// truncation.
struct ScriptedResponse {
  std::string text;
  FinishReason finish_reason = FinishReason::stop;
};

/// Seeded tuple-corruption selector used by the perturb backend. Kept as a
/// standalone pure function so an evaluation can recount corrupted tuples
/// with an independent pass. `tuple_index` is the position of the tuple in
/// the example's canonical (sorted) gold set.
inline bool perturb_selects(std::uint64_t perturb_seed, int generation_seed,
                            int example_id, std::size_t tuple_index,
                            double rate) {
  std::uint64_t h = splitmix64(perturb_seed ^ static_cast<std::uint64_t>(generation_seed));
  h = splitmix64(h ^ static_cast<std::uint64_t>(example_id));
  h = splitmix64(h ^ static_cast<std::uint64_t>(tuple_index));
  return static_cast<double>(h >> 11) * 0x1.0p-53 < rate;
}

/// The polarity rewrite applied to corrupted tuples.
inline Polarity flip_polarity(Polarity p) {
  switch (p) {
    case Polarity::positive: return Polarity::negative;
    case Polarity::negative: return Polarity::positive;
    default: return Polarity::positive;
  }
}

/// Builds a backend from its config.
///  - live: params {"endpoint", "path", "api_key", "api_key_env",
///    "timeout_ms", "retries", "backoff_ms", "max_in_flight"}
///  - replay_gold: emits each corpus example's gold serialization
///  - scripted: params {"script": [{"text", "finish"}...]} or a script
///    passed directly via make_scripted_backend
///  - perturb: params {"rate", "perturb_seed"}; gold with a seeded
///    fraction of tuples polarity-flipped
/// replay_gold and perturb require `corpus` (the examples keyed by id).
std::shared_ptr<Backend> make_backend(const BackendConfig& config,
                                      const std::vector<Example>* corpus = nullptr);

std::shared_ptr<Backend> make_scripted_backend(std::vector<ScriptedResponse> script);

}  // namespace absa
