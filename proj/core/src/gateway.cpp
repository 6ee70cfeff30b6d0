#include "absa/gateway.hpp"

#include <condition_variable>
#include <cstdlib>
#include <map>
#include <mutex>
#include <thread>

#include <httplib.h>

#include "absa/label_format.hpp"

namespace absa {
namespace {

using nlohmann::json;

std::string truncate_at_stop(std::string text, const std::string& stop,
                             FinishReason* reason) {
  if (stop.empty()) return text;
  const std::size_t pos = text.find(stop);
  if (pos != std::string::npos) {
    text.resize(pos);
    *reason = FinishReason::stop;
  }
  return text;
}

std::string without_trailing_bracket(const std::string& serialized) {
  if (!serialized.empty() && serialized.back() == ']')
    return serialized.substr(0, serialized.size() - 1);
  return serialized;
}

class ReplayGoldBackend : public Backend {
 public:
  explicit ReplayGoldBackend(const std::vector<Example>& corpus) {
    for (const Example& example : corpus)
      gold_[example.id] = serialize_prompt_style(example.gold);
  }

  std::string name() const override { return "replay_gold"; }

 protected:
  RawGeneration generate_impl(const GenerationRequest& request) override {
    auto it = gold_.find(request.example_id);
    if (it == gold_.end())
      throw GatewayError(GatewayError::Kind::config,
                         "replay backend has no example with id " +
                             std::to_string(request.example_id));
    RawGeneration out;
    // Emit up to the stop character, like a live server would have.
    out.text = without_trailing_bracket(it->second);
    out.finish_reason = FinishReason::stop;
    out.backend = name();
    out.seed_forwarded = true;
    return out;
  }

 private:
  std::map<int, std::string> gold_;
};

class ScriptedBackend : public Backend {
 public:
  explicit ScriptedBackend(std::vector<ScriptedResponse> script)
      : script_(std::move(script)) {}

  std::string name() const override { return "scripted"; }

 protected:
  RawGeneration generate_impl(const GenerationRequest& request) override {
    std::scoped_lock lock(mutex_);
    if (next_ >= script_.size())
      throw GatewayError(GatewayError::Kind::config, "script exhausted");
    const ScriptedResponse& entry = script_[next_++];
    RawGeneration out;
    out.finish_reason = entry.finish_reason;
    out.text = truncate_at_stop(entry.text, request.stop, &out.finish_reason);
    out.backend = name();
    return out;
  }

 private:
  std::mutex mutex_;
  std::vector<ScriptedResponse> script_;
  std::size_t next_ = 0;
};

class PerturbBackend : public Backend {
 public:
  PerturbBackend(const std::vector<Example>& corpus, double rate,
                 std::uint64_t perturb_seed)
      : rate_(rate), perturb_seed_(perturb_seed) {
    for (const Example& example : corpus) corpus_[example.id] = example.gold;
  }

  std::string name() const override { return "perturb"; }

 protected:
  RawGeneration generate_impl(const GenerationRequest& request) override {
    auto it = corpus_.find(request.example_id);
    if (it == corpus_.end())
      throw GatewayError(GatewayError::Kind::config,
                         "perturb backend has no example with id " +
                             std::to_string(request.example_id));
    LabelSet emitted;
    std::size_t index = 0;
    for (const Tuple& tuple : it->second) {
      Tuple out = tuple;
      if (perturb_selects(perturb_seed_, request.seed, request.example_id,
                          index, rate_))
        out.polarity = flip_polarity(out.polarity);
      emitted.insert(std::move(out));
      ++index;
    }
    RawGeneration out;
    out.text = without_trailing_bracket(serialize_prompt_style(emitted));
    out.finish_reason = FinishReason::stop;
    out.backend = name();
    out.seed_forwarded = true;
    return out;
  }

 private:
  std::map<int, LabelSet> corpus_;
  double rate_;
  std::uint64_t perturb_seed_;
};

struct LiveParams {
  std::string endpoint;              // e.g. http://127.0.0.1:11434
  std::string path = "/v1/completions";
  std::string api_key;
  int timeout_ms = 120000;
  int retries = 3;                   // attempts, not extra retries
  int backoff_ms = 500;
  int max_in_flight = 8;
};

/// Completions-style JSON over HTTP. Request body:
///   {"model", "prompt", "temperature", "seed", "stop", "max_tokens"}
/// Response: {"choices": [{"text", "finish_reason"}]}.
class LiveBackend : public Backend {
 public:
  explicit LiveBackend(LiveParams params) : params_(std::move(params)) {
    if (params_.endpoint.empty())
      throw GatewayError(GatewayError::Kind::config, "live backend needs an endpoint URL");
  }

  std::string name() const override { return "live:" + params_.endpoint; }

 protected:
  RawGeneration generate_impl(const GenerationRequest& request) override {
    InFlightSlot slot(*this);

    json body;
    body["model"] = request.model;
    body["prompt"] = request.prompt;
    body["temperature"] = request.temperature;
    body["seed"] = request.seed;
    body["stop"] = request.stop;
    body["max_tokens"] = request.max_tokens;
    const std::string payload = body.dump();

    httplib::Headers headers;
    if (!params_.api_key.empty())
      headers.emplace("Authorization", "Bearer " + params_.api_key);

    const auto start = std::chrono::steady_clock::now();
    std::string last_error;
    for (int attempt = 0; attempt < params_.retries; ++attempt) {
      if (attempt > 0) {
        std::this_thread::sleep_for(
            std::chrono::milliseconds(params_.backoff_ms << (attempt - 1)));
      }
      httplib::Client client(params_.endpoint);
      client.set_connection_timeout(params_.timeout_ms / 1000,
                                    (params_.timeout_ms % 1000) * 1000);
      client.set_read_timeout(params_.timeout_ms / 1000,
                              (params_.timeout_ms % 1000) * 1000);
      auto res = client.Post(params_.path, headers, payload, "application/json");
      if (!res) {
        if (res.error() == httplib::Error::ConnectionTimeout ||
            res.error() == httplib::Error::Read ||
            res.error() == httplib::Error::Write) {
          last_error = "timeout talking to " + params_.endpoint;
          if (attempt + 1 == params_.retries)
            throw GatewayError(GatewayError::Kind::timeout, last_error);
        } else {
          last_error = "transport error talking to " + params_.endpoint + ": " +
                       httplib::to_string(res.error());
          if (attempt + 1 == params_.retries)
            throw GatewayError(GatewayError::Kind::transport, last_error);
        }
        continue;
      }
      if (res->status == 401 || res->status == 403)
        throw GatewayError(GatewayError::Kind::auth,
                           "authentication rejected (HTTP " +
                               std::to_string(res->status) + ")");
      if (res->status >= 500 || res->status == 429) {
        last_error = "HTTP " + std::to_string(res->status) + " from endpoint";
        if (attempt + 1 == params_.retries)
          throw GatewayError(GatewayError::Kind::transport, last_error);
        continue;
      }
      if (res->status != 200)
        throw GatewayError(GatewayError::Kind::transport,
                           "HTTP " + std::to_string(res->status) + ": " + res->body);
      return parse_response(res->body, request, start);
    }
    throw GatewayError(GatewayError::Kind::transport, last_error);
  }

 private:
  struct InFlightSlot {
    explicit InFlightSlot(LiveBackend& owner) : owner_(owner) {
      std::unique_lock lock(owner_.mutex_);
      owner_.slot_free_.wait(lock, [&] {
        return owner_.in_flight_ < owner_.params_.max_in_flight;
      });
      ++owner_.in_flight_;
    }
    ~InFlightSlot() {
      {
        std::scoped_lock lock(owner_.mutex_);
        --owner_.in_flight_;
      }
      owner_.slot_free_.notify_one();
    }
    LiveBackend& owner_;
  };

  RawGeneration parse_response(
      const std::string& body, const GenerationRequest& request,
      std::chrono::steady_clock::time_point start) const {
    json doc;
    try {
      doc = json::parse(body);
    } catch (const json::exception& e) {
      throw GatewayError(GatewayError::Kind::transport,
                         std::string("unparseable response body: ") + e.what());
    }
    if (!doc.contains("choices") || doc["choices"].empty())
      throw GatewayError(GatewayError::Kind::transport,
                         "response has no choices array");
    const auto& choice = doc["choices"][0];

    RawGeneration out;
    out.finish_reason = FinishReason::length;
    const std::string finish = choice.value("finish_reason", "stop");
    if (finish == "stop") out.finish_reason = FinishReason::stop;
    out.text = truncate_at_stop(choice.value("text", ""), request.stop,
                                &out.finish_reason);
    out.latency = std::chrono::duration_cast<std::chrono::milliseconds>(
        std::chrono::steady_clock::now() - start);
    out.backend = name();
    out.seed_forwarded = true;  // always sent on the wire
    return out;
  }

  LiveParams params_;
  std::mutex mutex_;
  std::condition_variable slot_free_;
  int in_flight_ = 0;
};

}  // namespace

std::string to_string(FinishReason reason) {
  switch (reason) {
    case FinishReason::stop: return "stop";
    case FinishReason::length: return "length";
    default: return "error";
  }
}

std::string to_string(BackendKind kind) {
  switch (kind) {
    case BackendKind::live: return "live";
    case BackendKind::replay_gold: return "replay_gold";
    case BackendKind::scripted: return "scripted";
    default: return "perturb";
  }
}

std::optional<BackendKind> parse_backend_kind(std::string_view text) {
  if (text == "live") return BackendKind::live;
  if (text == "replay_gold") return BackendKind::replay_gold;
  if (text == "scripted") return BackendKind::scripted;
  if (text == "perturb") return BackendKind::perturb;
  return std::nullopt;
}

std::shared_ptr<Backend> make_backend(const BackendConfig& config,
                                      const std::vector<Example>* corpus) {
  switch (config.kind) {
    case BackendKind::live: {
      LiveParams params;
      params.endpoint = config.params.value("endpoint", "");
      params.path = config.params.value("path", params.path);
      params.api_key = config.params.value("api_key", "");
      const std::string key_env = config.params.value("api_key_env", "ABSA_API_KEY");
      if (const char* env = std::getenv(key_env.c_str()); env && *env)
        params.api_key = env;  // environment overrides the config file
      params.timeout_ms = config.params.value("timeout_ms", params.timeout_ms);
      params.retries = config.params.value("retries", params.retries);
      params.backoff_ms = config.params.value("backoff_ms", params.backoff_ms);
      params.max_in_flight = config.params.value("max_in_flight", params.max_in_flight);
      if (params.retries < 1 || params.max_in_flight < 1)
        throw GatewayError(GatewayError::Kind::config,
                           "retries and max_in_flight must be >= 1");
      return std::make_shared<LiveBackend>(std::move(params));
    }
    case BackendKind::replay_gold: {
      if (!corpus)
        throw GatewayError(GatewayError::Kind::config,
                           "replay_gold backend needs a corpus");
      return std::make_shared<ReplayGoldBackend>(*corpus);
    }
    case BackendKind::scripted: {
      std::vector<ScriptedResponse> script;
      for (const auto& entry : config.params.value("script", nlohmann::json::array())) {
        ScriptedResponse response;
        response.text = entry.value("text", "");
        response.finish_reason = entry.value("finish", "stop") == "length"
                                     ? FinishReason::length
                                     : FinishReason::stop;
        script.push_back(std::move(response));
      }
      return std::make_shared<ScriptedBackend>(std::move(script));
    }
    case BackendKind::perturb: {
      if (!corpus)
        throw GatewayError(GatewayError::Kind::config,
                           "perturb backend needs a corpus");
      if (!config.params.contains("rate"))
        throw GatewayError(GatewayError::Kind::config,
                           "perturb backend needs a corruption rate");
      const double rate = config.params["rate"].get<double>();
      if (rate < 0.0 || rate > 1.0)
        throw GatewayError(GatewayError::Kind::config,
                           "corruption rate must be in [0, 1]");
      const auto seed = config.params.value("perturb_seed", std::uint64_t{0});
      return std::make_shared<PerturbBackend>(*corpus, rate, seed);
    }
  }
  throw GatewayError(GatewayError::Kind::config, "unknown backend kind");
}

std::shared_ptr<Backend> make_scripted_backend(std::vector<ScriptedResponse> script) {
  return std::make_shared<ScriptedBackend>(std::move(script));
}

}  // namespace absa
