#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include "semtrig/error.hpp"
#include "semtrig/jsonl.hpp"
#include "semtrig/keyvalue_config.hpp"
#include "semtrig/templates.hpp"

namespace semtrig {

enum class ModelKind { http_endpoint, mock_rules, mock_backdoored };

std::string_view to_string(ModelKind k);
ModelKind parse_model_kind(std::string_view s);

struct EndpointConfig {
  std::string base_uri;             // e.g. http://localhost:8000/v1
  std::string auth_env;             // env var holding the bearer token; empty = none
  std::string model;                // model identifier sent on the wire
  int timeout_ms = 60000;
  int max_retries = 2;
  int retry_backoff_ms = 250;
};

// Greedy decoding everywhere; only the token budget is adjustable.
struct DecodingParams {
  double temperature = 0.0;
  int max_tokens = 64;
  bool operator==(const DecodingParams&) const = default;
};

struct ModelHandle {
  std::string name;
  ModelKind kind = ModelKind::mock_rules;
  EndpointConfig endpoint;                 // http-endpoint
  std::filesystem::path mock_config;       // mock kinds: JSON rule table
  DecodingParams decoding;
};

struct QueryRequest {
  std::string sample_id;
  std::string image_ref;  // empty for text-only (template LLM) calls
  std::string prompt;
  std::optional<std::string> system_prompt;
};

struct Transcript {
  std::string sample_id;
  std::string prompt;
  std::optional<std::string> system_prompt;
  std::string image_ref;
  std::string response;
  std::int64_t latency_ms = 0;
  bool from_cache = false;
  bool operator==(const Transcript&) const = default;
};

json transcript_to_json(const Transcript& t);
Transcript transcript_from_json(const json& j);

// What a backend sees for one call.
struct BackendRequest {
  const ModelHandle& handle;
  const QueryRequest& request;
  const std::vector<std::uint8_t>& image_bytes;  // empty when text-only
};

class ModelBackend {
public:
  virtual ~ModelBackend() = default;
  // Must be safe to call concurrently.
  virtual std::string respond(const BackendRequest& request) = 0;
  // Real wall time is only recorded for network backends; mocks report 0
  // so transcripts stay reproducible.
  virtual bool measures_latency() const { return false; }
};

class ResponseCache;

struct BatchItem {
  std::optional<Transcript> transcript;
  std::optional<Errc> error_code;
  std::string error;
  bool ok() const noexcept { return transcript.has_value(); }
};

class Gateway {
public:
  explicit Gateway(std::optional<std::filesystem::path> cache_dir = std::nullopt);
  ~Gateway();
  Gateway(const Gateway&) = delete;
  Gateway& operator=(const Gateway&) = delete;

  // Builds the backend from the handle kind.
  void add(ModelHandle handle);
  // Registers a caller-supplied backend (test doubles, alternate dialects).
  void add(ModelHandle handle, std::shared_ptr<ModelBackend> backend);

  bool has(const std::string& name) const;
  const ModelHandle& handle(const std::string& name) const;
  std::vector<std::string> model_names() const;  // registration order

  Transcript query(const std::string& model, const QueryRequest& request);

  // Output position i always answers requests[i]; failures are reported in
  // place. At most max_in_flight calls run at once.
  std::vector<BatchItem> query_batch(const std::string& model,
                                     const std::vector<QueryRequest>& requests,
                                     std::size_t max_in_flight);

  // `[model.NAME]` sections of an endpoint config file, in file order.
  void load_models(const KeyValueConfig& config, const std::filesystem::path& base_dir = {});

  static std::string cache_key(const ModelHandle& handle, const std::string& image_digest,
                               const QueryRequest& request);

private:
  struct Entry {
    ModelHandle handle;
    std::shared_ptr<ModelBackend> backend;
  };
  const Entry& entry(const std::string& name) const;

  std::map<std::string, Entry> models_;
  std::vector<std::string> order_;
  std::unique_ptr<ResponseCache> cache_;
};

// Adapts a gateway model to the text-only interface used for templating.
class GatewayLlm : public TemplateLlm {
public:
  GatewayLlm(Gateway& gateway, std::string model) : gateway_(gateway), model_(std::move(model)) {}
  std::string complete(const std::string& prompt) override;

private:
  Gateway& gateway_;
  std::string model_;
};

ModelHandle parse_model_section(const std::string& name, const KeyValueConfig& config,
                                const std::string& section, const std::filesystem::path& base_dir);

}  // namespace semtrig
