#include "semtrig/gateway.hpp"

#include <atomic>
#include <chrono>
#include <thread>

#include "semtrig/digest.hpp"
#include "semtrig/http_backend.hpp"
#include "semtrig/image.hpp"
#include "semtrig/mock_models.hpp"
#include "semtrig/response_cache.hpp"

namespace semtrig {

std::string_view to_string(ModelKind k) {
  switch (k) {
    case ModelKind::http_endpoint: return "http-endpoint";
    case ModelKind::mock_rules: return "mock-rules";
    case ModelKind::mock_backdoored: return "mock-backdoored";
  }
  return "mock-rules";
}

ModelKind parse_model_kind(std::string_view s) {
  if (s == "http-endpoint" || s == "http") return ModelKind::http_endpoint;
  if (s == "mock-rules") return ModelKind::mock_rules;
  if (s == "mock-backdoored") return ModelKind::mock_backdoored;
  throw Error(Errc::parse, "unknown model kind '" + std::string(s) + "'");
}

json transcript_to_json(const Transcript& t) {
  json j = {{"sample_id", t.sample_id},     {"prompt", t.prompt},
            {"image", t.image_ref},         {"response", t.response},
            {"latency_ms", t.latency_ms},   {"from_cache", t.from_cache}};
  j["system_prompt"] = t.system_prompt ? json(*t.system_prompt) : json(nullptr);
  return j;
}

Transcript transcript_from_json(const json& j) {
  Transcript t;
  t.sample_id = j.at("sample_id").get<std::string>();
  t.prompt = j.at("prompt").get<std::string>();
  t.image_ref = j.at("image").get<std::string>();
  t.response = j.at("response").get<std::string>();
  t.latency_ms = j.at("latency_ms").get<std::int64_t>();
  t.from_cache = j.at("from_cache").get<bool>();
  if (j.contains("system_prompt") && !j.at("system_prompt").is_null()) {
    t.system_prompt = j.at("system_prompt").get<std::string>();
  }
  return t;
}

Gateway::Gateway(std::optional<std::filesystem::path> cache_dir) {
  if (cache_dir) cache_ = std::make_unique<ResponseCache>(*cache_dir);
}

Gateway::~Gateway() = default;

void Gateway::add(ModelHandle handle) {
  std::shared_ptr<ModelBackend> backend;
  switch (handle.kind) {
    case ModelKind::http_endpoint:
      backend = std::make_shared<HttpChatBackend>();
      break;
    case ModelKind::mock_rules:
      backend = MockRulesBackend::load(handle.mock_config);
      break;
    case ModelKind::mock_backdoored:
      backend = MockBackdooredBackend::load(handle.mock_config);
      break;
  }
  add(std::move(handle), std::move(backend));
}

void Gateway::add(ModelHandle handle, std::shared_ptr<ModelBackend> backend) {
  if (handle.name.empty()) throw Error(Errc::input, "model handle needs a name");
  if (models_.count(handle.name)) throw Error(Errc::input, "duplicate model name '" + handle.name + "'");
  if (handle.kind == ModelKind::http_endpoint) {
    if (handle.endpoint.timeout_ms <= 0) {
      throw Error(Errc::input, "model '" + handle.name + "': timeout must be positive");
    }
    if (handle.endpoint.max_retries < 0) {
      throw Error(Errc::input, "model '" + handle.name + "': max_retries must be >= 0");
    }
  }
  if (handle.decoding.max_tokens <= 0) {
    throw Error(Errc::input, "model '" + handle.name + "': max_tokens must be positive");
  }
  order_.push_back(handle.name);
  auto name = handle.name;
  models_.emplace(std::move(name), Entry{std::move(handle), std::move(backend)});
}

bool Gateway::has(const std::string& name) const { return models_.count(name) != 0; }

const Gateway::Entry& Gateway::entry(const std::string& name) const {
  auto it = models_.find(name);
  if (it == models_.end()) throw Error(Errc::input, "unknown model '" + name + "'");
  return it->second;
}

const ModelHandle& Gateway::handle(const std::string& name) const { return entry(name).handle; }

std::vector<std::string> Gateway::model_names() const { return order_; }

std::string Gateway::cache_key(const ModelHandle& handle, const std::string& image_digest,
                               const QueryRequest& request) {
  const json key = {
      {"model", handle.name},
      {"image_sha256", image_digest},
      {"system_prompt", request.system_prompt ? json(*request.system_prompt) : json(nullptr)},
      {"prompt", request.prompt},
      {"decoding",
       {{"temperature", handle.decoding.temperature}, {"max_tokens", handle.decoding.max_tokens}}}};
  return sha256_hex(key.dump());
}

Transcript Gateway::query(const std::string& model, const QueryRequest& request) {
  const auto& e = entry(model);
  if (request.prompt.empty()) throw Error(Errc::input, "empty prompt");

  std::vector<std::uint8_t> bytes;
  std::string digest;
  if (!request.image_ref.empty()) {
    try {
      bytes = read_file_bytes(request.image_ref);
    } catch (const Error&) {
      throw Error(Errc::input, "cannot read image " + request.image_ref);
    }
    if (!is_decodable_image(bytes)) throw Error(Errc::input, "undecodable image " + request.image_ref);
    digest = sha256_hex(bytes);
  }

  Transcript t;
  t.sample_id = request.sample_id;
  t.prompt = request.prompt;
  t.system_prompt = request.system_prompt;
  t.image_ref = request.image_ref;

  std::string key;
  if (cache_) {
    key = cache_key(e.handle, digest, request);
    if (auto hit = cache_->lookup(key)) {
      t.response = hit->response;
      t.latency_ms = hit->latency_ms;
      t.from_cache = true;
      return t;
    }
  }

  const auto start = std::chrono::steady_clock::now();
  t.response = e.backend->respond(BackendRequest{e.handle, request, bytes});
  if (e.backend->measures_latency()) {
    t.latency_ms = std::chrono::duration_cast<std::chrono::milliseconds>(
                       std::chrono::steady_clock::now() - start)
                       .count();
  }
  if (cache_) cache_->store(key, e.handle.name, CachedResponse{t.response, t.latency_ms});
  return t;
}

std::vector<BatchItem> Gateway::query_batch(const std::string& model,
                                            const std::vector<QueryRequest>& requests,
                                            std::size_t max_in_flight) {
  if (max_in_flight < 1) throw Error(Errc::input, "max_in_flight must be at least 1");
  entry(model);
  std::vector<BatchItem> out(requests.size());
  if (requests.empty()) return out;

  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next.fetch_add(1); i < requests.size(); i = next.fetch_add(1)) {
      try {
        out[i].transcript = query(model, requests[i]);
      } catch (const Error& err) {
        out[i].error_code = err.code();
        out[i].error = err.what();
      } catch (const std::exception& err) {
        out[i].error_code = Errc::transport;
        out[i].error = err.what();
      }
    }
  };
  const auto workers = std::min(max_in_flight, requests.size());
  if (workers == 1) {
    worker();
    return out;
  }
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (std::size_t w = 0; w < workers; ++w) pool.emplace_back(worker);
  for (auto& th : pool) th.join();
  return out;
}

namespace {

std::filesystem::path resolve_path(const std::filesystem::path& base, const std::string& p) {
  std::filesystem::path path(p);
  return path.is_absolute() || base.empty() ? path : base / path;
}

}  // namespace

ModelHandle parse_model_section(const std::string& name, const KeyValueConfig& config,
                                const std::string& section, const std::filesystem::path& base_dir) {
  ModelHandle h;
  h.name = name;
  h.kind = parse_model_kind(config.get_string(section, "kind").value_or("http-endpoint"));
  if (auto v = config.get_int(section, "max_tokens")) h.decoding.max_tokens = static_cast<int>(*v);
  if (h.kind == ModelKind::http_endpoint) {
    auto uri = config.get_string(section, "base_uri");
    if (!uri) throw Error(Errc::parse, "[" + section + "] needs base_uri");
    h.endpoint.base_uri = *uri;
    h.endpoint.auth_env = config.get_string(section, "auth_env").value_or("");
    h.endpoint.model = config.get_string(section, "model").value_or(name);
    if (auto v = config.get_int(section, "timeout_ms")) h.endpoint.timeout_ms = static_cast<int>(*v);
    if (auto v = config.get_int(section, "max_retries")) h.endpoint.max_retries = static_cast<int>(*v);
    if (auto v = config.get_int(section, "retry_backoff_ms")) {
      h.endpoint.retry_backoff_ms = static_cast<int>(*v);
    }
  } else {
    auto rules = config.get_string(section, "rules");
    if (!rules) throw Error(Errc::parse, "[" + section + "] needs rules = \"<file.json>\"");
    h.mock_config = resolve_path(base_dir, *rules);
    if (!std::filesystem::exists(h.mock_config)) {
      throw Error(Errc::io, "[" + section + "] rules file not found: " + h.mock_config.string());
    }
  }
  return h;
}

void Gateway::load_models(const KeyValueConfig& config, const std::filesystem::path& base_dir) {
  for (const auto& section : config.section_names()) {
    if (section.rfind("model.", 0) != 0) continue;
    add(parse_model_section(section.substr(6), config, section, base_dir));
  }
}

std::string GatewayLlm::complete(const std::string& prompt) {
  return gateway_.query(model_, QueryRequest{"", "", prompt, std::nullopt}).response;
}

}  // namespace semtrig
