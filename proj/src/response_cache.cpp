#include "semtrig/response_cache.hpp"

#include "semtrig/digest.hpp"
#include "semtrig/error.hpp"
#include "semtrig/jsonl.hpp"

namespace semtrig {

ResponseCache::ResponseCache(std::filesystem::path dir) : dir_(std::move(dir)) {
  std::error_code ec;
  std::filesystem::create_directories(dir_, ec);
  if (ec) throw Error(Errc::io, "cannot create cache directory " + dir_.string());
}

std::filesystem::path ResponseCache::path_for(const std::string& key) const {
  return dir_ / (key + ".json");
}

std::optional<CachedResponse> ResponseCache::lookup(const std::string& key) const {
  const auto path = path_for(key);
  if (!std::filesystem::exists(path)) return std::nullopt;
  const auto j = read_json(path);
  return CachedResponse{j.at("response").get<std::string>(), j.value("latency_ms", std::int64_t{0})};
}

void ResponseCache::store(const std::string& key, const std::string& model,
                          const CachedResponse& value) {
  std::lock_guard lock(write_mutex_);
  const auto path = path_for(key);
  if (std::filesystem::exists(path)) return;
  write_json(path, json{{"key", key},
                        {"model", model},
                        {"response", value.response},
                        {"latency_ms", value.latency_ms}});
}

}  // namespace semtrig
