#pragma once

#include <cstdint>
#include <filesystem>
#include <mutex>
#include <optional>
#include <string>

namespace semtrig {

struct CachedResponse {
  std::string response;
  std::int64_t latency_ms = 0;
};

// Append-only directory of `<sha256>.json` records. Existing records are
// never rewritten.
class ResponseCache {
public:
  explicit ResponseCache(std::filesystem::path dir);

  std::optional<CachedResponse> lookup(const std::string& key) const;
  void store(const std::string& key, const std::string& model, const CachedResponse& value);
  const std::filesystem::path& dir() const noexcept { return dir_; }

private:
  std::filesystem::path path_for(const std::string& key) const;

  std::filesystem::path dir_;
  std::mutex write_mutex_;
};

}  // namespace semtrig
