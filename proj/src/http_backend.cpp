#define CPPHTTPLIB_OPENSSL_SUPPORT
#include "httplib.h"

#include "semtrig/http_backend.hpp"

#include <chrono>
#include <cstdlib>
#include <thread>

#include "semtrig/digest.hpp"

namespace semtrig {

std::string image_mime_type(const std::vector<std::uint8_t>& bytes) {
  if (bytes.size() >= 3 && bytes[0] == 0xFF && bytes[1] == 0xD8) return "image/jpeg";
  return "image/png";
}

json build_chat_request(const BackendRequest& req) {
  json messages = json::array();
  if (req.request.system_prompt) {
    messages.push_back({{"role", "system"}, {"content", *req.request.system_prompt}});
  }
  json content = json::array();
  if (!req.image_bytes.empty()) {
    content.push_back({{"type", "image_url"},
                       {"image_url",
                        {{"url", "data:" + image_mime_type(req.image_bytes) + ";base64," +
                                     base64_encode(req.image_bytes)}}}});
  }
  content.push_back({{"type", "text"}, {"text", req.request.prompt}});
  messages.push_back({{"role", "user"}, {"content", std::move(content)}});
  return json{{"model", req.handle.endpoint.model},
              {"messages", std::move(messages)},
              {"temperature", req.handle.decoding.temperature},
              {"top_p", 1.0},
              {"n", 1},
              {"max_tokens", req.handle.decoding.max_tokens},
              {"stream", false}};
}

std::string parse_chat_response(const std::string& body) {
  json j;
  try {
    j = json::parse(body);
  } catch (const json::parse_error& e) {
    throw Error(Errc::endpoint, std::string("response is not JSON: ") + e.what());
  }
  try {
    const auto& content = j.at("choices").at(0).at("message").at("content");
    if (content.is_string()) return content.get<std::string>();
    // Some servers return content parts.
    std::string out;
    for (const auto& part : content) {
      if (part.value("type", "") == "text") out += part.at("text").get<std::string>();
    }
    return out;
  } catch (const json::exception& e) {
    throw Error(Errc::endpoint, std::string("unexpected response shape: ") + e.what());
  }
}

ParsedUri parse_base_uri(const std::string& uri) {
  const auto scheme_end = uri.find("://");
  if (scheme_end == std::string::npos) throw Error(Errc::input, "base URI lacks a scheme: " + uri);
  const auto path_start = uri.find('/', scheme_end + 3);
  ParsedUri out;
  if (path_start == std::string::npos) {
    out.scheme_host_port = uri;
  } else {
    out.scheme_host_port = uri.substr(0, path_start);
    out.path_prefix = uri.substr(path_start);
  }
  while (!out.path_prefix.empty() && out.path_prefix.back() == '/') out.path_prefix.pop_back();
  return out;
}

namespace {

bool retryable_status(int status) { return status == 408 || status == 429 || status >= 500; }

std::string excerpt(const std::string& body) {
  return body.size() <= 200 ? body : body.substr(0, 200) + "...";
}

}  // namespace

std::string HttpChatBackend::respond(const BackendRequest& req) {
  const auto& ep = req.handle.endpoint;
  const auto uri = parse_base_uri(ep.base_uri);
  const auto body = build_chat_request(req).dump();

  httplib::Headers headers;
  if (!ep.auth_env.empty()) {
    if (const char* token = std::getenv(ep.auth_env.c_str())) {
      headers.emplace("Authorization", std::string("Bearer ") + token);
    }
  }

  std::string last_error;
  for (int attempt = 0; attempt <= ep.max_retries; ++attempt) {
    if (attempt > 0) {
      std::this_thread::sleep_for(std::chrono::milliseconds(ep.retry_backoff_ms << (attempt - 1)));
    }
    httplib::Client client(uri.scheme_host_port);
    const auto timeout = std::chrono::milliseconds(ep.timeout_ms);
    client.set_connection_timeout(timeout);
    client.set_read_timeout(timeout);
    client.set_write_timeout(timeout);
    auto res = client.Post(uri.path_prefix + "/chat/completions", headers, body, "application/json");
    if (!res) {
      last_error = "request to " + ep.base_uri + " failed: " + httplib::to_string(res.error());
      continue;
    }
    if (res->status >= 200 && res->status < 300) return parse_chat_response(res->body);
    if (!retryable_status(res->status)) {
      throw Error(Errc::endpoint,
                  "HTTP " + std::to_string(res->status) + " from " + ep.base_uri + ": " + excerpt(res->body));
    }
    last_error = "HTTP " + std::to_string(res->status) + ": " + excerpt(res->body);
  }
  if (last_error.rfind("HTTP ", 0) == 0) {
    throw Error(Errc::endpoint, last_error + " (after " + std::to_string(ep.max_retries) + " retries)");
  }
  throw Error(Errc::transport, last_error + " (after " + std::to_string(ep.max_retries) + " retries)");
}

}  // namespace semtrig
