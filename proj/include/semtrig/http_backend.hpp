#pragma once

#include <string>

#include "semtrig/gateway.hpp"

namespace semtrig {

// Chat-completion dialect. The full request/response schema is documented
// in docs/wire-protocol.md; these two functions are its only definition.
json build_chat_request(const BackendRequest& request);
std::string parse_chat_response(const std::string& body);

// MIME type from image signature ("image/png", "image/jpeg").
std::string image_mime_type(const std::vector<std::uint8_t>& bytes);

struct ParsedUri {
  std::string scheme_host_port;  // "http://host:8000"
  std::string path_prefix;       // "/v1", no trailing slash
};
ParsedUri parse_base_uri(const std::string& uri);

class HttpChatBackend : public ModelBackend {
public:
  std::string respond(const BackendRequest& request) override;
  bool measures_latency() const override { return true; }
};

}  // namespace semtrig
