#include "semtrig/error.hpp"

namespace semtrig {

std::string_view to_string(Errc code) {
  switch (code) {
    case Errc::parse: return "parse error";
    case Errc::join: return "join error";
    case Errc::size: return "size error";
    case Errc::input: return "input error";
    case Errc::io: return "I/O error";
    case Errc::transport: return "transport error";
    case Errc::endpoint: return "endpoint error";
    case Errc::validation: return "validation error";
    case Errc::contract: return "contract error";
    case Errc::no_region: return "no-region error";
    case Errc::filtering: return "filtering error";
    case Errc::edit: return "edit error";
    case Errc::exhausted: return "pool exhausted";
    case Errc::export_failure: return "export error";
    case Errc::undefined_metric: return "undefined metric";
    case Errc::usage: return "usage error";
  }
  return "error";
}

Error::Error(Errc code, const std::string& message)
    : std::runtime_error(std::string(to_string(code)) + ": " + message), code_(code) {}

}  // namespace semtrig
