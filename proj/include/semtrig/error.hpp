#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace semtrig {

enum class Errc {
  parse,
  join,
  size,
  input,
  io,
  transport,
  endpoint,
  validation,
  contract,
  no_region,
  filtering,
  edit,
  exhausted,
  export_failure,
  undefined_metric,
  usage,
};

std::string_view to_string(Errc code);

// Every operational failure in the library is reported through this type.
class Error : public std::runtime_error {
public:
  Error(Errc code, const std::string& message);

  Errc code() const noexcept { return code_; }

private:
  Errc code_;
};

}  // namespace semtrig
