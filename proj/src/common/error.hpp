#pragma once

#include <stdexcept>
#include <string>

namespace sparsym {

enum class ErrorCode {
  InvalidArgument,
  Config,
  Io,
  Parse,
  Shape,
  Numeric,
  Runtime,
};

const char* to_string(ErrorCode code);

// Single exception type for the library. The code maps onto the C API status
// values and the CLI exit codes.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(message), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

[[noreturn]] void fail(ErrorCode code, const std::string& message);

// Diagnostics sink for non-fatal warnings (e.g. constant features during
// standardization). Defaults to stderr; tests may swap it.
using WarningSink = void (*)(const std::string&);
void set_warning_sink(WarningSink sink);
void warn(const std::string& message);

}  // namespace sparsym
