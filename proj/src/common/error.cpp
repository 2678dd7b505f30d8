#include "common/error.hpp"

#include <atomic>
#include <iostream>

namespace sparsym {

namespace {

void stderr_sink(const std::string& message) {
  std::cerr << "warning: " << message << '\n';
}

std::atomic<WarningSink> g_sink{&stderr_sink};

}  // namespace

const char* to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::InvalidArgument: return "invalid_argument";
    case ErrorCode::Config: return "config_error";
    case ErrorCode::Io: return "io_error";
    case ErrorCode::Parse: return "parse_error";
    case ErrorCode::Shape: return "shape_error";
    case ErrorCode::Numeric: return "numeric_error";
    case ErrorCode::Runtime: return "runtime_error";
  }
  return "unknown";
}

void fail(ErrorCode code, const std::string& message) { throw Error(code, message); }

void set_warning_sink(WarningSink sink) { g_sink.store(sink ? sink : &stderr_sink); }

void warn(const std::string& message) { g_sink.load()(message); }

}  // namespace sparsym
