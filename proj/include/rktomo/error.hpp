#pragma once

#include <functional>
#include <stdexcept>
#include <string>
#include <string_view>

namespace rktomo {

enum class ErrorCode {
  Domain = 1,
  Config,
  Schema,
  Data,
  Degenerate,
  Coverage,
  Contract,
  NotFound,
  Io,
  Internal,
};

const char* error_code_name(ErrorCode code);

/// All library failures are reported through this type.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(what), code_(code) {}
  ErrorCode code() const { return code_; }

 private:
  ErrorCode code_;
};

[[noreturn]] void fail(ErrorCode code, const std::string& what);

// Non-fatal diagnostics. The default handler writes to stderr.
using WarningHandler = std::function<void(std::string_view)>;
void set_warning_handler(WarningHandler handler);
void warn(const std::string& message);

}  // namespace rktomo
