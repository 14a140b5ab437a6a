#include "rktomo/error.hpp"

#include <iostream>
#include <mutex>

namespace rktomo {

const char* error_code_name(ErrorCode code) {
  switch (code) {
    case ErrorCode::Domain: return "domain";
    case ErrorCode::Config: return "config";
    case ErrorCode::Schema: return "schema";
    case ErrorCode::Data: return "data";
    case ErrorCode::Degenerate: return "degenerate";
    case ErrorCode::Coverage: return "coverage";
    case ErrorCode::Contract: return "contract";
    case ErrorCode::NotFound: return "not-found";
    case ErrorCode::Io: return "io";
    case ErrorCode::Internal: return "internal";
  }
  return "unknown";
}

void fail(ErrorCode code, const std::string& what) { throw Error(code, what); }

namespace {
std::mutex g_warn_mutex;
WarningHandler g_warn_handler;
}  // namespace

void set_warning_handler(WarningHandler handler) {
  std::lock_guard lock(g_warn_mutex);
  g_warn_handler = std::move(handler);
}

void warn(const std::string& message) {
  std::lock_guard lock(g_warn_mutex);
  if (g_warn_handler) {
    g_warn_handler(message);
  } else {
    std::cerr << "warning: " << message << '\n';
  }
}

}  // namespace rktomo
