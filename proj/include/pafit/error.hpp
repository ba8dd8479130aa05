#pragma once

#include <stdexcept>
#include <string>

namespace pafit {

/// Failure categories shared by the C++ core and the C API status codes.
enum class ErrorCode {
  invalid_argument,  // bad parameter value (a <= 0, n = 0, ...)
  structure,         // malformed growth history
  labeling,          // memberships missing or inconsistent
  dimension,         // K mismatch between statistics and parameters
  parse,             // malformed input file
  io,                // unreadable / unwritable file
  config,            // JSON config violates its schema
  degenerate_data,   // data carries no information (e.g. n < 2 for BO)
  empty_data,        // no records
  nonconvergence,    // iterative solver failed
  size_guard,        // brute-force enumeration too large
};

const char* error_code_name(ErrorCode code) noexcept;

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what) : std::runtime_error(what), code_(code) {}
  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

/// Config schema violation; `path` is a JSON-pointer-like field path ("/sample_sizes/2").
class ConfigError : public Error {
 public:
  ConfigError(std::string path, const std::string& what)
      : Error(ErrorCode::config, path + ": " + what), path_(std::move(path)) {}
  const std::string& path() const noexcept { return path_; }

 private:
  std::string path_;
};

[[noreturn]] inline void fail(ErrorCode code, const std::string& what) { throw Error(code, what); }

inline void require(bool cond, ErrorCode code, const std::string& what) {
  if (!cond) fail(code, what);
}

}  // namespace pafit
