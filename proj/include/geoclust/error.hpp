#pragma once

#include <stdexcept>
#include <string>

namespace geoclust {

enum class ErrorCode {
  invalid_argument,
  invalid_dimension,
  invalid_domain,
  underdetermined,
  rank_deficient,
  no_pairs,
  insufficient_data,
  fit_failure,
  invalid_partition,
  simulation_failure,
  parse_error,
  io_error,
};

const char* to_string(ErrorCode code) noexcept;

/// Single exception type for the library; `code()` tells callers which
/// contract was violated.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

[[noreturn]] inline void fail(ErrorCode code, const std::string& what) {
  throw Error(code, what);
}

inline void require(bool cond, ErrorCode code, const std::string& what) {
  if (!cond) fail(code, what);
}

}  // namespace geoclust
