#include "geoclust/error.hpp"

namespace geoclust {

const char* to_string(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::invalid_argument: return "invalid-argument";
    case ErrorCode::invalid_dimension: return "invalid-dimension";
    case ErrorCode::invalid_domain: return "invalid-domain";
    case ErrorCode::underdetermined: return "underdetermined";
    case ErrorCode::rank_deficient: return "rank-deficient";
    case ErrorCode::no_pairs: return "no-pairs";
    case ErrorCode::insufficient_data: return "insufficient-data";
    case ErrorCode::fit_failure: return "fit-failure";
    case ErrorCode::invalid_partition: return "invalid-partition";
    case ErrorCode::simulation_failure: return "simulation-failure";
    case ErrorCode::parse_error: return "parse-error";
    case ErrorCode::io_error: return "io-error";
  }
  return "unknown";
}

}  // namespace geoclust
