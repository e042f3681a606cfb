#include "cltb/error.hpp"

namespace cltb {

const char* to_string(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::invalid_input: return "invalid-input";
    case ErrorCode::linear_dependence: return "linear-dependence";
    case ErrorCode::unsupported_dimension: return "unsupported-dimension";
    case ErrorCode::missing_moments: return "missing-moments";
    case ErrorCode::invalid_moments: return "invalid-moments";
    case ErrorCode::wrong_pair_kind: return "wrong-pair-kind";
    case ErrorCode::unsupported: return "unsupported";
    case ErrorCode::config: return "config";
    case ErrorCode::io: return "io";
  }
  return "unknown";
}

}  // namespace cltb
