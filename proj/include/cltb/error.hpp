#pragma once

#include <stdexcept>
#include <string>

namespace cltb {

/// Failure categories surfaced by the core. The numeric values are mirrored
/// one-to-one by `cltb_status` in the C API.
enum class ErrorCode : int {
  invalid_input = 1,
  linear_dependence = 2,
  unsupported_dimension = 3,
  missing_moments = 4,
  invalid_moments = 5,
  wrong_pair_kind = 6,
  unsupported = 7,
  config = 8,
  io = 9,
};

const char* to_string(ErrorCode code) noexcept;

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

inline void require(bool ok, ErrorCode code, const std::string& what) {
  if (!ok) fail(code, what);
}

}  // namespace cltb
