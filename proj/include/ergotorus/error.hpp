#pragma once

#include <stdexcept>
#include <string>

namespace ergotorus {

enum class ErrorCode {
  kDimensionMismatch,
  kInvalidArgument,
  kBudgetExceeded,
  kOverflow,
  kValidation,
  kDegenerate,
};

/// Structured error carrying a category and, for config validation, the
/// offending key.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message, std::string key = {})
      : std::runtime_error(message), code_(code), key_(std::move(key)) {}

  ErrorCode code() const noexcept { return code_; }
  const std::string& key() const noexcept { return key_; }

 private:
  ErrorCode code_;
  std::string key_;
};

inline void require_same_dim(std::size_t a, std::size_t b, const char* what) {
  if (a != b) {
    throw Error(ErrorCode::kDimensionMismatch,
                std::string(what) + ": dimension mismatch (" +
                    std::to_string(a) + " vs " + std::to_string(b) + ")");
  }
}

}  // namespace ergotorus
