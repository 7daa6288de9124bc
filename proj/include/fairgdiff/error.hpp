#pragma once

#include <stdexcept>
#include <string>

namespace fairgdiff {

// Error categories map 1:1 onto CLI exit codes.
enum class ErrorCode {
  config = 2,
  data = 3,
  divergence = 4,
  precondition = 5,
};

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(what), code_(code) {}

  ErrorCode code() const { return code_; }
  int exit_code() const { return static_cast<int>(code_); }

 private:
  ErrorCode code_;
};

inline Error config_error(const std::string& what) {
  return Error(ErrorCode::config, what);
}
inline Error data_error(const std::string& what) {
  return Error(ErrorCode::data, what);
}
inline Error divergence_error(const std::string& what) {
  return Error(ErrorCode::divergence, what);
}
inline Error precondition_error(const std::string& what) {
  return Error(ErrorCode::precondition, what);
}

}  // namespace fairgdiff
