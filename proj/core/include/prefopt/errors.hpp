#pragma once

#include <stdexcept>
#include <string>

namespace prefopt {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Non-finite values in a forward pass, a loss, or an objective.
class NumericError : public Error {
 public:
  using Error::Error;
};

class ConfigError : public Error {
 public:
  ConfigError(std::string key, int line, const std::string& message)
      : Error(message), key_(std::move(key)), line_(line) {}

  const std::string& key() const noexcept { return key_; }
  // 0 when the error did not come from a file line (e.g. a --set override).
  int line() const noexcept { return line_; }

 private:
  std::string key_;
  int line_ = 0;
};

}  // namespace prefopt
