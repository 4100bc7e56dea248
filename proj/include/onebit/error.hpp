#pragma once

#include <stdexcept>
#include <string>

namespace onebit {

// Bad user-supplied configuration (unknown keys, out-of-range values).
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// A numerical routine failed to produce a trustworthy result.
class NumericalError : public std::runtime_error {
 public:
  NumericalError(std::string module, std::string operation, const std::string& what)
      : std::runtime_error(module + "::" + operation + ": " + what),
        module_(std::move(module)),
        operation_(std::move(operation)) {}

  const std::string& module() const noexcept { return module_; }
  const std::string& operation() const noexcept { return operation_; }

 private:
  std::string module_;
  std::string operation_;
};

class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace onebit
