#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace ecm {

/// Base of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class InvalidArgument : public Error {
 public:
  using Error::Error;
};

/// Element with a non-positive Jacobian somewhere in its quadrature.
class SingularElement : public Error {
 public:
  SingularElement(std::size_t element, double det)
      : Error("singular element " + std::to_string(element) +
              " (jacobian determinant " + std::to_string(det) + ")"),
        element_(element) {}
  std::size_t element() const noexcept { return element_; }

 private:
  std::size_t element_;
};

/// Ill-posed problem setup: no Dirichlet data, floating cathode, conflicting constraints.
class SetupError : public Error {
 public:
  using Error::Error;
};

/// Linear solve failed or did not reach the requested residual.
class NumericalError : public Error {
 public:
  NumericalError(const std::string& what, double residual)
      : Error(what + " (relative residual " + std::to_string(residual) + ")"),
        residual_(residual) {}
  double residual() const noexcept { return residual_; }

 private:
  double residual_;
};

class MeasurementError : public Error {
 public:
  using Error::Error;
};

/// Configuration file problem; carries the offending line (0 if unknown) and key.
class ConfigError : public Error {
 public:
  ConfigError(const std::string& what, std::size_t line = 0, std::string key = {})
      : Error(format(what, line, key)), line_(line), key_(std::move(key)) {}
  std::size_t line() const noexcept { return line_; }
  const std::string& key() const noexcept { return key_; }

 private:
  static std::string format(const std::string& what, std::size_t line, const std::string& key) {
    std::string out;
    if (line > 0) out += "line " + std::to_string(line) + ": ";
    if (!key.empty()) out += "'" + key + "': ";
    return out + what;
  }
  std::size_t line_;
  std::string key_;
};

}  // namespace ecm
