#pragma once

#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace parity_forge {

enum class ErrorKind {
  usage,
  config,
  io,
  schema,
  type,
  validation,
  role,
  lookup,
  insufficient_data,
  contract,
  domain,
  convergence,
  divergence,
  degenerate,
  zero_mass,
  propagation,
  undefined,
};

std::string_view to_string(ErrorKind kind);

// Process exit code for an error kind: 2 config, 3 data, 4 numeric.
int exit_code(ErrorKind kind);

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message)
      : std::runtime_error(message), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

// Raised when an optimizer exhausts its iteration budget. Carries the last
// iterate so callers can inspect or warm-start from it.
class ConvergenceError : public Error {
 public:
  ConvergenceError(const std::string& message, std::vector<double> last_iterate,
                   double gradient_norm)
      : Error(ErrorKind::convergence, message),
        last_iterate_(std::move(last_iterate)),
        gradient_norm_(gradient_norm) {}

  const std::vector<double>& last_iterate() const noexcept {
    return last_iterate_;
  }
  double gradient_norm() const noexcept { return gradient_norm_; }

 private:
  std::vector<double> last_iterate_;
  double gradient_norm_;
};

}  // namespace parity_forge
