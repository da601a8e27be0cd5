#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace rome {

enum class ErrorKind {
  Dimension,
  InvalidInput,
  Divergence,
  Convergence,
  Singular,
  InsufficientData,
  UndefinedTarget,
  Config,
  NumericalBlowup,
  UnstableTask,
  DegeneratePlane,
  StepSize,
  Io,
};

std::string_view to_string(ErrorKind kind);

// Single exception type for the library. The kind selects the CLI exit code
// (config errors exit 2, everything numerical exits 3).
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

  bool is_config() const noexcept {
    return kind_ == ErrorKind::Config || kind_ == ErrorKind::Io;
  }

 private:
  ErrorKind kind_;
};

// Non-fatal diagnostics go to stderr and are also collected on the result
// objects that produced them.
void warn(std::string_view message);

}  // namespace rome
