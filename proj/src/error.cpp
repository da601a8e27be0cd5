#include "rome/error.hpp"

#include <iostream>

namespace rome {

std::string_view to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::Dimension: return "dimension";
    case ErrorKind::InvalidInput: return "invalid-input";
    case ErrorKind::Divergence: return "divergence";
    case ErrorKind::Convergence: return "convergence";
    case ErrorKind::Singular: return "singular";
    case ErrorKind::InsufficientData: return "insufficient-data";
    case ErrorKind::UndefinedTarget: return "undefined-target";
    case ErrorKind::Config: return "config";
    case ErrorKind::NumericalBlowup: return "numerical-blowup";
    case ErrorKind::UnstableTask: return "unstable-task";
    case ErrorKind::DegeneratePlane: return "degenerate-plane";
    case ErrorKind::StepSize: return "step-size";
    case ErrorKind::Io: return "io";
  }
  return "unknown";
}

void warn(std::string_view message) {
  std::cerr << "warning: " << message << '\n';
}

}  // namespace rome
