#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "rome/encoder.hpp"

namespace rome {

using EncoderObjective = std::function<double(const Matrix& g_tilde)>;
using EncoderGradient = std::function<Matrix(const Matrix& g_tilde)>;
using EvalHook = std::function<double(const Encoder&)>;

/// ∂/∂G of Tr(G̃ᵀ M_w G̃) with G̃ = G·Σ_sig^{1/2}: 2·M_w·G̃·Σ_sig^{1/2}.
Matrix grad_objective_analytic(const MemoryOperator& op, const Encoder& enc);

/// Central differences, one entry at a time.
Matrix finite_difference_gradient(const EncoderObjective& objective, const Matrix& g, double h);

/// Exact single-delay corr² of the linear reservoir x' = Wx + Gu + σ·η under
/// white input, as a function of the whitened encoder: the quantity the
/// OLS-readout prediction error is monotone in. Uses the driven covariance,
/// so it is the "trained-through" objective rather than the fixed-metric one.
EncoderObjective exact_linear_memory_objective(const Matrix& w, double noise_sigma, int k);

struct AscentRecord {
  int step = 0;
  double alignment = 0.0;
  double objective = 0.0;
  std::optional<double> r2;
  std::string encoder_hash;
};

struct AscentTrace {
  std::vector<AscentRecord> records;
  Encoder final_encoder;
  bool converged = false;
};

struct AscentOptions {
  /// Step size; 0 selects 0.1/λ1 for the analytic objective.
  double eta = 0.0;
  int steps = 500;
  int eval_every = 10;
};

/// G̃ ← √P·(G̃ + η∇J)/‖G̃ + η∇J‖ in whitened coordinates, recording the
/// alignment with `reference` each step and `hook` every eval_every steps.
/// Stops early once alignment moves less than 1e-8 over 50 steps; throws
/// StepSize after 20 consecutive objective decreases.
AscentTrace projected_gradient_ascent(const MemoryOperator& op, const Encoder& enc0, double power,
                                      const AscentOptions& opt, const Encoder& reference, const EvalHook& hook = {});

/// Same iteration for an arbitrary objective and gradient (e.g. the exact
/// corr² objective with finite-difference gradients).
AscentTrace projected_gradient_ascent(const EncoderObjective& objective, const EncoderGradient& gradient,
                                      const Encoder& enc0, double power, const AscentOptions& opt,
                                      const Encoder& reference, const EvalHook& hook = {});

std::string encoder_fingerprint(const Matrix& g);

}  // namespace rome
