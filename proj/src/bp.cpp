#include "rome/bp.hpp"

#include <cmath>
#include <string_view>

#include <fmt/format.h>

#include "rome/error.hpp"
#include "rome/probe.hpp"
#include "rome/rng.hpp"

namespace rome {

Matrix grad_objective_analytic(const MemoryOperator& op, const Encoder& enc) {
  if (enc.n_in() != op.dim()) throw Error(ErrorKind::Dimension, "grad_objective_analytic: shape mismatch");
  return 2.0 * op.m * enc.whitened() * sym_sqrt(enc.input_cov);
}

Matrix finite_difference_gradient(const EncoderObjective& objective, const Matrix& g, double h) {
  if (!(h > 0.0)) throw Error(ErrorKind::InvalidInput, "finite_difference_gradient: h must be > 0");
  Matrix grad(g.rows(), g.cols());
  Matrix probe = g;
  for (Eigen::Index j = 0; j < g.cols(); ++j) {
    for (Eigen::Index i = 0; i < g.rows(); ++i) {
      probe(i, j) = g(i, j) + h;
      const double up = objective(probe);
      probe(i, j) = g(i, j) - h;
      const double down = objective(probe);
      probe(i, j) = g(i, j);
      grad(i, j) = (up - down) / (2.0 * h);
    }
  }
  return grad;
}

EncoderObjective exact_linear_memory_objective(const Matrix& w, double noise_sigma, int k) {
  const ResponseKernel kernel = analytic_response(w, k);
  const Matrix r = kernel.at(k);
  return [w, noise_sigma, r](const Matrix& g_tilde) {
    const Matrix sigma_x =
        analytic_driven_covariance(w, noise_sigma, g_tilde, Matrix::Identity(g_tilde.cols(), g_tilde.cols()));
    const Matrix rg = r * g_tilde;
    return (rg.transpose() * sigma_x.ldlt().solve(rg)).trace();
  };
}

std::string encoder_fingerprint(const Matrix& g) {
  const std::string_view bytes(reinterpret_cast<const char*>(g.data()), static_cast<std::size_t>(g.size()) * sizeof(double));
  return fmt::format("{:016x}", fnv1a64(bytes));
}

AscentTrace projected_gradient_ascent(const EncoderObjective& objective, const EncoderGradient& gradient,
                                      const Encoder& enc0, double power, const AscentOptions& opt,
                                      const Encoder& reference, const EvalHook& hook) {
  if (!(opt.eta > 0.0)) throw Error(ErrorKind::InvalidInput, "projected_gradient_ascent: eta must be > 0");
  if (!(power > 0.0)) throw Error(ErrorKind::InvalidInput, "projected_gradient_ascent: P must be > 0");
  Matrix g_tilde = enc0.whitened();
  if (!(g_tilde.norm() > 0.0)) throw Error(ErrorKind::InvalidInput, "projected_gradient_ascent: zero start encoder");
  g_tilde *= std::sqrt(power) / g_tilde.norm();

  AscentTrace trace;
  auto snapshot = [&](int step, double value) {
    Encoder enc = Encoder::from_whitened(g_tilde, enc0.input_cov);
    AscentRecord rec;
    rec.step = step;
    rec.alignment = alignment(enc, reference);
    rec.objective = value;
    if (hook && opt.eval_every > 0 && step % opt.eval_every == 0) rec.r2 = hook(enc);
    rec.encoder_hash = encoder_fingerprint(enc.g);
    trace.records.push_back(std::move(rec));
    return enc;
  };

  double value = objective(g_tilde);
  trace.final_encoder = snapshot(0, value);
  int decreases = 0;
  for (int step = 1; step <= opt.steps; ++step) {
    const Matrix candidate = g_tilde + opt.eta * gradient(g_tilde);
    const double norm = candidate.norm();
    if (!(norm > 0.0) || !candidate.allFinite()) {
      throw Error(ErrorKind::NumericalBlowup, fmt::format("projected_gradient_ascent: degenerate step {}", step));
    }
    g_tilde = candidate * (std::sqrt(power) / norm);
    const double next = objective(g_tilde);
    decreases = next < value ? decreases + 1 : 0;
    if (decreases >= 20) {
      throw Error(ErrorKind::StepSize,
                  fmt::format("projected_gradient_ascent: objective decreased for 20 consecutive steps (eta = {:.3g}); "
                              "use a smaller step size",
                              opt.eta));
    }
    value = next;
    trace.final_encoder = snapshot(step, value);
    const std::size_t n = trace.records.size();
    if (n > 50 && std::abs(trace.records[n - 1].alignment - trace.records[n - 51].alignment) < 1e-8) {
      trace.converged = true;
      break;
    }
  }
  trace.final_encoder.power = power;
  return trace;
}

AscentTrace projected_gradient_ascent(const MemoryOperator& op, const Encoder& enc0, double power,
                                      const AscentOptions& opt, const Encoder& reference, const EvalHook& hook) {
  if (enc0.n_in() != op.dim()) throw Error(ErrorKind::Dimension, "projected_gradient_ascent: shape mismatch");
  AscentOptions resolved = opt;
  if (resolved.eta == 0.0) {
    const double l1 = op.lambda_max();
    if (!(l1 > 0.0)) throw Error(ErrorKind::InvalidInput, "projected_gradient_ascent: M_w has no positive eigenvalue");
    resolved.eta = 0.1 / l1;
  }
  const Matrix& m = op.m;
  return projected_gradient_ascent([&m](const Matrix& g) { return predicted_objective(m, g); },
                                   [&m](const Matrix& g) -> Matrix { return 2.0 * m * g; }, enc0, power, resolved,
                                   reference, hook);
}

}  // namespace rome
