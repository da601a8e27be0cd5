#include "rome/encoder.hpp"

#include <cmath>
#include <numeric>

#include <fmt/format.h>

#include "rome/error.hpp"
#include "rome/rng.hpp"

namespace rome {

TaskWeights::TaskWeights(std::map<int, double> entries) : entries_(std::move(entries)) {
  bool any_positive = false;
  for (const auto& [k, w] : entries_) {
    if (k < 1) throw Error(ErrorKind::Config, fmt::format("task weights: delay {} must be >= 1", k));
    if (!(w >= 0.0) || !std::isfinite(w)) {
      throw Error(ErrorKind::Config, fmt::format("task weights: weight for delay {} must be finite and >= 0", k));
    }
    any_positive = any_positive || w > 0.0;
  }
  if (!any_positive) throw Error(ErrorKind::Config, "task weights: at least one weight must be positive");
}

TaskWeights TaskWeights::uniform(int k_max) {
  std::map<int, double> entries;
  for (int k = 1; k <= k_max; ++k) entries[k] = 1.0;
  return TaskWeights(std::move(entries));
}

TaskWeights TaskWeights::scaled(double c) const {
  std::map<int, double> entries = entries_;
  for (auto& [k, w] : entries) w *= c;
  return TaskWeights(std::move(entries));
}

void TaskWeights::validate_against(int k_max) const {
  if (entries_.empty()) throw Error(ErrorKind::Config, "task weights are empty");
  if (max_delay() > k_max) {
    throw Error(ErrorKind::Config, fmt::format("task delay {} exceeds probe k_max = {}", max_delay(), k_max));
  }
}

Matrix Encoder::whitened() const { return g * sym_sqrt(input_cov); }

Encoder Encoder::from_whitened(const Matrix& g_tilde, const Matrix& input_cov) {
  Encoder enc;
  enc.input_cov = input_cov;
  enc.g = g_tilde * sym_inv_sqrt(input_cov);
  enc.power = g_tilde.squaredNorm();
  enc.active_directions = static_cast<int>(g_tilde.cols());
  return enc;
}

Encoder Encoder::with_power(double p) const {
  const double current = whitened_power();
  if (!(current > 0.0)) throw Error(ErrorKind::InvalidInput, "Encoder::with_power: zero encoder");
  Encoder out = *this;
  const double scale = std::sqrt(p / current);
  out.g *= scale;
  out.power = p;
  for (double& pi : out.power_split) pi *= p / current;
  if (std::isfinite(out.predicted_objective)) out.predicted_objective *= p / current;
  return out;
}

MemoryOperator memory_operator_from_matrix(const Matrix& m, TaskWeights weights) {
  if (m.rows() != m.cols()) throw Error(ErrorKind::Dimension, "memory operator must be square");
  MemoryOperator op;
  op.m = 0.5 * (m + m.transpose());
  op.eigen = sym_eig(op.m);
  op.weights = std::move(weights);
  const double l1 = op.eigen.eigenvalues(0);
  if (op.m.rows() > 1) {
    const double l2 = op.eigen.eigenvalues(1);
    op.degenerate_top = (l1 - l2) < 1e-8 * std::abs(l1);
  }
  return op;
}

MemoryOperator build_memory_operator(const ResponseKernel& kernel, const FluctuationEstimate& fluct,
                                     const TaskWeights& w, double eps_rel) {
  if (w.entries().empty()) throw Error(ErrorKind::Config, "build_memory_operator: empty task weights");
  w.validate_against(kernel.k_max);
  if (kernel.obs_dim() != fluct.sigma_ref.rows()) {
    throw Error(ErrorKind::Dimension,
                fmt::format("build_memory_operator: kernel obs_dim {} != covariance dim {}", kernel.obs_dim(),
                            fluct.sigma_ref.rows()));
  }
  const Matrix metric = regularized_inverse(fluct.sigma_ref, eps_rel);
  const Eigen::Index n_in = kernel.n_in();
  Matrix m = Matrix::Zero(n_in, n_in);
  for (const auto& [k, weight] : w.entries()) {
    if (weight == 0.0) continue;
    const Matrix& r = kernel.at(k);
    m.noalias() += weight * (r.transpose() * metric * r);
  }
  return memory_operator_from_matrix(m, w);
}

namespace {

Matrix identity_or(const std::optional<Matrix>& cov, Eigen::Index channels) {
  if (!cov) return Matrix::Identity(channels, channels);
  if (cov->rows() != channels || cov->cols() != channels) {
    throw Error(ErrorKind::Dimension, "encoder: input covariance must be channels x channels");
  }
  return *cov;
}

}  // namespace

Encoder optimal_encoder(const MemoryOperator& op, const EncoderRequest& req) {
  const Eigen::Index n_in = op.dim();
  if (!(req.power > 0.0)) throw Error(ErrorKind::InvalidInput, "optimal_encoder: P must be > 0");
  if (req.channels < 1) throw Error(ErrorKind::InvalidInput, "optimal_encoder: need at least one input channel");
  if (req.r < 1 || req.r > std::min<Eigen::Index>(n_in, req.channels)) {
    throw Error(ErrorKind::InvalidInput,
                fmt::format("optimal_encoder: r = {} must lie in [1, min(n_in={}, m={})]", req.r, n_in, req.channels));
  }
  std::vector<double> split;
  if (req.power_split) {
    split = *req.power_split;
    if (split.size() != static_cast<std::size_t>(req.r)) {
      throw Error(ErrorKind::InvalidInput, "optimal_encoder: power_split length must equal r");
    }
    double total = 0.0;
    for (double p : split) {
      if (!(p >= 0.0)) throw Error(ErrorKind::InvalidInput, "optimal_encoder: power_split entries must be >= 0");
      total += p;
    }
    if (std::abs(total - req.power) > 1e-10 * req.power) {
      throw Error(ErrorKind::InvalidInput, "optimal_encoder: power_split must sum to P");
    }
  } else {
    split.assign(static_cast<std::size_t>(req.r), req.power / req.r);
  }

  const Matrix input_cov = identity_or(req.input_cov, req.channels);
  Matrix g_tilde = Matrix::Zero(n_in, req.channels);
  double objective = 0.0;
  for (int i = 0; i < req.r; ++i) {
    g_tilde.col(i) = std::sqrt(split[static_cast<std::size_t>(i)]) * op.eigen.eigenvectors.col(i);
    objective += split[static_cast<std::size_t>(i)] * op.eigen.eigenvalues(i);
  }

  Encoder enc = Encoder::from_whitened(g_tilde, input_cov);
  enc.power = req.power;
  enc.active_directions = req.r;
  enc.power_split = split;
  enc.predicted_objective = objective;
  enc.degenerate = op.degenerate_top;
  const double l1 = op.eigen.eigenvalues(0);
  if (op.eigen.eigenvalues(req.r - 1) <= 1e-12 * l1) {
    enc.warnings.push_back(fmt::format("direction {} lies in the (near-)null space of M_w (lambda = {:.3g})", req.r,
                                       op.eigen.eigenvalues(req.r - 1)));
    warn(enc.warnings.back());
  }
  if (op.degenerate_top) enc.warnings.push_back("top eigenvalue of M_w is degenerate");
  return enc;
}

Encoder random_encoder(double power, Eigen::Index n_in, Eigen::Index channels, std::uint64_t seed,
                       const std::optional<Matrix>& input_cov) {
  if (!(power > 0.0)) throw Error(ErrorKind::InvalidInput, "random_encoder: P must be > 0");
  Rng rng(derive_seed(seed, "random-encoder"));
  Matrix g(n_in, channels);
  for (Eigen::Index j = 0; j < channels; ++j) {
    for (Eigen::Index i = 0; i < n_in; ++i) g(i, j) = rng.normal();
  }
  Encoder enc;
  enc.input_cov = identity_or(input_cov, channels);
  enc.g = g;
  const double current = enc.whitened_power();
  enc.g *= std::sqrt(power / current);
  enc.power = power;
  enc.active_directions = static_cast<int>(channels);
  return enc;
}

double predicted_objective(const Matrix& m, const Matrix& g_tilde) {
  if (m.rows() != g_tilde.rows()) throw Error(ErrorKind::Dimension, "predicted_objective: shape mismatch");
  return std::max(0.0, (g_tilde.transpose() * m * g_tilde).trace());
}

double predicted_objective(const MemoryOperator& op, const Encoder& enc) {
  return predicted_objective(op.m, enc.whitened());
}

double alignment(const Matrix& a, const Matrix& b) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) throw Error(ErrorKind::Dimension, "alignment: shape mismatch");
  const double na = a.norm();
  const double nb = b.norm();
  if (!(na > 0.0) || !(nb > 0.0)) throw Error(ErrorKind::InvalidInput, "alignment: zero encoder");
  const double c = std::abs((a.array() * b.array()).sum()) / (na * nb);
  return std::min(1.0, c);
}

double alignment(const Encoder& a, const Encoder& b) { return alignment(a.g, b.g); }

}  // namespace rome
