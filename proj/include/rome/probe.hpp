#pragma once

#include <cstdint>
#include <limits>
#include <string>
#include <vector>

#include "rome/numerics.hpp"
#include "rome/reservoirs.hpp"

namespace rome {

/// Zero-input working-point statistics of the observation vector.
struct FluctuationEstimate {
  static constexpr std::size_t kAnalytic = std::numeric_limits<std::size_t>::max();

  Vector mean;
  Matrix sigma_ref;
  std::size_t sample_count = 0;  // kAnalytic for closed-form estimates
  bool stationary = true;
  std::vector<std::string> warnings;
};

/// Discrete response kernel. blocks[k-1] = R_S(k), obs_dim × n_in, the
/// observation change per unit injection applied k symbols earlier (k = 1 is
/// the observation emitted by the step that consumed the injection).
struct ResponseKernel {
  int k_max = 0;
  std::vector<Matrix> blocks;
  double probe_amplitude = 0.0;
  int trials = 0;
  std::vector<std::string> warnings;

  const Matrix& at(int k) const { return blocks.at(static_cast<std::size_t>(k - 1)); }
  Eigen::Index obs_dim() const { return blocks.empty() ? 0 : blocks.front().rows(); }
  Eigen::Index n_in() const { return blocks.empty() ? 0 : blocks.front().cols(); }
};

struct FluctuationOptions {
  std::size_t steps = 20000;
  std::size_t burn_in = 500;
  std::uint64_t seed = 1;
};

FluctuationEstimate estimate_fluctuations(const Reservoir& proto, const FluctuationOptions& opt);

/// Lyapunov solution for x' = Wx + σ·η at zero input.
FluctuationEstimate analytic_fluctuations(const Matrix& w, double noise_sigma);

/// Stationary covariance of x' = Wx + Gu + σ·η for white u with covariance
/// `input_cov`: solves Σ = WΣWᵀ + σ²I + G·input_cov·Gᵀ.
Matrix analytic_driven_covariance(const Matrix& w, double noise_sigma, const Matrix& g, const Matrix& input_cov);

/// R(k) = W^{k-1}, k = 1..k_max.
ResponseKernel analytic_response(const Matrix& w, int k_max);

struct ResponseOptions {
  int k_max = 50;
  double epsilon = 1e-3;
  int trials = 1;
  std::size_t burn_in = 200;
  std::uint64_t seed = 1;
  std::size_t jobs = 1;
  /// Paired perturbed/unperturbed runs share one noise stream. Disabling this
  /// exists to measure the variance reduction it buys.
  bool common_random_numbers = true;
};

/// Impulse-response estimate: for each trial and injection coordinate j the
/// perturbed run receives ε·e_j for one symbol after burn-in; the kernel is
/// the trial average of (obs_pert − obs_unpert)/ε at lags 1..k_max. Trials
/// are summed in fixed chunks, in order, so the result does not depend on
/// `jobs`.
ResponseKernel estimate_response(const Reservoir& proto, const ResponseOptions& opt);

}  // namespace rome
