#include "rome/probe.hpp"

#include <algorithm>
#include <cmath>

#include <fmt/format.h>

#include "rome/error.hpp"
#include "rome/parallel.hpp"

namespace rome {

FluctuationEstimate estimate_fluctuations(const Reservoir& proto, const FluctuationOptions& opt) {
  const auto dim = static_cast<Eigen::Index>(proto.obs_dim());
  if (opt.steps < 10 * proto.obs_dim()) {
    throw Error(ErrorKind::InsufficientData,
                fmt::format("estimate_fluctuations: T = {} < 10 * obs_dim = {}", opt.steps, 10 * proto.obs_dim()));
  }
  auto r = proto.clone();
  r->reset(opt.seed);
  const Vector zero = Vector::Zero(static_cast<Eigen::Index>(proto.n_in()));
  for (std::size_t t = 0; t < opt.burn_in; ++t) r->step(zero);

  CovarianceAccumulator acc(dim);
  const std::size_t half = opt.steps / 2;
  Vector sum[2] = {Vector::Zero(dim), Vector::Zero(dim)};
  Vector sum_sq[2] = {Vector::Zero(dim), Vector::Zero(dim)};
  std::size_t count[2] = {0, 0};
  for (std::size_t t = 0; t < opt.steps; ++t) {
    const Vector& obs = r->step(zero);
    acc.add(obs);
    const int h = t < half ? 0 : 1;
    sum[h] += obs;
    sum_sq[h] += obs.cwiseAbs2();
    ++count[h];
  }

  FluctuationEstimate est;
  const MeanCov mc = acc.result();
  est.mean = mc.mean;
  est.sigma_ref = mc.cov;
  est.sample_count = opt.steps;

  // Working-point check: compare the half means coordinate by coordinate.
  Eigen::Index flagged = 0;
  Eigen::Index tested = 0;
  for (Eigen::Index i = 0; i < dim; ++i) {
    double m[2];
    double var[2];
    for (int h = 0; h < 2; ++h) {
      const double n = static_cast<double>(count[h]);
      m[h] = sum[h](i) / n;
      var[h] = std::max(0.0, (sum_sq[h](i) - n * m[h] * m[h]) / std::max(1.0, n - 1.0));
    }
    const double se = std::sqrt(var[0] / static_cast<double>(count[0]) + var[1] / static_cast<double>(count[1]));
    if (se <= 0.0) continue;
    ++tested;
    if (std::abs(m[0] - m[1]) > 5.0 * se) ++flagged;
  }
  if (tested > 0 && static_cast<double>(flagged) > 0.1 * static_cast<double>(tested)) {
    est.stationary = false;
    est.warnings.push_back(fmt::format(
        "working point not stationary: half-means differ by > 5 standard errors in {}/{} coordinates", flagged,
        tested));
    warn(est.warnings.back());
  }
  return est;
}

FluctuationEstimate analytic_fluctuations(const Matrix& w, double noise_sigma) {
  const Eigen::Index n = w.rows();
  FluctuationEstimate est;
  est.mean = Vector::Zero(n);
  est.sigma_ref = solve_discrete_lyapunov(w, noise_sigma * noise_sigma * Matrix::Identity(n, n));
  est.sample_count = FluctuationEstimate::kAnalytic;
  return est;
}

Matrix analytic_driven_covariance(const Matrix& w, double noise_sigma, const Matrix& g, const Matrix& input_cov) {
  const Eigen::Index n = w.rows();
  if (g.rows() != n || g.cols() != input_cov.rows() || input_cov.rows() != input_cov.cols()) {
    throw Error(ErrorKind::Dimension, "analytic_driven_covariance: shape mismatch");
  }
  Matrix q = noise_sigma * noise_sigma * Matrix::Identity(n, n) + g * input_cov * g.transpose();
  return solve_discrete_lyapunov(w, q);
}

ResponseKernel analytic_response(const Matrix& w, int k_max) {
  if (w.rows() != w.cols()) throw Error(ErrorKind::Dimension, "analytic_response: W must be square");
  if (k_max < 1) throw Error(ErrorKind::InvalidInput, "analytic_response: k_max must be >= 1");
  ResponseKernel kernel;
  kernel.k_max = k_max;
  kernel.trials = 0;
  kernel.blocks.reserve(static_cast<std::size_t>(k_max));
  Matrix power = Matrix::Identity(w.rows(), w.cols());
  for (int k = 1; k <= k_max; ++k) {
    kernel.blocks.push_back(power);
    power = w * power;
  }
  return kernel;
}

namespace {

constexpr int kTrialsPerChunk = 8;

/// Runs `steps` zero-input symbols from `r`, writing observations into rows.
void record(Reservoir& r, const Vector& first_injection, int steps, Matrix& out) {
  const Vector zero = Vector::Zero(first_injection.size());
  out.resize(steps, static_cast<Eigen::Index>(r.obs_dim()));
  for (int k = 0; k < steps; ++k) out.row(k) = r.step(k == 0 ? first_injection : zero).transpose();
}

}  // namespace

ResponseKernel estimate_response(const Reservoir& proto, const ResponseOptions& opt) {
  if (!(opt.epsilon > 0.0)) throw Error(ErrorKind::InvalidInput, "estimate_response: epsilon must be > 0");
  if (opt.trials < 1) throw Error(ErrorKind::InvalidInput, "estimate_response: trials must be >= 1");
  if (opt.k_max < 1) throw Error(ErrorKind::InvalidInput, "estimate_response: k_max must be >= 1");

  const auto obs_dim = static_cast<Eigen::Index>(proto.obs_dim());
  const auto n_in = static_cast<Eigen::Index>(proto.n_in());
  const int k_max = opt.k_max;
  const int n_chunks = (opt.trials + kTrialsPerChunk - 1) / kTrialsPerChunk;

  std::vector<std::vector<Matrix>> chunk_sums(static_cast<std::size_t>(n_chunks));
  parallel_for(static_cast<std::size_t>(n_chunks), opt.jobs, [&](std::size_t c) {
    std::vector<Matrix> sums(static_cast<std::size_t>(k_max), Matrix::Zero(obs_dim, n_in));
    const int first = static_cast<int>(c) * kTrialsPerChunk;
    const int last = std::min(opt.trials, first + kTrialsPerChunk);
    const Vector zero = Vector::Zero(n_in);
    Matrix base_obs;
    Matrix pert_obs;
    for (int trial = first; trial < last; ++trial) {
      const std::uint64_t trial_seed = derive_seed(opt.seed, static_cast<std::uint64_t>(trial));
      auto base = proto.clone();
      base->reset(trial_seed);
      for (std::size_t t = 0; t < opt.burn_in; ++t) base->step(zero);

      auto reference = base->clone();
      if (!opt.common_random_numbers) {
        reference->reset(derive_seed(trial_seed, "independent"));
        for (std::size_t t = 0; t < opt.burn_in; ++t) reference->step(zero);
      }
      record(*reference, zero, k_max, base_obs);

      for (Eigen::Index j = 0; j < n_in; ++j) {
        auto perturbed = base->clone();
        Vector impulse = zero;
        impulse(j) = opt.epsilon;
        record(*perturbed, impulse, k_max, pert_obs);
        for (int k = 0; k < k_max; ++k) {
          sums[static_cast<std::size_t>(k)].col(j) += (pert_obs.row(k) - base_obs.row(k)).transpose() / opt.epsilon;
        }
      }
    }
    chunk_sums[c] = std::move(sums);
  });

  ResponseKernel kernel;
  kernel.k_max = k_max;
  kernel.probe_amplitude = opt.epsilon;
  kernel.trials = opt.trials;
  kernel.blocks.assign(static_cast<std::size_t>(k_max), Matrix::Zero(obs_dim, n_in));
  for (const auto& sums : chunk_sums) {
    for (int k = 0; k < k_max; ++k) kernel.blocks[static_cast<std::size_t>(k)] += sums[static_cast<std::size_t>(k)];
  }
  for (auto& block : kernel.blocks) {
    block /= static_cast<double>(opt.trials);
    if (!block.allFinite()) throw Error(ErrorKind::NumericalBlowup, "estimate_response: non-finite response");
  }
  double peak = 0.0;
  int peak_lag = 0;
  for (int k = 0; k < k_max; ++k) {
    const double m = kernel.blocks[static_cast<std::size_t>(k)].cwiseAbs().maxCoeff();
    if (m > peak) {
      peak = m;
      peak_lag = k + 1;
    }
  }
  if (peak > 1e3) {
    kernel.warnings.push_back(fmt::format(
        "response magnitude {:.3g} per unit input at lag {} exceeds 1e3: nonlinearity or blowup, try a smaller epsilon",
        peak, peak_lag));
    warn(kernel.warnings.back());
  }
  return kernel;
}

}  // namespace rome
