#include "rome/numerics.hpp"

#include <algorithm>
#include <cmath>

#include <fmt/format.h>

#include "rome/error.hpp"

namespace rome {

void require_finite(const Matrix& a, const char* what) {
  if (!a.allFinite()) {
    throw Error(ErrorKind::InvalidInput, fmt::format("{}: non-finite entries", what));
  }
}

namespace {

void require_square(const Matrix& a, const char* what) {
  if (a.rows() != a.cols() || a.rows() == 0) {
    throw Error(ErrorKind::Dimension,
                fmt::format("{}: expected a non-empty square matrix, got {}x{}", what, a.rows(), a.cols()));
  }
}

}  // namespace

SymEigResult sym_eig(const Matrix& a) {
  require_square(a, "sym_eig");
  require_finite(a, "sym_eig");
  const Matrix sym = 0.5 * (a + a.transpose());
  Eigen::SelfAdjointEigenSolver<Matrix> solver(sym);
  if (solver.info() != Eigen::Success) {
    throw Error(ErrorKind::Convergence, "sym_eig: eigensolver did not converge");
  }
  const Eigen::Index n = sym.rows();
  SymEigResult out;
  out.eigenvalues = solver.eigenvalues().reverse();
  out.eigenvectors = solver.eigenvectors().rowwise().reverse();
  for (Eigen::Index j = 0; j < n; ++j) {
    auto col = out.eigenvectors.col(j);
    Eigen::Index imax = 0;
    col.cwiseAbs().maxCoeff(&imax);
    if (col(imax) < 0.0) col = -col;
  }
  return out;
}

double spectral_radius_estimate(const Matrix& a, int max_iter, double tol) {
  require_square(a, "spectral_radius_estimate");
  const Eigen::Index n = a.rows();
  // Fixed, dense start vector: deterministic and not orthogonal to generic
  // dominant eigenvectors.
  Vector x(n);
  for (Eigen::Index i = 0; i < n; ++i) x(i) = 1.0 + 0.5 * std::sin(1.0 + static_cast<double>(i));
  x.normalize();

  std::vector<double> log_growth;
  log_growth.reserve(static_cast<std::size_t>(max_iter));
  double previous = -1.0;
  for (int it = 0; it < max_iter; ++it) {
    Vector y = a * x;
    const double norm = y.norm();
    if (norm == 0.0) return 0.0;
    log_growth.push_back(std::log(norm));
    x = y / norm;
    const std::size_t half = log_growth.size() / 2;
    double acc = 0.0;
    for (std::size_t i = half; i < log_growth.size(); ++i) acc += log_growth[i];
    const double estimate = std::exp(acc / static_cast<double>(log_growth.size() - half));
    if (it > 20 && std::abs(estimate - previous) < tol * std::max(1.0, estimate)) return estimate;
    previous = estimate;
  }
  return previous;
}

double spectral_radius(const Matrix& a) {
  require_square(a, "spectral_radius");
  Eigen::EigenSolver<Matrix> solver(a, /*computeEigenvectors=*/false);
  if (solver.info() != Eigen::Success) {
    throw Error(ErrorKind::Convergence, "spectral_radius: eigensolver did not converge");
  }
  return solver.eigenvalues().cwiseAbs().maxCoeff();
}

Matrix solve_discrete_lyapunov(const Matrix& w, const Matrix& q, double tol) {
  require_square(w, "solve_discrete_lyapunov(W)");
  require_square(q, "solve_discrete_lyapunov(Q)");
  if (w.rows() != q.rows()) {
    throw Error(ErrorKind::Dimension, "solve_discrete_lyapunov: W and Q differ in size");
  }
  require_finite(w, "solve_discrete_lyapunov(W)");
  require_finite(q, "solve_discrete_lyapunov(Q)");
  const double rho = spectral_radius_estimate(w);
  if (rho >= 0.999) {
    throw Error(ErrorKind::Divergence,
                fmt::format("solve_discrete_lyapunov: spectral radius estimate {:.6f} >= 0.999", rho));
  }

  const double q_norm = q.norm();
  Matrix sigma = q;
  Matrix power = w;
  for (int doubling = 0; doubling < 64; ++doubling) {
    const Matrix residual = sigma - w * sigma * w.transpose() - q;
    if (residual.norm() <= tol * q_norm) return 0.5 * (sigma + sigma.transpose());
    sigma += power * sigma * power.transpose();
    power = power * power;
  }
  throw Error(ErrorKind::Convergence, "solve_discrete_lyapunov: tolerance not reached in 64 doublings");
}

Matrix regularized_inverse(const Matrix& s, double eps_rel) {
  require_square(s, "regularized_inverse");
  require_finite(s, "regularized_inverse");
  if (eps_rel < 0.0) throw Error(ErrorKind::InvalidInput, "regularized_inverse: eps_rel < 0");
  const Eigen::Index n = s.rows();
  const double eps = eps_rel * s.trace() / static_cast<double>(n);
  Matrix shifted = 0.5 * (s + s.transpose());
  shifted.diagonal().array() += eps;
  Eigen::LLT<Matrix> llt(shifted);
  if (llt.info() != Eigen::Success) {
    throw Error(ErrorKind::Singular, "regularized_inverse: matrix is singular or not positive definite");
  }
  Matrix inv = llt.solve(Matrix::Identity(n, n));
  return 0.5 * (inv + inv.transpose());
}

namespace {

Matrix sym_power(const Matrix& s, double exponent) {
  require_square(s, "sym_power");
  Eigen::SelfAdjointEigenSolver<Matrix> solver(0.5 * (s + s.transpose()));
  Vector lambda = solver.eigenvalues();
  const double cutoff = 1e-14 * std::max(1.0, lambda.cwiseAbs().maxCoeff());
  for (Eigen::Index i = 0; i < lambda.size(); ++i) {
    if (lambda(i) <= cutoff) {
      if (exponent < 0.0) throw Error(ErrorKind::Singular, "sym_inv_sqrt: matrix is singular");
      lambda(i) = 0.0;
    } else {
      lambda(i) = std::pow(lambda(i), exponent);
    }
  }
  const Matrix& v = solver.eigenvectors();
  return v * lambda.asDiagonal() * v.transpose();
}

}  // namespace

Matrix sym_sqrt(const Matrix& s) { return sym_power(s, 0.5); }
Matrix sym_inv_sqrt(const Matrix& s) { return sym_power(s, -0.5); }

MeanCov centered_covariance(const Matrix& samples) {
  if (samples.rows() < 2) {
    throw Error(ErrorKind::InsufficientData, "centered_covariance: need at least 2 samples");
  }
  MeanCov out;
  out.mean = samples.colwise().mean().transpose();
  const Matrix centered = samples.rowwise() - out.mean.transpose();
  out.cov = (centered.transpose() * centered) / static_cast<double>(samples.rows() - 1);
  out.cov = 0.5 * (out.cov + out.cov.transpose());
  return out;
}

MeanCov centered_covariance(std::span<const Vector> samples) {
  if (samples.size() < 2) {
    throw Error(ErrorKind::InsufficientData, "centered_covariance: need at least 2 samples");
  }
  const Eigen::Index dim = samples.front().size();
  Matrix stacked(static_cast<Eigen::Index>(samples.size()), dim);
  for (std::size_t i = 0; i < samples.size(); ++i) {
    if (samples[i].size() != dim) {
      throw Error(ErrorKind::Dimension, "centered_covariance: samples differ in dimension");
    }
    stacked.row(static_cast<Eigen::Index>(i)) = samples[i].transpose();
  }
  return centered_covariance(stacked);
}

CovarianceAccumulator::CovarianceAccumulator(Eigen::Index dim, Eigen::Index block)
    : dim_(dim),
      shift_(Vector::Zero(dim)),
      buffer_(block, dim),
      sum_(Vector::Zero(dim)),
      sum_sq_(Matrix::Zero(dim, dim)) {}

void CovarianceAccumulator::add(const Vector& x) {
  if (x.size() != dim_) throw Error(ErrorKind::Dimension, "CovarianceAccumulator: dimension mismatch");
  if (count_ == 0) shift_ = x;
  buffer_.row(buffered_++) = (x - shift_).transpose();
  ++count_;
  if (buffered_ == buffer_.rows()) flush();
}

void CovarianceAccumulator::flush() const {
  if (buffered_ == 0) return;
  const auto block = buffer_.topRows(buffered_);
  sum_ += block.colwise().sum().transpose();
  sum_sq_.noalias() += block.transpose() * block;
  buffered_ = 0;
}

MeanCov CovarianceAccumulator::result() const {
  if (count_ < 2) throw Error(ErrorKind::InsufficientData, "CovarianceAccumulator: need at least 2 samples");
  flush();
  const double n = static_cast<double>(count_);
  const Vector shifted_mean = sum_ / n;
  MeanCov out;
  out.mean = shift_ + shifted_mean;
  out.cov = (sum_sq_ - n * shifted_mean * shifted_mean.transpose()) / (n - 1.0);
  out.cov = 0.5 * (out.cov + out.cov.transpose());
  return out;
}

double mean(std::span<const double> x) {
  double acc = 0.0;
  for (double v : x) acc += v;
  return acc / static_cast<double>(x.size());
}

namespace {

void require_pair(std::span<const double> a, std::span<const double> b, const char* what) {
  if (a.size() != b.size()) throw Error(ErrorKind::Dimension, fmt::format("{}: length mismatch", what));
  if (a.size() < 2) throw Error(ErrorKind::InsufficientData, fmt::format("{}: need at least 2 points", what));
}

double centered_sum_sq(std::span<const double> x, double m) {
  double acc = 0.0;
  for (double v : x) acc += (v - m) * (v - m);
  return acc;
}

}  // namespace

double pearson_corr_sq(std::span<const double> y, std::span<const double> target) {
  require_pair(y, target, "pearson_corr_sq");
  const double my = mean(y);
  const double mt = mean(target);
  const double stt = centered_sum_sq(target, mt);
  if (!(stt > 0.0)) throw Error(ErrorKind::UndefinedTarget, "pearson_corr_sq: target has zero variance");
  const double syy = centered_sum_sq(y, my);
  if (!(syy > 0.0)) return 0.0;
  double syt = 0.0;
  for (std::size_t i = 0; i < y.size(); ++i) syt += (y[i] - my) * (target[i] - mt);
  return std::clamp(syt * syt / (syy * stt), 0.0, 1.0);
}

double coeff_determination(std::span<const double> prediction, std::span<const double> target) {
  require_pair(prediction, target, "coeff_determination");
  const double mt = mean(target);
  const double stt = centered_sum_sq(target, mt);
  if (!(stt > 0.0)) throw Error(ErrorKind::UndefinedTarget, "coeff_determination: target has zero variance");
  double sse = 0.0;
  for (std::size_t i = 0; i < target.size(); ++i) {
    const double d = prediction[i] - target[i];
    sse += d * d;
  }
  return 1.0 - sse / stt;
}

}  // namespace rome
