#pragma once

#include <span>
#include <utility>
#include <vector>

#include <Eigen/Dense>

namespace rome {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

/// Eigenpairs of a symmetric matrix, eigenvalues descending. Each eigenvector
/// is sign-fixed so that its largest-magnitude component is positive.
struct SymEigResult {
  Vector eigenvalues;
  Matrix eigenvectors;  // columns
};

void require_finite(const Matrix& a, const char* what);

SymEigResult sym_eig(const Matrix& a);

/// Power-iteration estimate of the spectral radius: geometric mean of the
/// per-step growth factors over the second half of the run, which also
/// settles for a dominant complex-conjugate pair. Used as a guard only.
double spectral_radius_estimate(const Matrix& a, int max_iter = 200, double tol = 1e-6);

/// max |λ| from a dense nonsymmetric eigensolve.
double spectral_radius(const Matrix& a);

/// Solves Σ = WΣWᵀ + Q by Smith doubling. Throws Divergence when the
/// spectral radius estimate reaches 0.999 and Convergence when `tol`
/// (relative to ‖Q‖_F) is not reached within 64 doublings.
Matrix solve_discrete_lyapunov(const Matrix& w, const Matrix& q, double tol = 1e-10);

/// (S + εI)⁻¹ with ε = eps_rel·trace(S)/dim.
Matrix regularized_inverse(const Matrix& s, double eps_rel);

/// Symmetric square root of a symmetric PSD matrix (negative eigenvalues
/// from rounding are clamped to zero).
Matrix sym_sqrt(const Matrix& s);
Matrix sym_inv_sqrt(const Matrix& s);

struct MeanCov {
  Vector mean;
  Matrix cov;
};

/// Unbiased (n−1) sample covariance. Rows of `samples` are observations.
MeanCov centered_covariance(const Matrix& samples);
MeanCov centered_covariance(std::span<const Vector> samples);

/// Streaming version of centered_covariance. Samples are buffered in blocks
/// and folded in with a matrix product, shifted by the first sample for
/// numerical stability.
class CovarianceAccumulator {
 public:
  explicit CovarianceAccumulator(Eigen::Index dim, Eigen::Index block = 1024);

  void add(const Vector& x);
  std::size_t count() const { return count_; }
  MeanCov result() const;

 private:
  void flush() const;

  Eigen::Index dim_;
  Vector shift_;
  mutable Matrix buffer_;
  mutable Eigen::Index buffered_ = 0;
  mutable Vector sum_;
  mutable Matrix sum_sq_;
  std::size_t count_ = 0;
};

double mean(std::span<const double> x);

/// Squared Pearson correlation. Returns 0 when `y` has zero variance; throws
/// UndefinedTarget when `target` does.
double pearson_corr_sq(std::span<const double> y, std::span<const double> target);

/// 1 − SSE/SST. Can be negative.
double coeff_determination(std::span<const double> prediction, std::span<const double> target);

inline std::span<const double> as_span(const Vector& v) { return {v.data(), static_cast<std::size_t>(v.size())}; }

}  // namespace rome
