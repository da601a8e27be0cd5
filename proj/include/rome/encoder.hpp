#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "rome/numerics.hpp"
#include "rome/probe.hpp"

namespace rome {

/// Nonnegative weights over discrete delays k ≥ 1.
class TaskWeights {
 public:
  TaskWeights() = default;
  explicit TaskWeights(std::map<int, double> entries);

  static TaskWeights single(int delay) { return TaskWeights({{delay, 1.0}}); }
  /// Uniform weight over 1..k_max (the memory-capacity objective).
  static TaskWeights uniform(int k_max);

  const std::map<int, double>& entries() const { return entries_; }
  int max_delay() const { return entries_.empty() ? 0 : entries_.rbegin()->first; }
  TaskWeights scaled(double c) const;

  /// Throws Config when a delay exceeds k_max.
  void validate_against(int k_max) const;

 private:
  std::map<int, double> entries_;
};

/// Input matrix G (n_in × m) together with the input covariance Σ_sig that
/// defines the whitened encoder G̃ = G·Σ_sig^{1/2} and its power ‖G̃‖²_F.
struct Encoder {
  Matrix g;
  Matrix input_cov;
  double power = 0.0;
  int active_directions = 0;
  std::vector<double> power_split;
  /// J★ = Σ p_i λ_i for optimal encoders, NaN otherwise.
  double predicted_objective = std::numeric_limits<double>::quiet_NaN();
  bool degenerate = false;
  std::vector<std::string> warnings;

  Eigen::Index n_in() const { return g.rows(); }
  Eigen::Index channels() const { return g.cols(); }
  Matrix whitened() const;
  double whitened_power() const { return whitened().squaredNorm(); }

  /// Builds G = G̃·Σ_sig^{-1/2}; power is read back from G̃.
  static Encoder from_whitened(const Matrix& g_tilde, const Matrix& input_cov);
  /// Same direction rescaled to whitened power P.
  Encoder with_power(double p) const;
};

/// M_w = Σ_k w(k)·R(k)ᵀ(Σ_ref + εI)⁻¹R(k) and its eigendecomposition.
struct MemoryOperator {
  Matrix m;
  SymEigResult eigen;
  TaskWeights weights;
  /// λ1 − λ2 < 1e-8·λ1: the top eigenspace is not one-dimensional and the
  /// returned direction is one sign-fixed representative.
  bool degenerate_top = false;

  double lambda_max() const { return eigen.eigenvalues(0); }
  Eigen::Index dim() const { return m.rows(); }
};

MemoryOperator build_memory_operator(const ResponseKernel& kernel, const FluctuationEstimate& fluct,
                                     const TaskWeights& w, double eps_rel);

/// Operator from an explicit symmetric PSD matrix (tests and saved spectra).
MemoryOperator memory_operator_from_matrix(const Matrix& m, TaskWeights weights = {});

struct EncoderRequest {
  double power = 1.0;
  int r = 1;
  int channels = 1;
  std::optional<std::vector<double>> power_split;
  std::optional<Matrix> input_cov;  // identity when absent
};

/// G̃ = Σ_{i≤r} √p_i·v_i·e_iᵀ, then G = G̃·Σ_sig^{-1/2}.
Encoder optimal_encoder(const MemoryOperator& op, const EncoderRequest& req);

/// i.i.d. Gaussian entries rescaled to whitened power P.
Encoder random_encoder(double power, Eigen::Index n_in, Eigen::Index channels, std::uint64_t seed,
                       const std::optional<Matrix>& input_cov = std::nullopt);

/// Tr(G̃ᵀ M_w G̃).
double predicted_objective(const MemoryOperator& op, const Encoder& enc);
double predicted_objective(const Matrix& m, const Matrix& g_tilde);

/// |⟨vec Ga, vec Gb⟩| / (‖Ga‖‖Gb‖).
double alignment(const Encoder& a, const Encoder& b);
double alignment(const Matrix& a, const Matrix& b);

}  // namespace rome
