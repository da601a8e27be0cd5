#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "rome/encoder.hpp"
#include "rome/numerics.hpp"
#include "rome/probe.hpp"
#include "rome/reservoirs.hpp"

namespace rome {

// ---------------------------------------------------------------------------
// Inputs and tasks

/// i.i.d. uniform on [−a, a]; Σ_sig = a²/3.
std::vector<double> gen_white_input(std::size_t steps, double amplitude, std::uint64_t seed);
/// i.i.d. uniform on [0, 0.5].
std::vector<double> gen_narma_input(std::size_t steps, std::uint64_t seed);

struct NarmaCoefficients {
  static constexpr double kDecay = 0.3;
  static constexpr double kHistory = 0.05;
  static constexpr double kInputProduct = 1.5;
  static constexpr double kOffset = 0.1;
  static constexpr int kOrder = 10;
  static nlohmann::json to_json();
};

/// NARMA10 target aligned with the input: out[t] = y_{t+1}, computed from
/// u_0..u_t with zero initial history. Throws UnstableTask if |y| > 10.
std::vector<double> gen_narma10(const std::vector<double>& u);

/// out[t] = u[t − k + 1] (k = 1 is the input consumed at step t), 0 before the start.
std::vector<double> delayed(const std::vector<double>& u, int k);

// ---------------------------------------------------------------------------
// Driving and readout

struct Split {
  std::size_t train_begin = 0;
  std::size_t train_end = 0;
  std::size_t test_begin = 0;
  std::size_t test_end = 0;
};

struct DrivenRun {
  Matrix observations;  // T × obs_dim; row t is the observation after consuming input t
  Matrix inputs;        // T × m
  std::size_t washout = 0;
  Split split;
};

/// Contiguous train/test ranges after the washout.
Split make_split(std::size_t steps, std::size_t washout, double train_fraction);

/// Resets a clone of `proto` with `seed` and feeds G·u_t each step.
DrivenRun drive(const Reservoir& proto, const Encoder& enc, const Matrix& inputs, std::size_t washout,
                std::uint64_t seed, double train_fraction = 0.7);
DrivenRun drive(const Reservoir& proto, const Encoder& enc, const std::vector<double>& u, std::size_t washout,
                std::uint64_t seed, double train_fraction = 0.7);

struct ReadoutModel {
  Matrix w_out;  // targets × obs_dim
  Vector intercept;
  double ridge_lambda = 0.0;
  std::vector<std::string> warnings;

  Matrix predict(const Matrix& x_rows) const;
};

/// Least squares with intercept on sample rows; ridge penalty λ‖W‖²_F on the
/// summed squared error. With λ = 0 and a singular scatter matrix, retries
/// with λ = 1e-8·trace(scatter)/obs_dim and records a warning.
ReadoutModel fit_readout(const Matrix& x_rows, const Matrix& y_rows, double ridge_lambda);
/// Fits on the train range of `run`; `targets` is T × q (or length T).
ReadoutModel fit_readout(const DrivenRun& run, const Matrix& targets, double ridge_lambda);
ReadoutModel fit_readout(const DrivenRun& run, const std::vector<double>& targets, double ridge_lambda);

struct TaskScore {
  double corr_sq = 0.0;  // squared Pearson correlation on the test range
  double r2 = 0.0;       // coefficient of determination on the test range
};

TaskScore score_task(const DrivenRun& run, const std::vector<double>& target, double ridge_lambda);

struct MemoryCurve {
  std::vector<double> mf;  // index k-1
  std::vector<double> r2;
  double capacity = 0.0;
};

/// Test-range MF(k) = corr²(readout, u_{t−k+1}) for k = 1..k_max.
MemoryCurve memory_curve(const DrivenRun& run, const std::vector<double>& u, int k_max, double ridge_lambda = 0.0);
double memory_function_empirical(const DrivenRun& run, const std::vector<double>& u, int k,
                                 double ridge_lambda = 0.0);

/// MF(k) = Tr(R(k) G̃ G̃ᵀ R(k)ᵀ (metric + εI)⁻¹) for k = 1..k_max.
std::vector<double> mf_analytic(const ResponseKernel& kernel, const Matrix& metric_cov, const Encoder& enc,
                                double eps_rel = 0.0);

struct NarmaStats {
  std::vector<std::optional<TaskScore>> per_seed;  // nullopt when the target diverged
  double mean_r2 = 0.0;
  double sd_r2 = 0.0;
  double mean_corr_sq = 0.0;
  std::size_t skipped = 0;
};

NarmaStats narma_r2(const Reservoir& proto, const Encoder& enc, std::size_t steps,
                    const std::vector<std::uint64_t>& seeds, std::size_t washout = 200, double ridge_lambda = 0.0,
                    std::size_t jobs = 1);

// ---------------------------------------------------------------------------
// Geometry

/// Top eigenvector of Σ_k w(k)·R(k)ᵀR(k): the direction of largest raw
/// response gain, ignoring the noise metric.
Vector task_only_direction(const ResponseKernel& kernel, const TaskWeights& w);

struct PlaneScan {
  std::vector<double> theta;
  std::vector<double> value;
  Vector axis_rome;  // b1 = normalized ROME direction
  Vector axis_task;  // b2 = task direction orthogonalized against b1
  /// Smallest-variance eigenvector of the noise covariance expressed in the
  /// (b1, b2) plane, when the covariance lives in the injection space.
  std::optional<Eigen::Vector2d> noise_projection;
  std::optional<double> noise_angle;
  double task_angle = 0.0;  // angle of the task direction in the plane
};

PlaneScan direction_plane_scan(const MemoryOperator& op, const Vector& dir_task, const Vector& dir_rome,
                               double power, int angles, const std::optional<Matrix>& noise_cov = std::nullopt);

// ---------------------------------------------------------------------------

double sample_sd(const std::vector<double>& x);

}  // namespace rome
