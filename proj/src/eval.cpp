#include "rome/eval.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include <fmt/format.h>

#include "rome/error.hpp"
#include "rome/parallel.hpp"
#include "rome/rng.hpp"

namespace rome {

std::vector<double> gen_white_input(std::size_t steps, double amplitude, std::uint64_t seed) {
  Rng rng(derive_seed(seed, "input"));
  std::vector<double> u(steps);
  for (double& v : u) v = rng.uniform(-amplitude, amplitude);
  return u;
}

std::vector<double> gen_narma_input(std::size_t steps, std::uint64_t seed) {
  Rng rng(derive_seed(seed, "input"));
  std::vector<double> u(steps);
  for (double& v : u) v = rng.uniform(0.0, 0.5);
  return u;
}

nlohmann::json NarmaCoefficients::to_json() {
  return {{"decay", kDecay},
          {"history", kHistory},
          {"input_product", kInputProduct},
          {"offset", kOffset},
          {"order", kOrder},
          {"input_distribution", "uniform[0,0.5]"}};
}

std::vector<double> gen_narma10(const std::vector<double>& u) {
  constexpr int order = NarmaCoefficients::kOrder;
  if (u.size() < static_cast<std::size_t>(order + 1)) {
    throw Error(ErrorKind::InvalidInput, "gen_narma10: input must have at least 11 samples");
  }
  for (std::size_t t = 0; t < u.size(); ++t) {
    if (!(u[t] >= 0.0 && u[t] <= 0.5)) {
      throw Error(ErrorKind::InvalidInput, fmt::format("gen_narma10: u[{}] = {} outside [0, 0.5]", t, u[t]));
    }
  }
  const std::size_t steps = u.size();
  std::vector<double> y(steps + 1, 0.0);
  double window = 0.0;  // Σ_{i=0}^{9} y_{t−i}
  for (std::size_t t = 0; t < steps; ++t) {
    window += y[t];
    if (t >= static_cast<std::size_t>(order)) window -= y[t - order];
    const double u_lag = t >= static_cast<std::size_t>(order - 1) ? u[t - (order - 1)] : 0.0;
    y[t + 1] = NarmaCoefficients::kDecay * y[t] + NarmaCoefficients::kHistory * y[t] * window +
               NarmaCoefficients::kInputProduct * u_lag * u[t] + NarmaCoefficients::kOffset;
    if (!(std::abs(y[t + 1]) <= 10.0)) {
      throw Error(ErrorKind::UnstableTask, fmt::format("gen_narma10: target diverged at step {}", t + 1));
    }
  }
  return {y.begin() + 1, y.end()};
}

std::vector<double> delayed(const std::vector<double>& u, int k) {
  if (k < 1) throw Error(ErrorKind::InvalidInput, "delayed: k must be >= 1");
  std::vector<double> out(u.size(), 0.0);
  const auto shift = static_cast<std::size_t>(k - 1);
  for (std::size_t t = shift; t < u.size(); ++t) out[t] = u[t - shift];
  return out;
}

Split make_split(std::size_t steps, std::size_t washout, double train_fraction) {
  if (!(train_fraction > 0.0 && train_fraction < 1.0)) {
    throw Error(ErrorKind::Config, "train fraction must lie in (0, 1)");
  }
  if (washout + 4 > steps) throw Error(ErrorKind::Config, "run is too short for the washout");
  Split s;
  s.train_begin = washout;
  s.train_end = washout + static_cast<std::size_t>(std::floor(train_fraction * static_cast<double>(steps - washout)));
  s.test_begin = s.train_end;
  s.test_end = steps;
  if (s.train_end - s.train_begin < 2 || s.test_end - s.test_begin < 2) {
    throw Error(ErrorKind::Config, "train or test range has fewer than 2 samples");
  }
  return s;
}

DrivenRun drive(const Reservoir& proto, const Encoder& enc, const Matrix& inputs, std::size_t washout,
                std::uint64_t seed, double train_fraction) {
  if (enc.n_in() != static_cast<Eigen::Index>(proto.n_in())) {
    throw Error(ErrorKind::Dimension,
                fmt::format("drive: encoder has {} rows but the reservoir accepts {} injection coordinates",
                            enc.n_in(), proto.n_in()));
  }
  if (inputs.cols() != enc.channels()) throw Error(ErrorKind::Dimension, "drive: input channels != encoder columns");
  const auto steps = static_cast<std::size_t>(inputs.rows());
  DrivenRun run;
  run.inputs = inputs;
  run.washout = washout;
  run.split = make_split(steps, washout, train_fraction);
  run.observations.resize(inputs.rows(), static_cast<Eigen::Index>(proto.obs_dim()));
  auto r = proto.clone();
  r->reset(seed);
  Vector injection(enc.n_in());
  for (Eigen::Index t = 0; t < inputs.rows(); ++t) {
    injection.noalias() = enc.g * inputs.row(t).transpose();
    run.observations.row(t) = r->step(injection).transpose();
  }
  return run;
}

DrivenRun drive(const Reservoir& proto, const Encoder& enc, const std::vector<double>& u, std::size_t washout,
                std::uint64_t seed, double train_fraction) {
  const Matrix inputs = Eigen::Map<const Vector>(u.data(), static_cast<Eigen::Index>(u.size()));
  return drive(proto, enc, inputs, washout, seed, train_fraction);
}

Matrix ReadoutModel::predict(const Matrix& x_rows) const {
  Matrix out = x_rows * w_out.transpose();
  out.rowwise() += intercept.transpose();
  return out;
}

ReadoutModel fit_readout(const Matrix& x_rows, const Matrix& y_rows, double ridge_lambda) {
  if (x_rows.rows() != y_rows.rows()) throw Error(ErrorKind::Dimension, "fit_readout: sample counts differ");
  if (x_rows.rows() < 2) throw Error(ErrorKind::InsufficientData, "fit_readout: need at least 2 samples");
  if (!(ridge_lambda >= 0.0)) throw Error(ErrorKind::InvalidInput, "fit_readout: ridge lambda must be >= 0");
  const Eigen::Index d = x_rows.cols();
  const Vector x_mean = x_rows.colwise().mean().transpose();
  const Vector y_mean = y_rows.colwise().mean().transpose();
  const Matrix xc = x_rows.rowwise() - x_mean.transpose();
  const Matrix yc = y_rows.rowwise() - y_mean.transpose();
  Matrix scatter = xc.transpose() * xc;
  const Matrix rhs = xc.transpose() * yc;

  ReadoutModel model;
  model.ridge_lambda = ridge_lambda;
  auto solve = [&](double lambda, Matrix& w) {
    Matrix a = scatter;
    a.diagonal().array() += lambda;
    Eigen::LDLT<Matrix> ldlt(a);
    if (ldlt.info() != Eigen::Success || !(ldlt.rcond() > 1e-13)) return false;
    w = ldlt.solve(rhs);
    return w.allFinite();
  };
  Matrix w;
  if (!solve(ridge_lambda, w)) {
    const double trace = scatter.trace();
    const double fallback = std::max(1e-8 * trace / static_cast<double>(d), 1e-300);
    const double lambda = std::max(ridge_lambda, fallback);
    model.warnings.push_back(fmt::format("singular readout system; auto-regularized with lambda = {:.3g}", lambda));
    model.ridge_lambda = lambda;
    if (!solve(lambda, w)) {
      // Rank-deficient beyond rescue (e.g. all-constant features): the
      // minimum-norm solution via complete orthogonal decomposition.
      Matrix a = scatter;
      a.diagonal().array() += lambda;
      w = a.completeOrthogonalDecomposition().solve(rhs);
    }
  }
  model.w_out = w.transpose();
  model.intercept = y_mean - model.w_out * x_mean;
  return model;
}

namespace {

Matrix rows_of(const Matrix& m, std::size_t begin, std::size_t end) {
  return m.middleRows(static_cast<Eigen::Index>(begin), static_cast<Eigen::Index>(end - begin));
}

}  // namespace

ReadoutModel fit_readout(const DrivenRun& run, const Matrix& targets, double ridge_lambda) {
  if (targets.rows() != run.observations.rows()) throw Error(ErrorKind::Dimension, "fit_readout: target length");
  const auto& s = run.split;
  const auto train_len = static_cast<Eigen::Index>(s.train_end - s.train_begin);
  if (train_len <= run.observations.cols() && ridge_lambda == 0.0) {
    throw Error(ErrorKind::InsufficientData, "fit_readout: train range must exceed obs_dim when ridge_lambda = 0");
  }
  return fit_readout(rows_of(run.observations, s.train_begin, s.train_end), rows_of(targets, s.train_begin, s.train_end),
                     ridge_lambda);
}

ReadoutModel fit_readout(const DrivenRun& run, const std::vector<double>& targets, double ridge_lambda) {
  const Matrix t = Eigen::Map<const Vector>(targets.data(), static_cast<Eigen::Index>(targets.size()));
  return fit_readout(run, t, ridge_lambda);
}

TaskScore score_task(const DrivenRun& run, const std::vector<double>& target, double ridge_lambda) {
  const ReadoutModel model = fit_readout(run, target, ridge_lambda);
  const auto& s = run.split;
  const Matrix pred = model.predict(rows_of(run.observations, s.test_begin, s.test_end));
  const std::span<const double> truth(target.data() + s.test_begin, s.test_end - s.test_begin);
  const Vector p = pred.col(0);
  TaskScore score;
  score.corr_sq = pearson_corr_sq(as_span(p), truth);
  score.r2 = coeff_determination(as_span(p), truth);
  return score;
}

MemoryCurve memory_curve(const DrivenRun& run, const std::vector<double>& u, int k_max, double ridge_lambda) {
  if (k_max < 1) throw Error(ErrorKind::InvalidInput, "memory_curve: k_max must be >= 1");
  if (u.size() != static_cast<std::size_t>(run.observations.rows())) {
    throw Error(ErrorKind::Dimension, "memory_curve: input length != run length");
  }
  if (run.split.train_begin + 1 < static_cast<std::size_t>(k_max)) {
    throw Error(ErrorKind::InsufficientData, "memory_curve: washout too short for the largest delay");
  }
  const auto steps = static_cast<Eigen::Index>(u.size());
  Matrix targets(steps, k_max);
  for (int k = 1; k <= k_max; ++k) {
    const auto d = delayed(u, k);
    targets.col(k - 1) = Eigen::Map<const Vector>(d.data(), steps);
  }
  const ReadoutModel model = fit_readout(run, targets, ridge_lambda);
  const auto& s = run.split;
  const Matrix pred = model.predict(rows_of(run.observations, s.test_begin, s.test_end));
  const Matrix truth = rows_of(targets, s.test_begin, s.test_end);

  MemoryCurve curve;
  curve.mf.resize(static_cast<std::size_t>(k_max));
  curve.r2.resize(static_cast<std::size_t>(k_max));
  for (int k = 0; k < k_max; ++k) {
    const Vector p = pred.col(k);
    const Vector t = truth.col(k);
    curve.mf[static_cast<std::size_t>(k)] = pearson_corr_sq(as_span(p), as_span(t));
    curve.r2[static_cast<std::size_t>(k)] = coeff_determination(as_span(p), as_span(t));
    curve.capacity += curve.mf[static_cast<std::size_t>(k)];
  }
  return curve;
}

double memory_function_empirical(const DrivenRun& run, const std::vector<double>& u, int k, double ridge_lambda) {
  if (k < 1) throw Error(ErrorKind::InvalidInput, "memory_function_empirical: k must be >= 1");
  if (run.split.train_begin + 1 < static_cast<std::size_t>(k)) {
    throw Error(ErrorKind::InsufficientData, "memory_function_empirical: washout too short for delay k");
  }
  return score_task(run, delayed(u, k), ridge_lambda).corr_sq;
}

std::vector<double> mf_analytic(const ResponseKernel& kernel, const Matrix& metric_cov, const Encoder& enc,
                                double eps_rel) {
  if (kernel.n_in() != enc.n_in() || kernel.obs_dim() != metric_cov.rows()) {
    throw Error(ErrorKind::Dimension, "mf_analytic: kernel, metric and encoder disagree in shape");
  }
  const Matrix metric = regularized_inverse(metric_cov, eps_rel);
  const Matrix g_tilde = enc.whitened();
  std::vector<double> out;
  out.reserve(static_cast<std::size_t>(kernel.k_max));
  for (const Matrix& r : kernel.blocks) {
    const Matrix rg = r * g_tilde;
    out.push_back((rg.transpose() * metric * rg).trace());
  }
  return out;
}

double sample_sd(const std::vector<double>& x) {
  if (x.size() < 2) return 0.0;
  const double m = mean(x);
  double acc = 0.0;
  for (double v : x) acc += (v - m) * (v - m);
  return std::sqrt(acc / static_cast<double>(x.size() - 1));
}

NarmaStats narma_r2(const Reservoir& proto, const Encoder& enc, std::size_t steps,
                    const std::vector<std::uint64_t>& seeds, std::size_t washout, double ridge_lambda,
                    std::size_t jobs) {
  NarmaStats stats;
  stats.per_seed.resize(seeds.size());
  parallel_for(seeds.size(), jobs, [&](std::size_t i) {
    const std::vector<double> u = gen_narma_input(steps, seeds[i]);
    std::vector<double> target;
    try {
      target = gen_narma10(u);
    } catch (const Error& e) {
      if (e.kind() != ErrorKind::UnstableTask) throw;
      return;
    }
    const DrivenRun run = drive(proto, enc, u, washout, seeds[i]);
    stats.per_seed[i] = score_task(run, target, ridge_lambda);
  });
  std::vector<double> r2;
  std::vector<double> c2;
  for (const auto& s : stats.per_seed) {
    if (!s) {
      ++stats.skipped;
      continue;
    }
    r2.push_back(s->r2);
    c2.push_back(s->corr_sq);
  }
  if (!r2.empty()) {
    stats.mean_r2 = mean(r2);
    stats.sd_r2 = sample_sd(r2);
    stats.mean_corr_sq = mean(c2);
  }
  return stats;
}

Vector task_only_direction(const ResponseKernel& kernel, const TaskWeights& w) {
  w.validate_against(kernel.k_max);
  Matrix gain = Matrix::Zero(kernel.n_in(), kernel.n_in());
  for (const auto& [k, weight] : w.entries()) gain.noalias() += weight * kernel.at(k).transpose() * kernel.at(k);
  return sym_eig(gain).eigenvectors.col(0);
}

PlaneScan direction_plane_scan(const MemoryOperator& op, const Vector& dir_task, const Vector& dir_rome,
                               double power, int angles, const std::optional<Matrix>& noise_cov) {
  if (dir_task.size() != op.dim() || dir_rome.size() != op.dim()) {
    throw Error(ErrorKind::Dimension, "direction_plane_scan: direction length != operator dimension");
  }
  if (angles < 2) throw Error(ErrorKind::InvalidInput, "direction_plane_scan: need at least 2 angles");
  if (!(dir_task.norm() > 0.0) || !(dir_rome.norm() > 0.0)) {
    throw Error(ErrorKind::InvalidInput, "direction_plane_scan: directions must be nonzero");
  }
  PlaneScan scan;
  scan.axis_rome = dir_rome.normalized();
  Vector b2 = dir_task - scan.axis_rome.dot(dir_task) * scan.axis_rome;
  if (b2.norm() < 1e-10 * dir_task.norm()) {
    throw Error(ErrorKind::DegeneratePlane, "direction_plane_scan: task and ROME directions are parallel");
  }
  scan.axis_task = b2.normalized();
  scan.task_angle = std::atan2(scan.axis_task.dot(dir_task), scan.axis_rome.dot(dir_task));

  const double amp = std::sqrt(power);
  scan.theta.reserve(static_cast<std::size_t>(angles));
  scan.value.reserve(static_cast<std::size_t>(angles));
  for (int i = 0; i < angles; ++i) {
    const double theta = 2.0 * std::numbers::pi * i / angles;
    const Vector g = amp * (std::cos(theta) * scan.axis_rome + std::sin(theta) * scan.axis_task);
    scan.theta.push_back(theta);
    scan.value.push_back(predicted_objective(op.m, g));
  }

  if (noise_cov && noise_cov->rows() == op.dim()) {
    const SymEigResult e = sym_eig(*noise_cov);
    const Vector v = e.eigenvectors.col(e.eigenvectors.cols() - 1);
    const Eigen::Vector2d proj(scan.axis_rome.dot(v), scan.axis_task.dot(v));
    scan.noise_projection = proj;
    scan.noise_angle = std::atan2(proj(1), proj(0));
  }
  return scan;
}

}  // namespace rome
