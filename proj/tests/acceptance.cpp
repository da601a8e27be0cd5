// Acceptance suite: one PASS/FAIL line per criterion. Exit status is the
// number of failed criteria (0 when everything passes).
//
//   acceptance [output-dir]     CSV outputs go to output-dir (default ./acceptance_out)

#include <sys/wait.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <functional>
#include <iostream>
#include <numeric>
#include <string>
#include <vector>

#include <boost/math/distributions/students_t.hpp>
#include <fmt/format.h>

#include "rome/bp.hpp"
#include "rome/commands.hpp"
#include "rome/config.hpp"
#include "rome/encoder.hpp"
#include "rome/error.hpp"
#include "rome/eval.hpp"
#include "rome/io.hpp"
#include "rome/probe.hpp"
#include "rome/reservoirs.hpp"

using namespace rome;
namespace fs = std::filesystem;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

fs::path g_out;
std::vector<MemoryOperator> g_operators;  // every M_w built along the way

ExperimentConfig shipped(const char* name) { return load_config(fs::path(ROME_CONFIG_DIR) / name); }

double mean_of(const std::vector<double>& x) { return std::accumulate(x.begin(), x.end(), 0.0) / x.size(); }

double pooled_sd(const std::vector<double>& a, const std::vector<double>& b) {
  const double sa = sample_sd(a), sb = sample_sd(b);
  return std::sqrt((sa * sa + sb * sb) / 2.0);
}

MemoryOperator keep(MemoryOperator op) {
  g_operators.push_back(op);
  return op;
}

MemoryOperator operator_for(const ExperimentConfig& cfg, const ProbeArtifact& probe, const TaskWeights& w) {
  w.validate_against(probe.kernel.k_max);
  return keep(build_memory_operator(probe.kernel, probe.fluct, w, cfg.probe.eps_rel));
}

MemoryCurve curve_for(const ExperimentConfig& cfg, const Reservoir& res, const Encoder& enc, std::uint64_t seed,
                      int k_max) {
  const auto u = task_input(cfg, cfg.run.t, seed);
  const auto run = drive(res, enc, u, cfg.run.washout, seed, cfg.run.train_fraction);
  return memory_curve(run, u, k_max, cfg.run.ridge);
}

int run_cli(const std::string& args) {
  const std::string cmd = std::string(ROME_CLI_PATH) + " " + args + " > /dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

// ---------------------------------------------------------------------------

Outcome lyapunov_oracle() {
  LinearReservoirParams p;
  p.n = 50;
  p.spectral_radius = 0.9;
  p.noise_sigma = 0.05;
  auto res = LinearReservoir::linear(p);
  auto est = estimate_fluctuations(*res, {200000, 500, 1});
  auto exact = analytic_fluctuations(res->weights(), p.noise_sigma);
  const double err = (est.sigma_ref - exact.sigma_ref).norm() / exact.sigma_ref.norm();
  return {err <= 0.05, fmt::format("relative Frobenius error {:.4f} (tol 0.05)", err)};
}

Outcome response_oracle() {
  LinearReservoirParams p;
  p.n = 50;
  p.noise_sigma = 0.0;
  auto quiet = LinearReservoir::linear(p);
  auto exact = analytic_response(quiet->weights(), 20);
  ResponseOptions opt;
  opt.k_max = 20;
  opt.trials = 1;
  auto clean = estimate_response(*quiet, opt);
  double worst_clean = 0.0;
  for (int k = 1; k <= 20; ++k) worst_clean = std::max(worst_clean, (clean.at(k) - exact.at(k)).cwiseAbs().maxCoeff());

  LinearReservoir noisy(quiet->weights(), 0.05);
  opt.trials = 64;
  opt.common_random_numbers = true;
  auto averaged = estimate_response(noisy, opt);
  double worst_noisy = 0.0;
  for (int k = 1; k <= 20; ++k) {
    worst_noisy = std::max(worst_noisy, (averaged.at(k) - exact.at(k)).norm() / exact.at(k).norm());
  }
  return {worst_clean <= 1e-10 && worst_noisy <= 0.05,
          fmt::format("noise-free max |err| {:.2e} (tol 1e-10); noisy relative err {:.2e} (tol 0.05)", worst_clean,
                      worst_noisy)};
}

Outcome mf_consistency() {
  LinearReservoirParams p;
  auto res = LinearReservoir::linear(p);
  auto kernel = analytic_response(res->weights(), 10);
  const Matrix cov = Matrix::Constant(1, 1, 1.0 / 3.0);
  double worst = 0.0;
  int index = 0;
  for (double power : {0.003, 0.03, 0.3}) {
    for (int rep = 0; rep < 2; ++rep, ++index) {
      auto enc = random_encoder(power, p.n, 1, derive_seed(derive_seed(1, "random-encoder"), index), cov);
      const Matrix driven = analytic_driven_covariance(res->weights(), p.noise_sigma, enc.g, cov);
      const auto predicted = mf_analytic(kernel, driven, enc);
      const auto u = gen_white_input(50000, 1.0, 100 + index);
      const auto run = drive(*res, enc, u, 500, 100 + index);
      const auto curve = memory_curve(run, u, 10);
      for (int k = 0; k < 10; ++k) worst = std::max(worst, std::abs(curve.mf[k] - predicted[k]));
    }
  }
  return {worst <= 0.05, fmt::format("max |MF_analytic − MF_empirical| over k ≤ 10, 6 encoders: {:.4f} (tol 0.05)", worst)};
}

struct LinearSetup {
  ExperimentConfig cfg;
  std::unique_ptr<Reservoir> res;
  ProbeArtifact probe;
};

LinearSetup& linear_setup() {
  static LinearSetup s = [] {
    LinearSetup x;
    x.cfg = shipped("linear_memory.toml");
    x.res = make_reservoir(x.cfg.model);
    x.probe = run_probe(x.cfg, *x.res, false, 1);
    return x;
  }();
  return s;
}

Outcome linear_families() {
  auto& s = linear_setup();
  const auto& cfg = s.cfg;
  const int k_max = cfg.run.eval_k_max;
  const int k0 = cfg.task.delays.front();
  const double power = cfg.encoder.power;
  const auto& seeds = cfg.run.seeds;
  const auto n_in = static_cast<Eigen::Index>(s.res->n_in());

  auto seed_mean_curve = [&](const Encoder& enc) {
    std::vector<double> mean(static_cast<std::size_t>(k_max), 0.0);
    std::vector<double> at_k0;
    for (auto seed : seeds) {
      auto c = curve_for(cfg, *s.res, enc, seed, k_max);
      for (int k = 0; k < k_max; ++k) mean[k] += c.mf[k] / seeds.size();
      at_k0.push_back(c.mf[k0 - 1]);
    }
    return std::pair{mean, at_k0};
  };

  // Single-delay optimum per k, and the other families.
  std::vector<double> optimum(static_cast<std::size_t>(k_max));
  std::vector<double> rome_k0_seeds;
  std::vector<std::vector<double>> rome_k0_curve;
  for (int k = 1; k <= k_max; ++k) {
    auto enc = rome_encoder(cfg, operator_for(cfg, s.probe, TaskWeights::single(k)), power);
    auto [curve, at_k0] = seed_mean_curve(enc);
    optimum[k - 1] = curve[k - 1];
    if (k == k0) {
      rome_k0_seeds = at_k0;
      rome_k0_curve.push_back(curve);
    }
  }
  struct Family {
    std::string name;
    TaskWeights w;
  };
  const std::vector<Family> families{{"mc_optimal", TaskWeights::uniform(k_max)},
                                     {"short", TaskWeights({{2, 1.0}, {3, 1.0}, {4, 1.0}})},
                                     {"long", TaskWeights({{20, 1.0}, {22, 1.0}, {24, 1.0}})}};
  std::vector<std::pair<std::string, std::vector<double>>> curves;
  curves.emplace_back("rome_k0", rome_k0_curve.front());
  for (const auto& f : families) {
    auto enc = rome_encoder(cfg, operator_for(cfg, s.probe, f.w), power);
    curves.emplace_back(f.name, seed_mean_curve(enc).first);
  }

  // Random baseline: encoder i on run seed seeds[i mod n].
  const std::uint64_t base = derive_seed(cfg.seed, "random-baseline");
  const auto count = static_cast<std::size_t>(cfg.encoder.random_count);
  std::vector<std::vector<double>> random_mf;
  for (std::size_t i = 0; i < count; ++i) {
    auto enc = config_random_encoder(cfg, power, n_in, derive_seed(base, i));
    random_mf.push_back(curve_for(cfg, *s.res, enc, seeds[i % seeds.size()], k_max).mf);
  }
  std::vector<double> random_mean(k_max, 0.0), random_max(k_max, 0.0), random_k0;
  for (const auto& c : random_mf) {
    for (int k = 0; k < k_max; ++k) {
      random_mean[k] += c[k] / count;
      random_max[k] = std::max(random_max[k], c[k]);
    }
    random_k0.push_back(c[k0 - 1]);
  }
  curves.emplace_back("random_mean", random_mean);
  curves.emplace_back("random_max", random_max);

  CsvTable table({"k", "single_delay_optimum", "rome_k0", "mc_optimal", "short", "long", "random_mean", "random_max"});
  double worst_excess = -1.0;
  std::string worst_where;
  for (int k = 0; k < k_max; ++k) {
    std::vector<std::string> row{std::to_string(k + 1), fmt_num(optimum[k])};
    for (const auto& [name, c] : curves) {
      row.push_back(fmt_num(c[k]));
      if (c[k] - optimum[k] > worst_excess) {
        worst_excess = c[k] - optimum[k];
        worst_where = fmt::format("{} at k={}", name, k + 1);
      }
    }
    table.add(row);
  }
  write_text_file(g_out / "linear_families.csv", table.str());

  const double rome_mean = mean_of(rome_k0_seeds);
  const double rand_mean = mean_of(random_k0);
  const double rand_max = *std::max_element(random_k0.begin(), random_k0.end());
  const double pooled = pooled_sd(rome_k0_seeds, random_k0);
  const double margin = (rome_mean - rand_mean) / pooled;
  const bool pass = margin >= 3.0 && rome_mean >= rand_max && worst_excess <= 0.02;
  return {pass, fmt::format("MF({}) ROME {:.4f} vs random mean {:.4f} / max {:.4f}: {:.1f} pooled SD (need 3); "
                            "largest excess over the single-delay optimum {:+.4f} ({}) (tol 0.02)",
                            k0, rome_mean, rand_mean, rand_max, margin, worst_excess, worst_where)};
}

Outcome rayleigh() {
  double worst = -std::numeric_limits<double>::infinity();
  std::size_t directions = 0;
  for (std::size_t i = 0; i < g_operators.size(); ++i) {
    const auto& op = g_operators[i];
    Rng rng(derive_seed(7, i));
    for (int d = 0; d < 1000; ++d, ++directions) {
      Vector v(op.dim());
      for (Eigen::Index j = 0; j < v.size(); ++j) v(j) = rng.normal();
      v.normalize();
      worst = std::max(worst, v.dot(op.m * v) / op.lambda_max() - 1.0);
    }
  }
  return {!g_operators.empty() && worst <= 1e-10,
          fmt::format("{} operators, {} directions: max vᵀMv/λ1 − 1 = {:.3e} (tol 1e-10)", g_operators.size(),
                      directions, worst)};
}

Outcome ascent() {
  auto& s = linear_setup();
  const auto& cfg = s.cfg;
  const double power = cfg.encoder.power;
  auto op = operator_for(cfg, s.probe, cfg.task.task_weights(cfg.probe.k_max));
  const Encoder reference = rome_encoder(cfg, op, power);
  AscentOptions ao;
  ao.eta = cfg.ascent.eta_scale / op.lambda_max();
  ao.steps = cfg.ascent.steps;
  ao.eval_every = cfg.ascent.eval_every;

  auto score = [&](const Encoder& e) {
    std::vector<double> r;
    for (auto seed : cfg.run.seeds) r.push_back(task_score(cfg, *s.res, e, seed));
    return mean_of(r);
  };
  const double rome_r2 = score(reference);
  const std::uint64_t base = derive_seed(cfg.seed, "ascent-start");
  double worst_align = 1.0, worst_gap = 0.0;
  for (int start = 0; start < 10; ++start) {
    auto enc0 = config_random_encoder(cfg, power, op.dim(), derive_seed(base, static_cast<std::uint64_t>(start)));
    auto trace = projected_gradient_ascent(op, enc0, power, ao, reference);
    Encoder final_enc = trace.final_encoder;
    if (final_enc.g.cwiseProduct(reference.g).sum() < 0.0) final_enc.g = -final_enc.g;
    worst_align = std::min(worst_align, trace.records.back().alignment);
    worst_gap = std::max(worst_gap, std::abs(score(final_enc) - rome_r2));
  }
  return {worst_align >= 0.99 && worst_gap <= 0.02,
          fmt::format("10 starts: min alignment {:.6f} (need 0.99); max |R² − R²_ROME| {:.2e} (tol 0.02), "
                      "R²_ROME {:.4f}",
                      worst_align, worst_gap, rome_r2)};
}

std::string narma_grid_csv(const ExperimentConfig& cfg, const Reservoir& res, const MemoryOperator& op,
                           std::vector<std::vector<double>>* rome_r2, std::vector<std::vector<double>>* rand_r2) {
  const auto grid = cfg.sweep.power_grid();
  const std::uint64_t base = derive_seed(cfg.seed, "sweep-random");
  CsvTable table({"power", "seed", "rome_r2", "random_r2"});
  for (double power : grid) {
    std::vector<double> a, b;
    const Encoder rome = rome_encoder(cfg, op, power);
    for (auto seed : cfg.run.seeds) {
      const Encoder random = config_random_encoder(cfg, power, op.dim(), derive_seed(base, seed));
      a.push_back(task_score(cfg, res, rome, seed));
      b.push_back(task_score(cfg, res, random, seed));
      table.add({fmt_num(power), std::to_string(seed), fmt_num(a.back()), fmt_num(b.back())});
    }
    if (rome_r2) rome_r2->push_back(a);
    if (rand_r2) rand_r2->push_back(b);
  }
  return table.str();
}

struct EsnSetup {
  ExperimentConfig cfg;
  std::unique_ptr<Reservoir> res;
  MemoryOperator op;
};

EsnSetup& esn_setup() {
  static EsnSetup s = [] {
    EsnSetup x;
    x.cfg = shipped("esn_narma.toml");
    x.res = make_reservoir(x.cfg.model);
    const auto probe = run_probe(x.cfg, *x.res, false, 1);
    x.op = operator_for(x.cfg, probe, x.cfg.task.task_weights(x.cfg.probe.k_max));
    return x;
  }();
  return s;
}

Outcome narma() {
  auto& s = esn_setup();
  std::vector<std::vector<double>> rome_r2, rand_r2;
  const std::string csv = narma_grid_csv(s.cfg, *s.res, s.op, &rome_r2, &rand_r2);
  write_text_file(g_out / "esn_narma_power.csv", csv);
  const auto grid = s.cfg.sweep.power_grid();
  const std::size_t n = s.cfg.run.seeds.size();
  bool pass = n >= 20;
  std::string detail = fmt::format("{} seeds", n);
  for (std::size_t g = 0; g < 2; ++g) {
    std::vector<double> d;
    for (std::size_t i = 0; i < n; ++i) d.push_back(rome_r2[g][i] - rand_r2[g][i]);
    const double t = mean_of(d) / (sample_sd(d) / std::sqrt(static_cast<double>(n)));
    const boost::math::students_t dist(static_cast<double>(n - 1));
    const double p = boost::math::cdf(boost::math::complement(dist, t));
    pass = pass && mean_of(rome_r2[g]) > mean_of(rand_r2[g]) && p < 0.05;
    detail += fmt::format("; P={:.3g}: ROME {:.4f} vs random {:.4f}, paired t={:.2f}, p={:.2e}", grid[g],
                          mean_of(rome_r2[g]), mean_of(rand_r2[g]), t, p);
  }
  std::string crossover = "none";
  for (std::size_t g = 0; g < grid.size(); ++g) {
    if (mean_of(rand_r2[g]) > mean_of(rome_r2[g])) {
      crossover = fmt::format("P={:.3g}", grid[g]);
      break;
    }
  }
  detail += fmt::format(" (crossover on the grid: {}, not asserted)", crossover);
  return {pass, detail};
}

// Per-delay ROME encoders against one shared random baseline, delay-k R².
struct DelayComparison {
  std::vector<int> delays;
  std::vector<std::vector<double>> rome;    // [delay][seed]
  std::vector<std::vector<double>> random;  // [delay][encoder]
};

DelayComparison compare_delays(const ExperimentConfig& cfg, const Reservoir& res, const ProbeArtifact& probe,
                               const std::vector<int>& delays, const std::string& csv_name) {
  DelayComparison out;
  out.delays = delays;
  const int k_max = *std::max_element(delays.begin(), delays.end());
  const auto& seeds = cfg.run.seeds;
  const double power = cfg.encoder.power;
  CsvTable table({"encoder", "seed", "k", "r2"});
  for (int k0 : delays) {
    const Encoder enc = rome_encoder(cfg, operator_for(cfg, probe, TaskWeights::single(k0)), power);
    std::vector<double> r2;
    for (auto seed : seeds) {
      r2.push_back(curve_for(cfg, res, enc, seed, k_max).r2[k0 - 1]);
      table.add({fmt::format("rome_k{}", k0), std::to_string(seed), std::to_string(k0), fmt_num(r2.back())});
    }
    out.rome.push_back(r2);
  }
  out.random.assign(delays.size(), {});
  const std::uint64_t base = derive_seed(cfg.seed, "random-baseline");
  for (int i = 0; i < cfg.encoder.random_count; ++i) {
    const Encoder enc = config_random_encoder(cfg, power, static_cast<Eigen::Index>(res.n_in()),
                                              derive_seed(base, static_cast<std::uint64_t>(i)));
    const auto seed = seeds[static_cast<std::size_t>(i) % seeds.size()];
    const auto curve = curve_for(cfg, res, enc, seed, k_max);
    for (std::size_t d = 0; d < delays.size(); ++d) {
      out.random[d].push_back(curve.r2[delays[d] - 1]);
      table.add({fmt::format("random_{}", i), std::to_string(seed), std::to_string(delays[d]),
                 fmt_num(out.random[d].back())});
    }
  }
  write_text_file(g_out / csv_name, table.str());
  return out;
}

Outcome spinwave() {
  auto cfg = shipped("spinwave.toml");
  auto res = make_reservoir(cfg.model);
  const auto probe = run_probe(cfg, *res, false, 1);
  const auto cmp = compare_delays(cfg, *res, probe, {15, 25}, "spinwave_delays.csv");
  bool pass = true;
  std::string detail;
  for (std::size_t d = 0; d < cmp.delays.size(); ++d) {
    const double margin = (mean_of(cmp.rome[d]) - mean_of(cmp.random[d])) / pooled_sd(cmp.rome[d], cmp.random[d]);
    pass = pass && margin >= 2.0;
    detail += fmt::format("{}k0={}: ROME R² {:.4f} vs random {:.4f} ± {:.4f}, {:.1f} pooled SD (need 2)",
                          d ? "; " : "", cmp.delays[d], mean_of(cmp.rome[d]), mean_of(cmp.random[d]),
                          sample_sd(cmp.random[d]), margin);
  }
  return {pass, detail};
}

Outcome snn() {
  auto cfg = shipped("snn.toml");
  auto res = make_reservoir(cfg.model);
  const auto probe = run_probe(cfg, *res, false, 1);
  const auto cmp = compare_delays(cfg, *res, probe, {1, 2}, "snn_delays.csv");
  bool ordered = cfg.run.seeds.size() >= 10;
  double max_sd = 0.0;
  std::string detail = fmt::format("{} seeds", cfg.run.seeds.size());
  for (std::size_t d = 0; d < cmp.delays.size(); ++d) {
    ordered = ordered && mean_of(cmp.rome[d]) >= mean_of(cmp.random[d]);
    max_sd = std::max(max_sd, sample_sd(cmp.random[d]));
    detail += fmt::format("; k={}: ROME R² {:.4f} vs random {:.4f} (sd {:.4f})", cmp.delays[d], mean_of(cmp.rome[d]),
                          mean_of(cmp.random[d]), sample_sd(cmp.random[d]));
  }
  detail += fmt::format("; max random sd {:.4f} (need > 0.1)", max_sd);
  return {ordered && max_sd > 0.1, detail};
}

Outcome ar1() {
  const double g = 1.0, var_u = 1.0 / 3.0;
  CsvTable table({"w", "sigma_xi", "k", "mf_empirical", "mf_closed_form"});
  double worst = 0.0;
  for (double w : {0.3, 0.6, 0.9}) {
    for (double sigma : {0.1, 0.3, 0.6}) {
      LinearReservoir res(Matrix::Constant(1, 1, w), sigma);
      Encoder enc;
      enc.g = Matrix::Constant(1, 1, g);
      enc.input_cov = Matrix::Constant(1, 1, var_u);
      enc.power = g * g * var_u;
      const auto u = gen_white_input(50000, 1.0, 21);
      const auto run = drive(res, enc, u, 500, 21);
      const auto curve = memory_curve(run, u, 8);
      for (int k = 1; k <= 8; ++k) {
        const double signal = g * g * var_u;
        const double closed = signal * std::pow(w, 2.0 * (k - 1)) * (1.0 - w * w) / (signal + sigma * sigma);
        worst = std::max(worst, std::abs(curve.mf[k - 1] - closed));
        table.add({fmt_num(w), fmt_num(sigma), std::to_string(k), fmt_num(curve.mf[k - 1]), fmt_num(closed)});
      }
    }
  }
  write_text_file(g_out / "ar1.csv", table.str());
  return {worst <= 0.05, fmt::format("3×3 (w, σ_ξ) grid, k ≤ 8: max |error| {:.4f} (tol 0.05)", worst)};
}

Outcome equivalence() {
  LinearReservoirParams p;
  p.n = 40;
  auto res = LinearReservoir::linear(p);
  double worst = 0.0;
  for (std::uint64_t rep = 0; rep < 4; ++rep) {
    const auto enc = random_encoder(0.05, p.n, 1, 300 + rep, Matrix::Constant(1, 1, 1.0 / 3.0));
    const auto u = gen_white_input(6000, 1.0, 400 + rep);
    const auto run = drive(*res, enc, u, 200, 500 + rep);
    const auto b = static_cast<Eigen::Index>(run.split.train_begin);
    const auto len = static_cast<Eigen::Index>(run.split.train_end - run.split.train_begin);
    const Matrix x = run.observations.middleRows(b, len);
    for (int k : {1, 3, 7, 15}) {
      const auto target = delayed(u, k);
      Matrix y(len, 1);
      for (Eigen::Index i = 0; i < len; ++i) y(i, 0) = target[static_cast<std::size_t>(b + i)];
      const auto model = fit_readout(x, y, 0.0);
      const Vector pred = model.predict(x).col(0);
      const Vector yt = y.col(0);
      const double sse = (pred - yt).squaredNorm();
      const double sst = (yt.array() - yt.mean()).matrix().squaredNorm();
      worst = std::max(worst, std::abs((1.0 - sse / sst) - pearson_corr_sq(as_span(pred), as_span(yt))));
    }
  }
  return {worst <= 1e-10, fmt::format("max |1 − E★/Var − corr²| over 16 fits: {:.2e} (tol 1e-10)", worst)};
}

Outcome determinism() {
  const fs::path cfg = fs::path(ROME_CONFIG_DIR) / "esn_narma.toml";
  std::vector<std::string> failures;
  auto pipeline = [&](const fs::path& dir, int jobs) {
    fs::remove_all(dir);
    const std::string common = fmt::format(" --config {} --out {} --jobs {}", cfg.string(), dir.string(), jobs);
    for (const char* cmd : {"probe", "optimize", "evaluate", "sweep"}) {
      const int rc = run_cli(cmd + common);
      if (rc != 0) failures.push_back(fmt::format("{} exited {}", cmd, rc));
    }
  };
  const fs::path a = g_out / "determinism_a", b = g_out / "determinism_b";
  pipeline(a, 1);
  pipeline(b, 2);
  std::size_t compared = 0;
  for (const auto& entry : fs::directory_iterator(a)) {
    if (entry.path().extension() != ".csv") continue;
    ++compared;
    const fs::path other = b / entry.path().filename();
    if (!fs::exists(other) || read_text_file(entry.path()) != read_text_file(other)) {
      failures.push_back(entry.path().filename().string() + " differs");
    }
  }

  // The in-process NARMA grid, recomputed.
  auto& s = esn_setup();
  const std::string again = narma_grid_csv(s.cfg, *s.res, s.op, nullptr, nullptr);
  ++compared;
  if (again != read_text_file(g_out / "esn_narma_power.csv")) failures.push_back("esn_narma_power.csv differs");

  std::string detail = fmt::format("{} CSV files byte-compared across reruns", compared);
  for (const auto& f : failures) detail += "; " + f;
  return {failures.empty() && compared >= 4, detail};
}

}  // namespace

int main(int argc, char** argv) {
  g_out = argc > 1 ? fs::path(argv[1]) : fs::path("acceptance_out");
  fs::create_directories(g_out);

  struct Criterion {
    int id;
    const char* name;
    double limit_seconds;  // 0: no runtime bound
    std::function<Outcome()> run;
  };
  // Rayleigh runs after every experiment that builds an operator.
  const std::vector<Criterion> criteria{
      {1, "Lyapunov oracle", 30, lyapunov_oracle},
      {2, "response oracle", 60, response_oracle},
      {3, "MF consistency", 0, mf_consistency},
      {4, "linear single-delay memory", 300, linear_families},
      {6, "gradient ascent equivalence", 120, ascent},
      {7, "ESN NARMA10 low power", 0, narma},
      {8, "spin-wave delays", 600, spinwave},
      {9, "SNN delays", 1200, snn},
      {10, "AR(1) closed form", 0, ar1},
      {11, "OLS equivalence identity", 0, equivalence},
      {5, "Rayleigh optimality", 0, rayleigh},
      {12, "determinism", 0, determinism},
  };

  std::vector<std::pair<int, std::string>> lines;
  int failed = 0;
  for (const auto& c : criteria) {
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o = {false, std::string("error: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    std::string timing = fmt::format("{:.1f} s", secs);
    if (c.limit_seconds > 0) {
      timing += fmt::format(" (limit {:.0f} s)", c.limit_seconds);
      if (secs > c.limit_seconds) {
        o.pass = false;
        o.detail += "; over the time limit";
      }
    }
    if (!o.pass) ++failed;
    const std::string line = fmt::format("[{}] {:2d} {}: {}; {}", o.pass ? "PASS" : "FAIL", c.id, c.name, o.detail, timing);
    std::cout << line << std::endl;
    lines.emplace_back(c.id, line);
  }

  std::sort(lines.begin(), lines.end());
  std::string summary;
  for (const auto& [id, line] : lines) summary += line + "\n";
  write_text_file(g_out / "summary.txt", summary);
  std::cout << fmt::format("{} of {} criteria passed", criteria.size() - failed, criteria.size()) << std::endl;
  return failed;
}
