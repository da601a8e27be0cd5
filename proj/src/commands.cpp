#include "rome/commands.hpp"

#include <cmath>
#include <iostream>

#include <fmt/format.h>

#include "rome/bp.hpp"
#include "rome/error.hpp"
#include "rome/eval.hpp"
#include "rome/parallel.hpp"
#include "rome/probe.hpp"
#include "rome/rng.hpp"
#include "rome/svg.hpp"

#ifndef ROME_VERSION
#define ROME_VERSION "0.0.0"
#endif

namespace rome {

namespace fs = std::filesystem;
using nlohmann::json;

// ---------------------------------------------------------------------------
// Manifest

Manifest::Manifest(fs::path dir, const ExperimentConfig& cfg, std::string command)
    : dir_(std::move(dir)), command_(std::move(command)), start_(std::chrono::steady_clock::now()) {
  const fs::path file = dir_ / "manifest.json";
  if (fs::exists(file)) {
    try {
      doc_ = read_json_file(file);
    } catch (const Error&) {
      doc_ = json::object();
    }
  }
  if (!doc_.is_object()) doc_ = json::object();
  doc_["tool"] = "rome";
  doc_["version"] = ROME_VERSION;
  if (!doc_.contains("artifacts")) doc_["artifacts"] = json::object();
  json entry;
  entry["config_hash"] = sha256_hex(cfg.source);
  entry["config"] = cfg.to_json();
  entry["status"] = "running";
  entry["artifacts"] = json::array();
  doc_["commands"][command_] = std::move(entry);
  write();
}

void Manifest::add_artifact(const fs::path& file) {
  const std::string name = file.filename().string();
  doc_["artifacts"][name] = sha256_hex(read_text_file(file));
  auto& list = doc_["commands"][command_]["artifacts"];
  if (std::find(list.begin(), list.end(), name) == list.end()) list.push_back(name);
}

void Manifest::note(const std::string& key, json value) { doc_["commands"][command_][key] = std::move(value); }

void Manifest::finish(const std::string& status) {
  auto& entry = doc_["commands"][command_];
  entry["status"] = status;
  entry["wall_seconds"] = std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
  write();
}

void Manifest::write() const { write_json_file(dir_ / "manifest.json", doc_); }

namespace {

fs::path out_dir(const ExperimentConfig& cfg, const CommandOptions& opt) {
  return opt.out_dir ? *opt.out_dir : fs::path(cfg.output.dir);
}

void write_artifact(Manifest& manifest, const fs::path& file, std::string_view text) {
  write_text_file(file, text);
  manifest.add_artifact(file);
}

ProbeArtifact load_probe(const ExperimentConfig& cfg, const CommandOptions& opt, std::string* hash) {
  const fs::path path = opt.probe_path ? *opt.probe_path : out_dir(cfg, opt) / "probe.json";
  if (!fs::exists(path)) {
    throw Error(ErrorKind::Io, fmt::format("probe artifact {} not found (run `probe` first or pass --probe)",
                                           path.string()));
  }
  if (hash != nullptr) *hash = sha256_hex(read_text_file(path));
  return probe_from_json(read_json_file(path));
}

void check_single_channel(const Encoder& enc) {
  if (enc.channels() != 1) {
    throw Error(ErrorKind::Config, "evaluation drives one scalar input; use an encoder with channels = 1");
  }
}

Encoder load_encoder(const ExperimentConfig& cfg, const CommandOptions& opt, const Reservoir& res) {
  Encoder enc;
  if (cfg.encoder.kind == "random" && !opt.encoder_path) {
    enc = config_random_encoder(cfg, cfg.encoder.power, static_cast<Eigen::Index>(res.n_in()),
                                derive_seed(cfg.seed, "random-encoder"));
  } else {
    fs::path path = opt.encoder_path ? *opt.encoder_path : out_dir(cfg, opt) / "encoder.json";
    if (!opt.encoder_path && cfg.encoder.kind == "file") path = cfg.encoder.path;
    if (!fs::exists(path)) {
      throw Error(ErrorKind::Io, fmt::format("encoder {} not found (run `optimize` first or pass --encoder)",
                                             path.string()));
    }
    enc = encoder_from_json(read_json_file(path));
  }
  if (enc.n_in() != static_cast<Eigen::Index>(res.n_in())) {
    throw Error(ErrorKind::Dimension,
                fmt::format("encoder has n_in = {}, model expects {}", enc.n_in(), res.n_in()));
  }
  check_single_channel(enc);
  return enc;
}

struct RowStats {
  double mean = 0.0;
  double sd = 0.0;
};

RowStats stats(const std::vector<double>& v) {
  RowStats s;
  if (v.empty()) return {std::nan(""), std::nan("")};
  double sum = 0.0;
  for (double x : v) sum += x;
  s.mean = sum / static_cast<double>(v.size());
  s.sd = v.size() > 1 ? sample_sd(v) : 0.0;
  return s;
}

/// Memory curves per run; failures of individual runs are kept as messages.
struct CurveSet {
  std::vector<std::optional<MemoryCurve>> curves;
  std::vector<std::string> errors;
  std::size_t failed = 0;
};

MemoryCurve run_curve(const ExperimentConfig& cfg, const Reservoir& res, const Encoder& enc, std::uint64_t seed) {
  const auto u = task_input(cfg, cfg.run.t, seed);
  const auto run = drive(res, enc, u, cfg.run.washout, seed, cfg.run.train_fraction);
  return memory_curve(run, u, cfg.run.eval_k_max, cfg.run.ridge);
}

CurveSet curves_for(const ExperimentConfig& cfg, const Reservoir& res, const std::vector<Encoder>& encs,
                    const std::vector<std::uint64_t>& seeds, std::size_t jobs) {
  CurveSet set;
  set.curves.resize(seeds.size());
  set.errors.resize(seeds.size());
  parallel_for(seeds.size(), jobs, [&](std::size_t i) {
    try {
      set.curves[i] = run_curve(cfg, res, encs[i], seeds[i]);
    } catch (const Error& e) {
      if (e.is_config()) throw;
      set.errors[i] = e.what();
    }
  });
  for (const auto& c : set.curves) set.failed += c ? 0 : 1;
  return set;
}

void add_aggregate_rows(CsvTable& table, const CurveSet& set, int k_max, bool with_encoder_column) {
  for (const char* which : {"mean", "sd"}) {
    for (int k = 1; k <= k_max; ++k) {
      std::vector<double> mf, r2;
      for (const auto& c : set.curves) {
        if (!c) continue;
        mf.push_back(c->mf[static_cast<std::size_t>(k - 1)]);
        r2.push_back(c->r2[static_cast<std::size_t>(k - 1)]);
      }
      const RowStats smf = stats(mf), sr2 = stats(r2);
      const bool is_mean = std::string(which) == "mean";
      std::vector<std::string> row;
      if (with_encoder_column) row.push_back(which);
      row.push_back(with_encoder_column ? "" : which);
      row.push_back(std::to_string(k));
      row.push_back(fmt_num(is_mean ? smf.mean : smf.sd));
      row.push_back(fmt_num(is_mean ? sr2.mean : sr2.sd));
      table.add(std::move(row));
    }
  }
}

std::vector<double> curve_mean(const CurveSet& set, int k_max, bool sd) {
  std::vector<double> out;
  for (int k = 1; k <= k_max; ++k) {
    std::vector<double> v;
    for (const auto& c : set.curves) {
      if (c) v.push_back(c->mf[static_cast<std::size_t>(k - 1)]);
    }
    const RowStats s = stats(v);
    out.push_back(sd ? s.sd : s.mean);
  }
  return out;
}

std::string delay_metric(const char* what, int k) { return fmt::format("{}_k{}", what, k); }

// ±G encode the same direction; score with the sign that matches the reference.
Encoder sign_aligned(const Encoder& e, const Encoder& reference) {
  Encoder out = e;
  if (e.g.cwiseProduct(reference.g).sum() < 0.0) out.g = -out.g;
  return out;
}

}  // namespace

// ---------------------------------------------------------------------------
// Building blocks

double default_epsilon(const ExperimentConfig& cfg, const FluctuationEstimate& fluct) {
  if (cfg.probe.epsilon) return *cfg.probe.epsilon;
  if (cfg.model.type == "spinwave") {
    const double scale = fluct.mean.size() > 0 ? fluct.mean.cwiseAbs().mean() : 0.0;
    return scale > 0.0 ? 1e-2 * scale : 1e-3;
  }
  if (cfg.model.type == "snn") {
    const auto& p = cfg.model.snn;
    const double rheobase = 0.5 * (p.v_th_range.first + p.v_th_range.second) - p.v_rest;
    return 0.05 * rheobase;
  }
  return 1e-3;
}

ProbeArtifact run_probe(const ExperimentConfig& cfg, const Reservoir& res, bool analytic, std::size_t jobs) {
  ProbeArtifact a;
  json meta;
  meta["model"] = res.model();
  meta["params"] = res.params_json();
  meta["params_hash"] = json_hash(meta["params"]);
  meta["seed"] = cfg.seed;
  meta["analytic"] = analytic;
  if (analytic) {
    const auto* lin = dynamic_cast<const LinearReservoir*>(&res);
    if (lin == nullptr || res.model() != "linear") {
      throw Error(ErrorKind::Config, "--analytic probing is only available for the linear model");
    }
    a.fluct = analytic_fluctuations(lin->weights(), lin->noise_sigma());
    a.kernel = analytic_response(lin->weights(), cfg.probe.k_max);
  } else {
    const std::uint64_t fluct_seed = derive_seed(cfg.seed, "probe-fluctuations");
    const std::uint64_t response_seed = derive_seed(cfg.seed, "probe-response");
    a.fluct = estimate_fluctuations(res, {cfg.probe.t, cfg.probe.burn_in, fluct_seed});
    ResponseOptions ro;
    ro.k_max = cfg.probe.k_max;
    ro.epsilon = default_epsilon(cfg, a.fluct);
    ro.trials = cfg.probe.resolved_trials(cfg.model.type);
    ro.burn_in = cfg.probe.burn_in;
    ro.seed = response_seed;
    ro.jobs = jobs;
    ro.common_random_numbers = cfg.probe.common_random_numbers;
    a.kernel = estimate_response(res, ro);
    meta["fluctuation_seed"] = fluct_seed;
    meta["response_seed"] = response_seed;
    meta["steps"] = cfg.probe.t;
    meta["burn_in"] = cfg.probe.burn_in;
  }
  a.metadata = std::move(meta);
  return a;
}

MemoryOperator operator_from_probe(const ExperimentConfig& cfg, const ProbeArtifact& probe) {
  const TaskWeights w = cfg.task.task_weights(probe.kernel.k_max);
  w.validate_against(probe.kernel.k_max);
  return build_memory_operator(probe.kernel, probe.fluct, w, cfg.probe.eps_rel);
}

Encoder rome_encoder(const ExperimentConfig& cfg, const MemoryOperator& op, double power) {
  EncoderRequest req;
  req.power = power;
  req.r = cfg.encoder.r;
  req.channels = cfg.encoder.channels;
  if (!cfg.encoder.power_split.empty()) req.power_split = cfg.encoder.power_split;
  req.input_cov = cfg.input_cov();
  if (cfg.encoder.channels > 1) {
    Matrix cov = Matrix::Zero(cfg.encoder.channels, cfg.encoder.channels);
    cov.diagonal().setConstant(cfg.input_cov()(0, 0));
    req.input_cov = cov;
  }
  return optimal_encoder(op, req);
}

Encoder config_random_encoder(const ExperimentConfig& cfg, double power, Eigen::Index n_in, std::uint64_t seed) {
  Matrix cov = Matrix::Zero(cfg.encoder.channels, cfg.encoder.channels);
  cov.diagonal().setConstant(cfg.input_cov()(0, 0));
  return random_encoder(power, n_in, cfg.encoder.channels, seed, cov);
}

std::vector<double> task_input(const ExperimentConfig& cfg, std::size_t steps, std::uint64_t seed) {
  if (cfg.task.kind == "narma10") return gen_narma_input(steps, seed);
  return gen_white_input(steps, cfg.run.input_amplitude, seed);
}

double task_score(const ExperimentConfig& cfg, const Reservoir& res, const Encoder& enc, std::uint64_t seed) {
  const auto u = task_input(cfg, cfg.run.t, seed);
  const auto run = drive(res, enc, u, cfg.run.washout, seed, cfg.run.train_fraction);
  if (cfg.task.kind == "narma10") return score_task(run, gen_narma10(u), cfg.run.ridge).r2;
  if (cfg.task.kind == "mc") {
    return memory_curve(run, u, cfg.task.task_weights(cfg.probe.k_max).max_delay(), cfg.run.ridge).capacity;
  }
  const TaskWeights w = cfg.task.task_weights(cfg.probe.k_max);
  double total = 0.0, norm = 0.0;
  for (const auto& [k, wk] : w.entries()) {
    if (wk == 0.0) continue;
    total += wk * score_task(run, delayed(u, k), cfg.run.ridge).r2;
    norm += wk;
  }
  return norm > 0.0 ? total / norm : 0.0;
}

// ---------------------------------------------------------------------------
// Commands

int cmd_probe(const ExperimentConfig& cfg, const CommandOptions& opt) {
  const fs::path dir = out_dir(cfg, opt);
  const auto res = make_reservoir(cfg.model);
  Manifest manifest(dir, cfg, "probe");
  const ProbeArtifact a = run_probe(cfg, *res, opt.analytic, opt.jobs);
  for (const auto& w : a.fluct.warnings) warn(w);
  for (const auto& w : a.kernel.warnings) warn(w);
  write_artifact(manifest, dir / "probe.json", probe_to_json(a).dump(2) + "\n");
  manifest.note("epsilon", a.kernel.probe_amplitude);
  manifest.finish("ok");
  return kExitOk;
}

int cmd_optimize(const ExperimentConfig& cfg, const CommandOptions& opt) {
  const fs::path dir = out_dir(cfg, opt);
  Manifest manifest(dir, cfg, "optimize");
  std::string probe_hash;
  const ProbeArtifact probe = load_probe(cfg, opt, &probe_hash);
  const MemoryOperator op = operator_from_probe(cfg, probe);

  EncoderProvenance prov;
  prov.operator_hash = json_hash(matrix_to_json(op.m));
  prov.probe_hash = probe_hash;
  prov.weights = op.weights.entries();
  Encoder enc;
  if (cfg.encoder.kind == "rome") {
    enc = rome_encoder(cfg, op, cfg.encoder.power);
    prov.kind = "rome";
  } else if (cfg.encoder.kind == "random") {
    enc = config_random_encoder(cfg, cfg.encoder.power, op.dim(), derive_seed(cfg.seed, "random-encoder"));
    enc.predicted_objective = predicted_objective(op, enc);
    prov.kind = "random";
  } else {
    throw Error(ErrorKind::Config, "optimize builds rome or random encoders; kind = \"file\" is for evaluate");
  }
  for (const auto& w : enc.warnings) warn(w);

  CsvTable spectrum({"index", "eigenvalue"});
  for (Eigen::Index i = 0; i < op.eigen.eigenvalues.size(); ++i) {
    spectrum.add({std::to_string(i + 1), fmt_num(op.eigen.eigenvalues(i))});
  }
  write_artifact(manifest, dir / "encoder.json", encoder_to_json(enc, prov).dump(2) + "\n");
  write_artifact(manifest, dir / "spectrum.csv", spectrum.str());
  manifest.note("predicted_objective", std::isfinite(enc.predicted_objective) ? json(enc.predicted_objective) : json());
  manifest.note("degenerate", enc.degenerate);
  manifest.finish("ok");
  return kExitOk;
}

int cmd_evaluate(const ExperimentConfig& cfg, const CommandOptions& opt) {
  const fs::path dir = out_dir(cfg, opt);
  const auto res = make_reservoir(cfg.model);
  Manifest manifest(dir, cfg, "evaluate");
  const Encoder enc = load_encoder(cfg, opt, *res);
  const auto& seeds = cfg.run.seeds;
  const int k_max = cfg.run.eval_k_max;

  const CurveSet main = curves_for(cfg, *res, std::vector<Encoder>(seeds.size(), enc), seeds, opt.jobs);
  CsvTable metrics({"seed", "k", "mf", "r2"});
  for (std::size_t i = 0; i < seeds.size(); ++i) {
    if (!main.curves[i]) continue;
    for (int k = 1; k <= k_max; ++k) {
      const auto kk = static_cast<std::size_t>(k - 1);
      metrics.add({std::to_string(seeds[i]), std::to_string(k), fmt_num(main.curves[i]->mf[kk]),
                   fmt_num(main.curves[i]->r2[kk])});
    }
  }
  add_aggregate_rows(metrics, main, k_max, false);
  write_artifact(manifest, dir / "metrics.csv", metrics.str());

  std::size_t failed = main.failed;
  json failures = json::array();
  for (std::size_t i = 0; i < seeds.size(); ++i) {
    if (!main.errors[i].empty()) failures.push_back({{"seed", seeds[i]}, {"error", main.errors[i]}});
  }

  if (cfg.task.kind == "narma10") {
    std::vector<std::optional<TaskScore>> scores(seeds.size());
    parallel_for(seeds.size(), opt.jobs, [&](std::size_t i) {
      try {
        const auto u = gen_narma_input(cfg.run.t, seeds[i]);
        const auto run = drive(*res, enc, u, cfg.run.washout, seeds[i], cfg.run.train_fraction);
        scores[i] = score_task(run, gen_narma10(u), cfg.run.ridge);
      } catch (const Error& e) {
        if (e.is_config()) throw;
      }
    });
    CsvTable narma({"seed", "corr_sq", "r2"});
    std::vector<double> c2, r2;
    for (std::size_t i = 0; i < seeds.size(); ++i) {
      if (!scores[i]) {
        ++failed;
        failures.push_back({{"seed", seeds[i]}, {"error", "narma10 run failed"}});
        continue;
      }
      narma.add({std::to_string(seeds[i]), fmt_num(scores[i]->corr_sq), fmt_num(scores[i]->r2)});
      c2.push_back(scores[i]->corr_sq);
      r2.push_back(scores[i]->r2);
    }
    narma.add({"mean", fmt_num(stats(c2).mean), fmt_num(stats(r2).mean)});
    narma.add({"sd", fmt_num(stats(c2).sd), fmt_num(stats(r2).sd)});
    write_artifact(manifest, dir / "narma.csv", narma.str());
  }

  std::optional<CurveSet> baseline;
  if (cfg.encoder.random_count > 0) {
    const std::uint64_t base = derive_seed(cfg.seed, "random-baseline");
    const auto count = static_cast<std::size_t>(cfg.encoder.random_count);
    std::vector<Encoder> encs;
    std::vector<std::uint64_t> run_seeds;
    for (std::size_t i = 0; i < count; ++i) {
      encs.push_back(config_random_encoder(cfg, enc.whitened_power(), enc.n_in(), derive_seed(base, i)));
      run_seeds.push_back(seeds[i % seeds.size()]);
    }
    baseline = curves_for(cfg, *res, encs, run_seeds, opt.jobs);
    CsvTable random({"encoder", "seed", "k", "mf", "r2"});
    for (std::size_t i = 0; i < count; ++i) {
      if (!baseline->curves[i]) continue;
      for (int k = 1; k <= k_max; ++k) {
        const auto kk = static_cast<std::size_t>(k - 1);
        random.add({std::to_string(i), std::to_string(run_seeds[i]), std::to_string(k),
                    fmt_num(baseline->curves[i]->mf[kk]), fmt_num(baseline->curves[i]->r2[kk])});
      }
    }
    add_aggregate_rows(random, *baseline, k_max, true);
    write_artifact(manifest, dir / "random.csv", random.str());
  }

  if (cfg.output.wants("svg")) {
    Plot plot;
    plot.title = "Memory function";
    plot.x_label = "delay k";
    plot.y_label = "MF(k)";
    std::vector<double> ks;
    for (int k = 1; k <= k_max; ++k) ks.push_back(k);
    if (baseline) {
      const auto m = curve_mean(*baseline, k_max, false), s = curve_mean(*baseline, k_max, true);
      std::vector<double> lo, hi;
      for (std::size_t i = 0; i < m.size(); ++i) {
        lo.push_back(m[i] - s[i]);
        hi.push_back(m[i] + s[i]);
      }
      plot.bands.push_back({ks, lo, hi, "#1f77b4"});
      plot.series.push_back({"random (mean)", ks, m, "#1f77b4", false});
    }
    plot.series.push_back({"encoder", ks, curve_mean(main, k_max, false), "#d62728", true});
    write_artifact(manifest, dir / "mf.svg", render_svg(plot));
  }

  manifest.note("failures", failures);
  if (failed > 0 && failed >= seeds.size() && cfg.task.kind != "narma10") {
    manifest.finish("failed");
    throw Error(ErrorKind::NumericalBlowup, fmt::format("all {} runs failed: {}", seeds.size(), main.errors[0]));
  }
  manifest.finish(failed > 0 ? "partial" : "ok");
  return failed > 0 ? kExitPartial : kExitOk;
}

namespace {

// Metrics of one (encoder, seed) point in a power sweep.
std::vector<std::pair<std::string, double>> sweep_metrics(const ExperimentConfig& cfg, const Reservoir& res,
                                                          const Encoder& enc, std::uint64_t seed) {
  std::vector<std::pair<std::string, double>> out;
  const auto u = task_input(cfg, cfg.run.t, seed);
  const auto run = drive(res, enc, u, cfg.run.washout, seed, cfg.run.train_fraction);
  if (cfg.task.kind == "narma10") {
    TaskScore s{std::nan(""), std::nan("")};
    try {
      s = score_task(run, gen_narma10(u), cfg.run.ridge);
    } catch (const Error& e) {
      if (e.kind() != ErrorKind::UnstableTask) throw;
    }
    out.emplace_back("r2", s.r2);
    out.emplace_back("corr_sq", s.corr_sq);
  } else if (cfg.task.kind == "mc") {
    const int k_max = cfg.task.task_weights(cfg.probe.k_max).max_delay();
    out.emplace_back("capacity", memory_curve(run, u, k_max, cfg.run.ridge).capacity);
  } else {
    const TaskWeights tw = cfg.task.task_weights(cfg.probe.k_max);
    for (const auto& [k, w] : tw.entries()) {
      const TaskScore s = score_task(run, delayed(u, k), cfg.run.ridge);
      out.emplace_back(delay_metric("r2", k), s.r2);
      out.emplace_back(delay_metric("mf", k), s.corr_sq);
    }
  }
  return out;
}

int sweep_plane(const ExperimentConfig& cfg, const CommandOptions& opt, const fs::path& dir, Manifest& manifest) {
  const ProbeArtifact probe = load_probe(cfg, opt, nullptr);
  const MemoryOperator op = operator_from_probe(cfg, probe);
  const Vector dir_task = task_only_direction(probe.kernel, op.weights);
  const Vector dir_rome = op.eigen.eigenvectors.col(0);
  std::optional<Matrix> noise;
  if (probe.fluct.sigma_ref.rows() == op.dim()) noise = probe.fluct.sigma_ref;
  const PlaneScan scan = direction_plane_scan(op, dir_task, dir_rome, cfg.encoder.power, cfg.sweep.angles, noise);

  CsvTable table({"sweep_var", "value", "encoder_kind", "seed", "metric", "metric_value"});
  for (std::size_t i = 0; i < scan.theta.size(); ++i) {
    table.add({"theta", fmt_num(scan.theta[i]), "plane", std::to_string(cfg.seed), "predicted_objective",
               fmt_num(scan.value[i])});
  }
  write_artifact(manifest, dir / "sweep.csv", table.str());
  json info = {{"task_angle", scan.task_angle},
               {"noise_angle", scan.noise_angle ? json(*scan.noise_angle) : json()},
               {"lambda_max", op.lambda_max()}};
  write_artifact(manifest, dir / "plane.json", info.dump(2) + "\n");

  if (cfg.output.wants("svg")) {
    Plot plot;
    plot.title = "Objective in the (ROME, task) plane";
    plot.x_label = "angle from ROME direction (rad)";
    plot.y_label = "predicted objective";
    plot.series.push_back({"J(theta)", scan.theta, scan.value, "#d62728", false});
    write_artifact(manifest, dir / "plane.svg", render_svg(plot));
  }
  manifest.finish("ok");
  return kExitOk;
}

}  // namespace

int cmd_sweep(const ExperimentConfig& cfg, const CommandOptions& opt) {
  const fs::path dir = out_dir(cfg, opt);
  Manifest manifest(dir, cfg, opt.plane ? "sweep-plane" : "sweep");
  if (opt.plane) return sweep_plane(cfg, opt, dir, manifest);

  const auto res = make_reservoir(cfg.model);
  const ProbeArtifact probe = load_probe(cfg, opt, nullptr);
  const MemoryOperator op = operator_from_probe(cfg, probe);
  const auto grid = cfg.sweep.power_grid();
  const auto& seeds = cfg.run.seeds;
  const std::uint64_t random_base = derive_seed(cfg.seed, "sweep-random");
  const auto n_in = static_cast<Eigen::Index>(res->n_in());

  // One ROME and one random encoder per (power, seed); the random direction is
  // fixed per seed so successive grid points differ only in power.
  struct Point {
    std::size_t grid_index;
    bool rome;
    std::size_t seed_index;
  };
  std::vector<Point> points;
  for (std::size_t g = 0; g < grid.size(); ++g) {
    for (bool rome : {true, false}) {
      for (std::size_t s = 0; s < seeds.size(); ++s) points.push_back({g, rome, s});
    }
  }
  std::vector<std::vector<std::pair<std::string, double>>> results(points.size());
  std::vector<std::string> errors(points.size());
  parallel_for(points.size(), opt.jobs, [&](std::size_t i) {
    const Point& pt = points[i];
    const double power = grid[pt.grid_index];
    const std::uint64_t seed = seeds[pt.seed_index];
    const Encoder enc = pt.rome ? rome_encoder(cfg, op, power)
                                : config_random_encoder(cfg, power, n_in, derive_seed(random_base, seed));
    try {
      results[i] = sweep_metrics(cfg, *res, enc, seed);
    } catch (const Error& e) {
      if (e.is_config()) throw;
      errors[i] = e.what();
    }
  });

  CsvTable table({"sweep_var", "value", "encoder_kind", "seed", "metric", "metric_value"});
  std::size_t failed = 0;
  for (std::size_t i = 0; i < points.size(); ++i) {
    if (!errors[i].empty()) {
      ++failed;
      continue;
    }
    for (const auto& [metric, value] : results[i]) {
      table.add({"power", fmt_num(grid[points[i].grid_index]), points[i].rome ? "rome" : "random",
                 std::to_string(seeds[points[i].seed_index]), metric, fmt_num(value)});
    }
  }
  write_artifact(manifest, dir / "sweep.csv", table.str());

  if (cfg.output.wants("svg") && failed == 0 && !results.empty() && !results[0].empty()) {
    const std::string metric = cfg.sweep.metric.empty() ? results[0][0].first : cfg.sweep.metric;
    Plot plot;
    plot.title = "Performance versus input power";
    plot.x_label = "P";
    plot.y_label = metric;
    plot.log_x = true;
    for (bool rome : {true, false}) {
      std::vector<double> mean_line;
      for (std::size_t g = 0; g < grid.size(); ++g) {
        std::vector<double> v;
        for (std::size_t i = 0; i < points.size(); ++i) {
          if (points[i].grid_index != g || points[i].rome != rome) continue;
          for (const auto& [m, val] : results[i]) {
            if (m == metric && std::isfinite(val)) v.push_back(val);
          }
        }
        mean_line.push_back(stats(v).mean);
      }
      plot.series.push_back({rome ? "ROME" : "random", grid, mean_line, rome ? "#d62728" : "#1f77b4", !rome});
    }
    write_artifact(manifest, dir / "sweep.svg", render_svg(plot));
  }

  manifest.note("failed_points", failed);
  if (failed == points.size() && failed > 0) {
    manifest.finish("failed");
    throw Error(ErrorKind::NumericalBlowup, fmt::format("every sweep point failed: {}", errors[0]));
  }
  manifest.finish(failed > 0 ? "partial" : "ok");
  return failed > 0 ? kExitPartial : kExitOk;
}

int cmd_ascent(const ExperimentConfig& cfg, const CommandOptions& opt) {
  const fs::path dir = out_dir(cfg, opt);
  const auto res = make_reservoir(cfg.model);
  Manifest manifest(dir, cfg, "ascent");
  const ProbeArtifact probe = load_probe(cfg, opt, nullptr);
  const MemoryOperator op = operator_from_probe(cfg, probe);
  const double power = cfg.encoder.power;
  const Encoder reference = rome_encoder(cfg, op, power);
  const std::uint64_t eval_seed = cfg.run.seeds.front();
  const auto n_in = static_cast<Eigen::Index>(res->n_in());

  AscentOptions ao;
  ao.eta = cfg.ascent.eta_scale / op.lambda_max();
  ao.steps = cfg.ascent.steps;
  ao.eval_every = cfg.ascent.eval_every;
  EvalHook hook;
  if (cfg.ascent.eval_every > 0) {
    hook = [&](const Encoder& e) { return task_score(cfg, *res, sign_aligned(e, reference), eval_seed); };
  }

  const auto starts = static_cast<std::size_t>(cfg.ascent.starts);
  std::vector<AscentTrace> traces(starts);
  const std::uint64_t start_base = derive_seed(cfg.seed, "ascent-start");
  parallel_for(starts, opt.jobs, [&](std::size_t s) {
    const Encoder enc0 = config_random_encoder(cfg, power, n_in, derive_seed(start_base, s));
    traces[s] = projected_gradient_ascent(op, enc0, power, ao, reference, hook);
  });
  const double rome_score = task_score(cfg, *res, reference, eval_seed);

  CsvTable trace_csv({"start", "step", "alignment", "objective", "r2"});
  CsvTable summary({"start", "steps", "converged", "final_alignment", "final_objective", "final_r2", "rome_r2"});
  for (std::size_t s = 0; s < starts; ++s) {
    for (const auto& rec : traces[s].records) {
      trace_csv.add({std::to_string(s), std::to_string(rec.step), fmt_num(rec.alignment), fmt_num(rec.objective),
                     rec.r2 ? fmt_num(*rec.r2) : ""});
    }
    const auto& last = traces[s].records.back();
    const double final_r2 = cfg.ascent.eval_every > 0
                                ? task_score(cfg, *res, sign_aligned(traces[s].final_encoder, reference), eval_seed)
                                : std::nan("");
    summary.add({std::to_string(s), std::to_string(last.step), traces[s].converged ? "1" : "0",
                 fmt_num(last.alignment), fmt_num(last.objective), fmt_num(final_r2), fmt_num(rome_score)});
  }
  write_artifact(manifest, dir / "ascent.csv", trace_csv.str());
  write_artifact(manifest, dir / "ascent_summary.csv", summary.str());

  if (cfg.output.wants("svg")) {
    Plot plot;
    plot.title = "Alignment with the ROME encoder";
    plot.x_label = "step";
    plot.y_label = "|cos(G, G*)|";
    for (std::size_t s = 0; s < starts; ++s) {
      PlotSeries series{fmt::format("start {}", s), {}, {}, s == 0 ? "#d62728" : "#7f7f7f", false};
      for (const auto& rec : traces[s].records) {
        series.x.push_back(rec.step);
        series.y.push_back(rec.alignment);
      }
      plot.series.push_back(std::move(series));
    }
    write_artifact(manifest, dir / "ascent.svg", render_svg(plot));
  }
  manifest.finish("ok");
  return kExitOk;
}

int run_command(const std::string& name, const CommandOptions& opt) {
  try {
    ExperimentConfig cfg = load_config(opt.config_path);
    if (opt.seed) override_seed(cfg, *opt.seed);
    if (name == "probe") return cmd_probe(cfg, opt);
    if (name == "optimize") return cmd_optimize(cfg, opt);
    if (name == "evaluate") return cmd_evaluate(cfg, opt);
    if (name == "sweep") return cmd_sweep(cfg, opt);
    if (name == "ascent") return cmd_ascent(cfg, opt);
    throw Error(ErrorKind::Config, fmt::format("unknown command '{}'", name));
  } catch (const Error& e) {
    std::cerr << "error (" << to_string(e.kind()) << "): " << e.what() << "\n";
    return e.is_config() ? kExitConfig : kExitNumerical;
  } catch (const fs::filesystem_error& e) {
    std::cerr << "error (io): " << e.what() << "\n";
    return kExitConfig;
  }
}

}  // namespace rome
