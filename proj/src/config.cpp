#include "rome/config.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include <fmt/format.h>

#include "rome/error.hpp"
#include "rome/eval.hpp"
#include "rome/io.hpp"
#include "rome/rng.hpp"
#include "toml.hpp"

namespace rome {

namespace {

[[noreturn]] void config_error(const std::string& origin, const toml::node* node, const std::string& msg) {
  if (node != nullptr && node->source().begin.line > 0) {
    throw Error(ErrorKind::Config, fmt::format("{}:{}: {}", origin, node->source().begin.line, msg));
  }
  throw Error(ErrorKind::Config, fmt::format("{}: {}", origin, msg));
}

// Typed access to one [section]; every key read is remembered so leftovers can
// be reported as unknown.
class Section {
 public:
  Section(const toml::table* table, std::string name, const std::string& origin)
      : table_(table), name_(std::move(name)), origin_(origin) {}

  bool has(const std::string& key) {
    seen_.insert(key);
    return table_ != nullptr && table_->contains(key);
  }

  template <typename T>
  void read(const std::string& key, T& out) {
    if (!has(key)) return;
    out = get<T>(key);
  }

  template <typename T>
  void read_opt(const std::string& key, std::optional<T>& out) {
    if (!has(key)) return;
    out = get<T>(key);
  }

  template <typename T>
  T get(const std::string& key) {
    const toml::node* node = table_->get(key);
    if constexpr (std::is_same_v<T, bool>) {
      if (auto v = node->value_exact<bool>()) return *v;
      fail(node, key, "a boolean");
    } else if constexpr (std::is_same_v<T, std::string>) {
      if (auto v = node->value_exact<std::string>()) return *v;
      fail(node, key, "a string");
    } else if constexpr (std::is_same_v<T, double>) {
      return number(node, key);
    } else if constexpr (std::is_integral_v<T>) {
      return integer<T>(node, key);
    } else if constexpr (std::is_same_v<T, std::pair<double, double>>) {
      auto v = list<double>(node, key);
      if (v.size() != 2) fail(node, key, "a two-element array");
      return {v[0], v[1]};
    } else {
      return list<typename T::value_type>(node, key);
    }
  }

  void finish() const {
    if (table_ == nullptr) return;
    for (const auto& [k, v] : *table_) {
      const std::string key(k.str());
      if (!seen_.count(key)) config_error(origin_, &v, fmt::format("unknown key '{}' in [{}]", key, name_));
    }
  }

  [[noreturn]] void invalid(const std::string& key, const std::string& msg) const {
    const toml::node* node = table_ != nullptr ? table_->get(key) : nullptr;
    config_error(origin_, node, fmt::format("[{}] {}: {}", name_, key, msg));
  }

 private:
  [[noreturn]] void fail(const toml::node* node, const std::string& key, const char* expected) const {
    config_error(origin_, node, fmt::format("[{}] {} must be {}", name_, key, expected));
  }

  double number(const toml::node* node, const std::string& key) const {
    if (auto v = node->value_exact<double>()) return *v;
    if (auto v = node->value_exact<std::int64_t>()) return static_cast<double>(*v);
    fail(node, key, "a number");
  }

  template <typename T>
  T integer(const toml::node* node, const std::string& key) const {
    auto v = node->value_exact<std::int64_t>();
    if (!v) fail(node, key, "an integer");
    if constexpr (std::is_unsigned_v<T>) {
      if (*v < 0) fail(node, key, "a nonnegative integer");
    }
    return static_cast<T>(*v);
  }

  template <typename T>
  std::vector<T> list(const toml::node* node, const std::string& key) const {
    const toml::array* arr = node->as_array();
    if (arr == nullptr) fail(node, key, "an array");
    std::vector<T> out;
    for (const auto& el : *arr) {
      if constexpr (std::is_same_v<T, double>) {
        out.push_back(number(&el, key));
      } else if constexpr (std::is_same_v<T, std::string>) {
        auto s = el.value_exact<std::string>();
        if (!s) fail(&el, key, "an array of strings");
        out.push_back(*s);
      } else {
        out.push_back(integer<T>(&el, key));
      }
    }
    return out;
  }

  const toml::table* table_;
  std::string name_;
  const std::string& origin_;
  std::set<std::string> seen_;
};

void read_model(Section& s, ModelConfig& m) {
  s.read("type", m.type);
  std::optional<std::uint64_t> seed;
  s.read_opt("seed", seed);
  m.seed_explicit = seed.has_value();
  if (m.type == "linear" || m.type == "esn") {
    auto& p = m.linear;
    s.read("n", p.n);
    s.read("spectral_radius", p.spectral_radius);
    s.read("density", p.density);
    s.read("noise_sigma", p.noise_sigma);
    if (seed) p.seed = *seed;
  } else if (m.type == "spinwave") {
    auto& p = m.spinwave;
    s.read("nx", p.nx);
    s.read("dx", p.dx);
    s.read("dt", p.dt);
    s.read("substeps_per_symbol", p.substeps_per_symbol);
    s.read("gamma", p.gamma);
    s.read("omega0", p.omega0);
    s.read("v_g", p.v_g);
    s.read("dispersion", p.dispersion);
    s.read("noise_sigma", p.noise_sigma);
    s.read("w_in", p.w_in);
    s.read("w_out_start", p.w_out_start);
    s.read("w_out_count", p.w_out_count);
    s.read("absorb_ramp", p.absorb_ramp);
    s.read("bias_amplitude", p.bias_amplitude);
    if (seed) p.seed = *seed;
  } else if (m.type == "snn") {
    auto& p = m.snn;
    s.read("n", p.n);
    s.read("frac_excitatory", p.frac_excitatory);
    s.read("tau_m_range", p.tau_m_range);
    s.read("v_rest", p.v_rest);
    s.read("v_reset", p.v_reset);
    s.read("v_th_range", p.v_th_range);
    s.read("t_ref", p.t_ref);
    s.read("tau_syn", p.tau_syn);
    s.read("tau_filter", p.tau_filter);
    s.read("weight_scale_e", p.weight_scale_e);
    s.read("weight_scale_i", p.weight_scale_i);
    s.read("connection_prob", p.connection_prob);
    s.read("noise_current_sigma", p.noise_current_sigma);
    s.read("bias_current", p.bias_current);
    s.read("input_subset", p.input_subset);
    s.read("readout_subset", p.readout_subset);
    s.read("dt", p.dt);
    s.read("substeps_per_symbol", p.substeps_per_symbol);
    if (seed) p.seed = *seed;
    // Default partial injection and observation: first quarter in, second half out.
    if (p.n >= 4 && p.input_subset.empty()) {
      for (int i = 0; i < p.n / 4; ++i) p.input_subset.push_back(static_cast<std::size_t>(i));
    }
    if (p.n >= 4 && p.readout_subset.empty()) {
      for (int i = p.n / 2; i < p.n; ++i) p.readout_subset.push_back(static_cast<std::size_t>(i));
    }
  } else {
    s.invalid("type", fmt::format("unknown model type '{}' (linear, esn, spinwave, snn)", m.type));
  }
}

void set_model_seed(ModelConfig& m, std::uint64_t seed) {
  m.linear.seed = seed;
  m.spinwave.seed = seed;
  m.snn.seed = seed;
}

nlohmann::json model_json(const ModelConfig& m) {
  nlohmann::json j = make_reservoir(m)->params_json();
  j["type"] = m.type;
  return j;
}

}  // namespace

int ProbeConfig::resolved_trials(const std::string& model_type) const {
  if (trials) return *trials;
  if (model_type == "spinwave") return 64;
  if (model_type == "snn") return 512;
  return 1;
}

TaskWeights TaskConfig::task_weights(int probe_k_max) const {
  if (kind == "mc") return TaskWeights::uniform(mc_k_max > 0 ? mc_k_max : probe_k_max);
  if (kind == "narma10") return TaskWeights::uniform(NarmaCoefficients::kOrder);
  std::map<int, double> entries;
  for (std::size_t i = 0; i < delays.size(); ++i) {
    entries[delays[i]] += weights.empty() ? 1.0 : weights[i];
  }
  return TaskWeights(std::move(entries));
}

std::vector<double> SweepConfig::power_grid() const {
  if (!powers.empty()) return powers;
  std::vector<double> grid;
  if (power_points == 1) return {power_min};
  const double lo = std::log10(power_min);
  const double hi = std::log10(power_max);
  for (int i = 0; i < power_points; ++i) {
    grid.push_back(std::pow(10.0, lo + (hi - lo) * i / (power_points - 1)));
  }
  return grid;
}

bool OutputConfig::wants(const std::string& format) const {
  return std::find(formats.begin(), formats.end(), format) != formats.end();
}

Matrix ExperimentConfig::input_cov() const {
  Matrix c(1, 1);
  // NARMA10 drives with U[0, 0.5]; the other tasks with U[−a, a].
  c(0, 0) = task.kind == "narma10" ? 0.25 * 0.25 / 3.0 : run.input_amplitude * run.input_amplitude / 3.0;
  return c;
}

nlohmann::json ExperimentConfig::to_json() const {
  nlohmann::json j;
  j["seed"] = seed;
  j["model"] = model_json(model);
  j["probe"] = {{"t", probe.t},
                {"burn_in", probe.burn_in},
                {"k_max", probe.k_max},
                {"epsilon", probe.epsilon ? nlohmann::json(*probe.epsilon) : nlohmann::json("auto")},
                {"trials", probe.resolved_trials(model.type)},
                {"eps_rel", probe.eps_rel},
                {"common_random_numbers", probe.common_random_numbers}};
  nlohmann::json weights = nlohmann::json::object();
  const TaskWeights tw = task.task_weights(probe.k_max);
  for (const auto& [k, w] : tw.entries()) weights[std::to_string(k)] = w;
  j["task"] = {{"kind", task.kind}, {"weights", weights}};
  j["encoder"] = {{"kind", encoder.kind},       {"power", encoder.power},
                  {"r", encoder.r},             {"channels", encoder.channels},
                  {"power_split", encoder.power_split}, {"path", encoder.path},
                  {"random_count", encoder.random_count}};
  j["run"] = {{"t", run.t},
              {"washout", run.washout},
              {"train_fraction", run.train_fraction},
              {"seeds", run.seeds},
              {"input_amplitude", run.input_amplitude},
              {"ridge", run.ridge},
              {"eval_k_max", run.eval_k_max}};
  j["sweep"] = {{"powers", sweep.power_grid()}, {"angles", sweep.angles}, {"metric", sweep.metric}};
  j["ascent"] = {{"eta_scale", ascent.eta_scale},
                 {"steps", ascent.steps},
                 {"eval_every", ascent.eval_every},
                 {"starts", ascent.starts}};
  j["output"] = {{"dir", output.dir}, {"formats", output.formats}};
  return j;
}

ExperimentConfig parse_config(const std::string& text, const std::string& origin) {
  toml::table root;
  try {
    root = toml::parse(text, origin);
  } catch (const toml::parse_error& e) {
    throw Error(ErrorKind::Config,
                fmt::format("{}:{}: {}", origin, e.source().begin.line, std::string(e.description())));
  }

  static const std::set<std::string> kSections{"model", "probe", "task", "encoder", "run", "sweep", "ascent", "output"};
  ExperimentConfig cfg;
  cfg.source = text;
  for (const auto& [k, v] : root) {
    const std::string key(k.str());
    if (key == "seed") continue;
    if (!kSections.count(key)) config_error(origin, &v, fmt::format("unknown top-level key '{}'", key));
    if (!v.is_table()) config_error(origin, &v, fmt::format("'{}' must be a table", key));
  }
  if (const toml::node* s = root.get("seed")) {
    auto v = s->value_exact<std::int64_t>();
    if (!v || *v < 0) config_error(origin, s, "seed must be a nonnegative integer");
    cfg.seed = static_cast<std::uint64_t>(*v);
  }

  auto section = [&](const char* name) { return Section(root[name].as_table(), name, origin); };

  Section model = section("model");
  read_model(model, cfg.model);
  model.finish();
  if (!cfg.model.seed_explicit) set_model_seed(cfg.model, cfg.seed);

  Section probe = section("probe");
  probe.read("t", cfg.probe.t);
  probe.read("burn_in", cfg.probe.burn_in);
  probe.read("k_max", cfg.probe.k_max);
  probe.read_opt("epsilon", cfg.probe.epsilon);
  probe.read_opt("trials", cfg.probe.trials);
  probe.read("eps_rel", cfg.probe.eps_rel);
  probe.read("common_random_numbers", cfg.probe.common_random_numbers);
  probe.finish();
  if (cfg.probe.k_max < 1) probe.invalid("k_max", "must be >= 1");
  if (cfg.probe.epsilon && !(*cfg.probe.epsilon > 0.0)) probe.invalid("epsilon", "must be > 0");
  if (cfg.probe.trials && *cfg.probe.trials < 1) probe.invalid("trials", "must be >= 1");
  if (!(cfg.probe.eps_rel >= 0.0)) probe.invalid("eps_rel", "must be >= 0");

  Section task = section("task");
  task.read("kind", cfg.task.kind);
  task.read("delays", cfg.task.delays);
  task.read("weights", cfg.task.weights);
  task.read("k_max", cfg.task.mc_k_max);
  task.finish();
  if (cfg.task.kind != "delays" && cfg.task.kind != "mc" && cfg.task.kind != "narma10") {
    task.invalid("kind", fmt::format("unknown task '{}' (delays, mc, narma10)", cfg.task.kind));
  }
  if (cfg.task.kind == "delays") {
    if (cfg.task.delays.empty()) task.invalid("delays", "must be nonempty");
    if (!cfg.task.weights.empty() && cfg.task.weights.size() != cfg.task.delays.size()) {
      task.invalid("weights", "must have one entry per delay");
    }
    for (int d : cfg.task.delays) {
      if (d < 1) task.invalid("delays", fmt::format("delay {} must be >= 1", d));
      if (d > cfg.probe.k_max) {
        task.invalid("delays", fmt::format("delay {} exceeds probe k_max = {}", d, cfg.probe.k_max));
      }
    }
    for (double w : cfg.task.weights) {
      if (!(w >= 0.0) || !std::isfinite(w)) task.invalid("weights", "must be finite and nonnegative");
    }
  }
  if (cfg.task.kind == "mc" && cfg.task.mc_k_max > cfg.probe.k_max) {
    task.invalid("k_max", fmt::format("exceeds probe k_max = {}", cfg.probe.k_max));
  }
  if (cfg.task.kind == "narma10" && cfg.probe.k_max < NarmaCoefficients::kOrder) {
    task.invalid("kind", fmt::format("narma10 needs probe k_max >= {}", NarmaCoefficients::kOrder));
  }

  Section enc = section("encoder");
  enc.read("kind", cfg.encoder.kind);
  enc.read("power", cfg.encoder.power);
  enc.read("r", cfg.encoder.r);
  enc.read("channels", cfg.encoder.channels);
  enc.read("power_split", cfg.encoder.power_split);
  enc.read("path", cfg.encoder.path);
  enc.read("random_count", cfg.encoder.random_count);
  enc.finish();
  if (cfg.encoder.kind != "rome" && cfg.encoder.kind != "random" && cfg.encoder.kind != "file") {
    enc.invalid("kind", fmt::format("unknown encoder kind '{}' (rome, random, file)", cfg.encoder.kind));
  }
  if (cfg.encoder.kind == "file" && cfg.encoder.path.empty()) enc.invalid("path", "required for kind = \"file\"");
  if (!(cfg.encoder.power > 0.0) || !std::isfinite(cfg.encoder.power)) enc.invalid("power", "must be > 0");
  if (cfg.encoder.r < 1) enc.invalid("r", "must be >= 1");
  if (cfg.encoder.channels < 1) enc.invalid("channels", "must be >= 1");
  if (cfg.encoder.r > cfg.encoder.channels) enc.invalid("r", "must not exceed channels");
  if (!cfg.encoder.power_split.empty() && static_cast<int>(cfg.encoder.power_split.size()) != cfg.encoder.r) {
    enc.invalid("power_split", "must have r entries");
  }
  if (cfg.encoder.random_count < 0) enc.invalid("random_count", "must be >= 0");

  Section run = section("run");
  run.read("t", cfg.run.t);
  run.read("washout", cfg.run.washout);
  run.read("train_fraction", cfg.run.train_fraction);
  run.read("seeds", cfg.run.seeds);
  run.read("input_amplitude", cfg.run.input_amplitude);
  run.read("ridge", cfg.run.ridge);
  run.read("eval_k_max", cfg.run.eval_k_max);
  run.finish();
  if (cfg.run.seeds.empty()) run.invalid("seeds", "must be nonempty");
  if (!(cfg.run.train_fraction > 0.0 && cfg.run.train_fraction < 1.0)) {
    run.invalid("train_fraction", "must lie in (0, 1)");
  }
  if (cfg.run.washout >= cfg.run.t) run.invalid("washout", "must be shorter than t");
  if (!(cfg.run.input_amplitude > 0.0)) run.invalid("input_amplitude", "must be > 0");
  if (!(cfg.run.ridge >= 0.0)) run.invalid("ridge", "must be >= 0");
  if (cfg.run.eval_k_max < 1) run.invalid("eval_k_max", "must be >= 1");

  Section sweep = section("sweep");
  sweep.read("powers", cfg.sweep.powers);
  sweep.read("power_min", cfg.sweep.power_min);
  sweep.read("power_max", cfg.sweep.power_max);
  sweep.read("power_points", cfg.sweep.power_points);
  sweep.read("angles", cfg.sweep.angles);
  sweep.read("metric", cfg.sweep.metric);
  sweep.finish();
  for (double p : cfg.sweep.powers) {
    if (!(p > 0.0)) sweep.invalid("powers", "entries must be > 0");
  }
  if (!(cfg.sweep.power_min > 0.0) || cfg.sweep.power_max < cfg.sweep.power_min) {
    sweep.invalid("power_min", "need 0 < power_min <= power_max");
  }
  if (cfg.sweep.power_points < 1) sweep.invalid("power_points", "must be >= 1");
  if (cfg.sweep.angles < 2) sweep.invalid("angles", "must be >= 2");

  Section ascent = section("ascent");
  ascent.read("eta_scale", cfg.ascent.eta_scale);
  ascent.read("steps", cfg.ascent.steps);
  ascent.read("eval_every", cfg.ascent.eval_every);
  ascent.read("starts", cfg.ascent.starts);
  ascent.finish();
  if (!(cfg.ascent.eta_scale > 0.0)) ascent.invalid("eta_scale", "must be > 0");
  if (cfg.ascent.steps < 1) ascent.invalid("steps", "must be >= 1");
  if (cfg.ascent.eval_every < 0) ascent.invalid("eval_every", "must be >= 0");
  if (cfg.ascent.starts < 1) ascent.invalid("starts", "must be >= 1");

  Section output = section("output");
  output.read("dir", cfg.output.dir);
  output.read("formats", cfg.output.formats);
  output.finish();
  for (const auto& f : cfg.output.formats) {
    if (f != "csv" && f != "json" && f != "svg") output.invalid("formats", fmt::format("unknown format '{}'", f));
  }
  return cfg;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  return parse_config(read_text_file(path), path.string());
}

void override_seed(ExperimentConfig& cfg, std::uint64_t seed) {
  cfg.seed = seed;
  if (!cfg.model.seed_explicit) set_model_seed(cfg.model, seed);
}

std::unique_ptr<Reservoir> make_reservoir(const ModelConfig& model) {
  if (model.type == "linear") return LinearReservoir::linear(model.linear);
  if (model.type == "esn") return LinearReservoir::esn(model.linear);
  if (model.type == "spinwave") return std::make_unique<SpinWaveReservoir>(model.spinwave);
  if (model.type == "snn") return std::make_unique<LifSnnReservoir>(model.snn);
  throw Error(ErrorKind::Config, fmt::format("unknown model type '{}'", model.type));
}

}  // namespace rome
