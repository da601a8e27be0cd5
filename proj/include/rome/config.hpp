#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "json.hpp"
#include "rome/encoder.hpp"
#include "rome/reservoirs.hpp"

namespace rome {

struct ModelConfig {
  std::string type = "linear";  // linear | esn | spinwave | snn
  bool seed_explicit = false;
  LinearReservoirParams linear;
  SpinWaveParams spinwave;
  LifSnnParams snn;
};

struct ProbeConfig {
  std::size_t t = 20000;
  std::size_t burn_in = 500;
  int k_max = 50;
  /// Absent: 1e-3 (linear/ESN), 1e-2 of the mean steady amplitude
  /// (spin-wave), 5% of the mean rheobase (SNN).
  std::optional<double> epsilon;
  /// Absent: 1 (linear/ESN), 64 (spin-wave), 512 (SNN).
  std::optional<int> trials;
  double eps_rel = 1e-6;
  bool common_random_numbers = true;

  int resolved_trials(const std::string& model_type) const;
};

struct TaskConfig {
  std::string kind = "delays";  // delays | mc | narma10
  std::vector<int> delays{1};
  std::vector<double> weights;  // empty: all ones
  int mc_k_max = 0;             // mc: 0 means probe.k_max

  TaskWeights task_weights(int probe_k_max) const;
};

struct EncoderConfig {
  std::string kind = "rome";  // rome | random | file
  double power = 1.0;
  int r = 1;
  int channels = 1;
  std::vector<double> power_split;
  std::string path;
  int random_count = 0;  // random-encoder baseline size in evaluate
};

struct RunConfig {
  std::size_t t = 5000;
  std::size_t washout = 200;
  double train_fraction = 0.7;
  std::vector<std::uint64_t> seeds{1};
  double input_amplitude = 1.0;
  double ridge = 0.0;
  int eval_k_max = 30;
};

struct SweepConfig {
  std::vector<double> powers;  // explicit grid; otherwise the log grid below
  double power_min = 1e-3;
  double power_max = 1.0;
  int power_points = 7;
  int angles = 72;
  std::string metric;  // empty: task default

  std::vector<double> power_grid() const;
};

struct AscentConfig {
  double eta_scale = 0.1;  // η = eta_scale/λ1
  int steps = 500;
  int eval_every = 10;
  int starts = 1;
};

struct OutputConfig {
  std::string dir = "out";
  std::vector<std::string> formats{"csv", "json"};

  bool wants(const std::string& format) const;
};

struct ExperimentConfig {
  std::uint64_t seed = 1;  // master seed for probe and encoder streams
  ModelConfig model;
  ProbeConfig probe;
  TaskConfig task;
  EncoderConfig encoder;
  RunConfig run;
  SweepConfig sweep;
  AscentConfig ascent;
  OutputConfig output;

  /// Source text the config was parsed from; hashed into manifests.
  std::string source;

  /// Fully resolved parameters, defaults included.
  nlohmann::json to_json() const;
  /// Input covariance Σ_sig of the scalar drive the task uses.
  Matrix input_cov() const;
};

/// Parses TOML text. Unknown sections or keys, wrong types and invariant
/// violations throw Error(Config) naming the key and its line.
ExperimentConfig parse_config(const std::string& text, const std::string& origin = "<config>");
ExperimentConfig load_config(const std::filesystem::path& path);

/// Replaces the master seed; model seeds follow it unless set explicitly.
void override_seed(ExperimentConfig& cfg, std::uint64_t seed);

std::unique_ptr<Reservoir> make_reservoir(const ModelConfig& model);

}  // namespace rome
