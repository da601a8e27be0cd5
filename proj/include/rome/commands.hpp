#pragma once

#include <chrono>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "rome/config.hpp"
#include "rome/encoder.hpp"
#include "rome/io.hpp"

namespace rome {

inline constexpr int kExitOk = 0;
inline constexpr int kExitConfig = 2;
inline constexpr int kExitNumerical = 3;
inline constexpr int kExitPartial = 4;

struct CommandOptions {
  std::filesystem::path config_path;
  std::optional<std::filesystem::path> out_dir;
  std::optional<std::uint64_t> seed;
  std::size_t jobs = 1;
  bool analytic = false;
  bool plane = false;
  std::optional<std::filesystem::path> probe_path;    // default <out>/probe.json
  std::optional<std::filesystem::path> encoder_path;  // default <out>/encoder.json
};

/// One manifest.json per output directory. Each command records its resolved
/// config, config hash and timings under its own entry; artifact hashes are
/// shared. Written before any result file and rewritten on completion.
class Manifest {
 public:
  Manifest(std::filesystem::path dir, const ExperimentConfig& cfg, std::string command);

  void add_artifact(const std::filesystem::path& file);
  void note(const std::string& key, nlohmann::json value);
  void finish(const std::string& status);

 private:
  void write() const;

  std::filesystem::path dir_;
  std::string command_;
  nlohmann::json doc_;
  std::chrono::steady_clock::time_point start_;
};

// Building blocks shared by the commands and the acceptance suite.

ProbeArtifact run_probe(const ExperimentConfig& cfg, const Reservoir& res, bool analytic, std::size_t jobs);
/// Probe amplitude used for `res` when the config leaves it open.
double default_epsilon(const ExperimentConfig& cfg, const FluctuationEstimate& fluct);
MemoryOperator operator_from_probe(const ExperimentConfig& cfg, const ProbeArtifact& probe);
Encoder rome_encoder(const ExperimentConfig& cfg, const MemoryOperator& op, double power);
/// Seeded random encoder at the configured power and input covariance.
Encoder config_random_encoder(const ExperimentConfig& cfg, double power, Eigen::Index n_in, std::uint64_t seed);

/// Scalar drive for one run seed: U[0, 0.5] for NARMA10, U[−a, a] otherwise.
std::vector<double> task_input(const ExperimentConfig& cfg, std::size_t steps, std::uint64_t seed);
/// Test-range score of the configured task for one run: R² for NARMA10 and
/// for (weighted mean over) single delays, memory capacity for mc.
double task_score(const ExperimentConfig& cfg, const Reservoir& res, const Encoder& enc, std::uint64_t seed);

int cmd_probe(const ExperimentConfig& cfg, const CommandOptions& opt);
int cmd_optimize(const ExperimentConfig& cfg, const CommandOptions& opt);
int cmd_evaluate(const ExperimentConfig& cfg, const CommandOptions& opt);
int cmd_sweep(const ExperimentConfig& cfg, const CommandOptions& opt);
int cmd_ascent(const ExperimentConfig& cfg, const CommandOptions& opt);

/// Loads the config, applies overrides and runs one subcommand, mapping
/// errors to exit codes (2 config, 3 numerical).
int run_command(const std::string& name, const CommandOptions& opt);

}  // namespace rome
