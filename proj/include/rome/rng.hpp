#pragma once

#include <cstdint>
#include <random>
#include <string_view>

namespace rome {

/// Stream derivation: child = splitmix64(parent ^ splitmix64(fnv1a64(name))).
/// Named streams ("init", "noise", "input", ...) and indexed streams (trial
/// number, seed index) are statistically independent of their parent.
std::uint64_t splitmix64(std::uint64_t x);
std::uint64_t fnv1a64(std::string_view bytes);
std::uint64_t derive_seed(std::uint64_t parent, std::string_view stream);
std::uint64_t derive_seed(std::uint64_t parent, std::uint64_t index);

/// mt19937_64 plus its distributions. Copying an Rng copies the full stream
/// state, including the cached second Gaussian, so a copy replays exactly the
/// same draws (used for common-random-number probing).
class Rng {
 public:
  explicit Rng(std::uint64_t seed = 0) : engine_(seed) {}

  double normal() { return normal_(engine_); }
  double uniform(double lo, double hi) { return lo + (hi - lo) * unit_(engine_); }
  bool bernoulli(double p) { return unit_(engine_) < p; }
  std::uint64_t next() { return engine_(); }

  std::mt19937_64& engine() { return engine_; }

 private:
  std::mt19937_64 engine_;
  std::normal_distribution<double> normal_{0.0, 1.0};
  std::uniform_real_distribution<double> unit_{0.0, 1.0};
};

}  // namespace rome
