#pragma once

#include <complex>
#include <cstdint>
#include <memory>
#include <string>
#include <utility>
#include <vector>

#include "json.hpp"
#include "rome/numerics.hpp"
#include "rome/rng.hpp"

namespace rome {

/// What every reservoir model exposes to probing and evaluation.
struct ReservoirContract {
  std::size_t obs_dim = 0;
  /// Injection coordinates in model-specific numbering (state index for the
  /// linear/ESN models, 2·cell + {0: Re, 1: Im} for the spin-wave waveguide,
  /// neuron index for the SNN). Its length is n_in.
  std::vector<std::size_t> input_support;
  /// Model time units per discrete symbol.
  double step_duration = 1.0;
};

/// A noisy dynamical system driven one symbol at a time.
///
/// reset(seed) restores the initial state and reseeds the intrinsic noise
/// stream; step(injection) advances one symbol with `injection` (length n_in,
/// already multiplied by the encoder) held constant and returns the
/// observation vector. Noise draws never depend on the state or the input, so
/// two copies of one instance fed different inputs see identical noise.
class Reservoir {
 public:
  virtual ~Reservoir() = default;

  virtual const ReservoirContract& contract() const = 0;
  virtual void reset(std::uint64_t seed) = 0;
  virtual const Vector& step(const Vector& injection) = 0;
  virtual std::unique_ptr<Reservoir> clone() const = 0;
  virtual std::string model() const = 0;
  virtual nlohmann::json params_json() const = 0;

  std::size_t obs_dim() const { return contract().obs_dim; }
  std::size_t n_in() const { return contract().input_support.size(); }
};

// ---------------------------------------------------------------------------
// Linear and echo-state reservoirs

struct LinearReservoirParams {
  int n = 100;
  double spectral_radius = 0.9;
  double density = 0.1;
  double noise_sigma = 0.05;
  std::uint64_t seed = 1;
};
using EsnParams = LinearReservoirParams;

/// Gaussian entries kept with probability `density`, rescaled to the target
/// spectral radius. Retries up to 8 draws when a realization is all zero.
Matrix make_random_internal_matrix(int n, double spectral_radius_target, double density, std::uint64_t seed);

/// x' = Wx + drive + σ·η
Vector linear_step(const Vector& state, const Matrix& w, const Vector& drive, double noise_sigma, Rng& rng);
/// x' = tanh(Wx + drive + σ·η)
Vector esn_step(const Vector& state, const Matrix& w, const Vector& drive, double noise_sigma, Rng& rng);

class LinearReservoir : public Reservoir {
 public:
  LinearReservoir(Matrix w, double noise_sigma, bool tanh_nonlinearity = false);
  static std::unique_ptr<LinearReservoir> linear(const LinearReservoirParams& p);
  static std::unique_ptr<LinearReservoir> esn(const EsnParams& p);

  const ReservoirContract& contract() const override { return contract_; }
  void reset(std::uint64_t seed) override;
  const Vector& step(const Vector& injection) override;
  std::unique_ptr<Reservoir> clone() const override { return std::make_unique<LinearReservoir>(*this); }
  std::string model() const override { return tanh_ ? "esn" : "linear"; }
  nlohmann::json params_json() const override;

  const Matrix& weights() const { return w_; }
  double noise_sigma() const { return noise_sigma_; }
  const Vector& state() const { return state_; }
  void set_state(const Vector& x);

 private:
  Matrix w_;
  double noise_sigma_;
  bool tanh_;
  ReservoirContract contract_;
  Vector state_;
  Vector noise_;
  Rng rng_;
  nlohmann::json origin_;
};

// ---------------------------------------------------------------------------
// Spin-wave envelope waveguide

struct SpinWaveParams {
  int nx = 200;
  double dx = 1.0;
  double dt = 0.1;
  int substeps_per_symbol = 10;
  double gamma = 0.05;
  double omega0 = 1.0;
  double v_g = 1.0;
  double dispersion = 0.5;
  double noise_sigma = 0.05;
  int w_in = 10;
  int w_out_start = 20;
  int w_out_count = 40;
  int absorb_ramp = 20;
  /// Constant real carrier drive on the input window that sets the working
  /// point. With a zero-mean field the amplitude observation has no linear
  /// response to a weak input.
  double bias_amplitude = 20.0;
  std::uint64_t seed = 1;
};

using ComplexVector = Eigen::VectorXcd;

/// Precomputed explicit integrator for the envelope equation
/// ∂tψ = (−Γ+iΩ0)ψ − v_g∂xψ + iD∂²xψ + b(x)u + ξ.
/// Construction validates the step-size bundle and the von Neumann
/// amplification factor of the discrete operator.
class SpinWaveIntegrator {
 public:
  explicit SpinWaveIntegrator(const SpinWaveParams& p);

  /// One explicit substep. `drive` holds the complex forcing on the input
  /// window (b·u, bias excluded).
  void substep(ComplexVector& psi, const ComplexVector& drive, Rng& rng) const;
  /// substeps_per_symbol substeps. Throws NumericalBlowup on a non-finite field.
  void symbol(ComplexVector& psi, const ComplexVector& drive, Rng& rng) const;
  void observe(const ComplexVector& psi, Vector& out) const;

  const SpinWaveParams& params() const { return p_; }

 private:
  SpinWaveParams p_;
  ComplexVector decay_;  // exp((−Γ_j + iΩ0)dt), Γ_j ramped near the right edge
  mutable ComplexVector scratch_;
};

/// One input symbol applied to `psi` with input profile `b_profile` (length
/// w_in) scaled by the real drive `u`.
void spinwave_step(ComplexVector& psi, const SpinWaveParams& p, double u, const ComplexVector& b_profile, Rng& rng);

class SpinWaveReservoir : public Reservoir {
 public:
  explicit SpinWaveReservoir(const SpinWaveParams& p);

  const ReservoirContract& contract() const override { return contract_; }
  void reset(std::uint64_t seed) override;
  const Vector& step(const Vector& injection) override;
  std::unique_ptr<Reservoir> clone() const override { return std::make_unique<SpinWaveReservoir>(*this); }
  std::string model() const override { return "spinwave"; }
  nlohmann::json params_json() const override;

  const ComplexVector& field() const { return psi_; }

 private:
  SpinWaveIntegrator integrator_;
  ReservoirContract contract_;
  ComplexVector psi_;
  ComplexVector drive_;
  Vector obs_;
  Rng rng_;
  std::size_t symbols_ = 0;
};

// ---------------------------------------------------------------------------
// Heterogeneous E/I leaky integrate-and-fire network

struct LifSnnParams {
  int n = 200;
  double frac_excitatory = 0.8;
  std::pair<double, double> tau_m_range{10.0, 30.0};  // ms
  double v_rest = -65.0;                              // mV
  double v_reset = -65.0;
  std::pair<double, double> v_th_range{-55.0, -50.0};
  double t_ref = 2.0;       // ms
  double tau_syn = 5.0;     // ms
  double tau_filter = 20.0; // ms
  double weight_scale_e = 0.5;
  double weight_scale_i = 2.0;
  double connection_prob = 0.1;
  double noise_current_sigma = 3.0;  // mV·√ms
  double bias_current = 12.0;        // mV, all neurons
  std::vector<std::size_t> input_subset;
  std::vector<std::size_t> readout_subset;
  double dt = 0.1;  // ms
  int substeps_per_symbol = 200;
  std::uint64_t seed = 1;
};

/// Fixed structure of the network. weights(i, j) is the synapse j → i, so
/// column j carries neuron j's outgoing sign (Dale's law).
struct LifNetwork {
  LifSnnParams params;
  Vector tau_m;
  Vector v_th;
  std::vector<bool> excitatory;
  Matrix weights;
  int refractory_steps = 0;
  double syn_decay = 0.0;
  double filter_decay = 0.0;

  static LifNetwork build(const LifSnnParams& p);
};

struct LifState {
  Vector v;
  Vector i_syn;
  Vector filtered;  // exponentially filtered spike trains, all neurons
  std::vector<int> refractory_left;
  std::vector<std::size_t> spikes_this_substep;
  std::uint64_t spike_count = 0;

  static LifState at_rest(const LifNetwork& net);
};

/// One symbol (substeps_per_symbol Euler substeps) with `input_current`
/// (length |input_subset|) held on the input neurons. Returns the filtered
/// spike trains of the readout subset at the end of the symbol.
Vector lif_step(LifState& state, const LifNetwork& net, const Vector& input_current, Rng& rng);

class LifSnnReservoir : public Reservoir {
 public:
  explicit LifSnnReservoir(const LifSnnParams& p);

  const ReservoirContract& contract() const override { return contract_; }
  void reset(std::uint64_t seed) override;
  const Vector& step(const Vector& injection) override;
  std::unique_ptr<Reservoir> clone() const override { return std::make_unique<LifSnnReservoir>(*this); }
  std::string model() const override { return "snn"; }
  nlohmann::json params_json() const override;

  const LifNetwork& network() const { return *net_; }
  const LifState& state() const { return state_; }

 private:
  std::shared_ptr<const LifNetwork> net_;
  ReservoirContract contract_;
  LifState state_;
  Vector obs_;
  Rng rng_;
};

}  // namespace rome
