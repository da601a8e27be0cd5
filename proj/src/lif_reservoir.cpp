#include <algorithm>
#include <cmath>
#include <set>

#include <fmt/format.h>

#include "rome/error.hpp"
#include "rome/reservoirs.hpp"

namespace rome {

namespace {

void validate(const LifSnnParams& p) {
  auto fail = [](const std::string& msg) { throw Error(ErrorKind::Config, "snn: " + msg); };
  if (p.n < 1) fail("n must be >= 1");
  if (!(p.frac_excitatory > 0.0 && p.frac_excitatory < 1.0) && p.n > 1) fail("frac_excitatory must lie in (0,1)");
  if (!(p.tau_m_range.first > 0.0) || p.tau_m_range.second < p.tau_m_range.first) fail("bad tau_m_range");
  if (p.v_th_range.second < p.v_th_range.first) fail("bad v_th_range");
  if (!(p.v_th_range.first > p.v_rest)) fail("thresholds must lie above v_rest");
  if (!(p.tau_syn > 0.0) || !(p.tau_filter > 0.0)) fail("tau_syn and tau_filter must be > 0");
  if (!(p.dt > 0.0) || p.substeps_per_symbol < 1) fail("dt must be > 0 and substeps_per_symbol >= 1");
  if (!(p.connection_prob > 0.0 && p.connection_prob <= 1.0)) fail("connection_prob must lie in (0,1]");
  if (!(p.noise_current_sigma >= 0.0)) fail("noise_current_sigma must be >= 0");
  if (!(p.t_ref >= 0.0)) fail("t_ref must be >= 0");
  const double ratio = p.t_ref / p.dt;
  if (std::abs(ratio - std::round(ratio)) > 1e-9 * std::max(1.0, ratio)) {
    fail(fmt::format("t_ref = {} is not an integer multiple of dt = {}", p.t_ref, p.dt));
  }
  if (p.input_subset.empty() || p.readout_subset.empty()) fail("input and readout subsets must be nonempty");
  for (const auto* subset : {&p.input_subset, &p.readout_subset}) {
    std::set<std::size_t> seen;
    for (std::size_t i : *subset) {
      if (i >= static_cast<std::size_t>(p.n)) fail(fmt::format("subset index {} out of range", i));
      if (!seen.insert(i).second) fail(fmt::format("duplicate subset index {}", i));
    }
  }
}

}  // namespace

LifNetwork LifNetwork::build(const LifSnnParams& p) {
  validate(p);
  LifNetwork net;
  net.params = p;
  const int n = p.n;
  Rng rng(derive_seed(p.seed, "snn-structure"));

  const int n_exc = std::clamp(static_cast<int>(std::lround(p.frac_excitatory * n)), n > 1 ? 1 : 0, n);
  net.excitatory.assign(static_cast<std::size_t>(n), false);
  for (int i = 0; i < n_exc; ++i) net.excitatory[static_cast<std::size_t>(i)] = true;
  // Fisher-Yates with our own generator so labels are portable across
  // standard library implementations.
  for (int i = n - 1; i > 0; --i) {
    const auto j = static_cast<int>(rng.next() % static_cast<std::uint64_t>(i + 1));
    std::swap(net.excitatory[static_cast<std::size_t>(i)], net.excitatory[static_cast<std::size_t>(j)]);
  }

  net.tau_m.resize(n);
  net.v_th.resize(n);
  for (int i = 0; i < n; ++i) {
    net.tau_m(i) = rng.uniform(p.tau_m_range.first, p.tau_m_range.second);
    net.v_th(i) = rng.uniform(p.v_th_range.first, p.v_th_range.second);
  }

  net.weights = Matrix::Zero(n, n);
  for (int j = 0; j < n; ++j) {
    const bool exc = net.excitatory[static_cast<std::size_t>(j)];
    const double scale = exc ? p.weight_scale_e : -p.weight_scale_i;
    for (int i = 0; i < n; ++i) {
      const bool connect = rng.bernoulli(p.connection_prob);
      const double magnitude = rng.uniform(0.5, 1.5);
      if (i != j && connect) net.weights(i, j) = scale * magnitude;
    }
  }

  net.refractory_steps = static_cast<int>(std::lround(p.t_ref / p.dt));
  net.syn_decay = std::exp(-p.dt / p.tau_syn);
  net.filter_decay = std::exp(-p.dt / p.tau_filter);
  return net;
}

LifState LifState::at_rest(const LifNetwork& net) {
  const int n = net.params.n;
  LifState s;
  s.v = Vector::Constant(n, net.params.v_rest);
  s.i_syn = Vector::Zero(n);
  s.filtered = Vector::Zero(n);
  s.refractory_left.assign(static_cast<std::size_t>(n), 0);
  return s;
}

Vector lif_step(LifState& state, const LifNetwork& net, const Vector& input_current, Rng& rng) {
  const LifSnnParams& p = net.params;
  const int n = p.n;
  if (input_current.size() != static_cast<Eigen::Index>(p.input_subset.size())) {
    throw Error(ErrorKind::Dimension, "lif_step: input current length != |input_subset|");
  }
  Vector external = Vector::Constant(n, p.bias_current);
  for (std::size_t k = 0; k < p.input_subset.size(); ++k) {
    external(static_cast<Eigen::Index>(p.input_subset[k])) += input_current(static_cast<Eigen::Index>(k));
  }

  const double noise_scale = p.noise_current_sigma * std::sqrt(p.dt);
  Vector noise = Vector::Zero(n);
  for (int s = 0; s < p.substeps_per_symbol; ++s) {
    if (noise_scale > 0.0) {
      for (int i = 0; i < n; ++i) noise(i) = rng.normal();
    }
    state.spikes_this_substep.clear();
    for (int i = 0; i < n; ++i) {
      auto& left = state.refractory_left[static_cast<std::size_t>(i)];
      if (left > 0) {
        --left;
        state.v(i) = p.v_reset;
        continue;
      }
      const double drift = -(state.v(i) - p.v_rest) + state.i_syn(i) + external(i);
      state.v(i) += (drift * p.dt + noise_scale * noise(i)) / net.tau_m(i);
      if (state.v(i) >= net.v_th(i)) {
        state.v(i) = p.v_reset;
        left = net.refractory_steps;
        state.spikes_this_substep.push_back(static_cast<std::size_t>(i));
      }
    }
    state.i_syn *= net.syn_decay;
    state.filtered *= net.filter_decay;
    for (std::size_t j : state.spikes_this_substep) {
      const auto col = static_cast<Eigen::Index>(j);
      state.i_syn += net.weights.col(col);
      state.filtered(col) += 1.0;
    }
    state.spike_count += state.spikes_this_substep.size();
  }
  if (!state.v.allFinite()) throw Error(ErrorKind::NumericalBlowup, "lif_step: non-finite membrane voltage");

  Vector obs(static_cast<Eigen::Index>(p.readout_subset.size()));
  for (std::size_t k = 0; k < p.readout_subset.size(); ++k) {
    obs(static_cast<Eigen::Index>(k)) = state.filtered(static_cast<Eigen::Index>(p.readout_subset[k]));
  }
  return obs;
}

LifSnnReservoir::LifSnnReservoir(const LifSnnParams& p)
    : net_(std::make_shared<const LifNetwork>(LifNetwork::build(p))) {
  contract_.obs_dim = p.readout_subset.size();
  contract_.input_support = p.input_subset;
  contract_.step_duration = p.dt * p.substeps_per_symbol;
  state_ = LifState::at_rest(*net_);
  obs_ = Vector::Zero(static_cast<Eigen::Index>(p.readout_subset.size()));
}

void LifSnnReservoir::reset(std::uint64_t seed) {
  const auto& p = net_->params;
  state_ = LifState::at_rest(*net_);
  Rng init(derive_seed(seed, "init"));
  for (int i = 0; i < p.n; ++i) state_.v(i) = init.uniform(p.v_reset, net_->v_th(i));
  rng_ = Rng(derive_seed(seed, "noise"));
}

const Vector& LifSnnReservoir::step(const Vector& injection) {
  obs_ = lif_step(state_, *net_, injection, rng_);
  return obs_;
}

nlohmann::json LifSnnReservoir::params_json() const {
  const auto& p = net_->params;
  return {{"n", p.n},
          {"frac_excitatory", p.frac_excitatory},
          {"tau_m_range", {p.tau_m_range.first, p.tau_m_range.second}},
          {"v_rest", p.v_rest},
          {"v_reset", p.v_reset},
          {"v_th_range", {p.v_th_range.first, p.v_th_range.second}},
          {"t_ref", p.t_ref},
          {"tau_syn", p.tau_syn},
          {"tau_filter", p.tau_filter},
          {"weight_scale_e", p.weight_scale_e},
          {"weight_scale_i", p.weight_scale_i},
          {"connection_prob", p.connection_prob},
          {"noise_current_sigma", p.noise_current_sigma},
          {"bias_current", p.bias_current},
          {"input_subset", p.input_subset},
          {"readout_subset", p.readout_subset},
          {"dt", p.dt},
          {"substeps_per_symbol", p.substeps_per_symbol},
          {"seed", p.seed}};
}

}  // namespace rome
