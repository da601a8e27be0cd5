#include <algorithm>
#include <cmath>
#include <numbers>

#include <fmt/format.h>

#include "rome/error.hpp"
#include "rome/reservoirs.hpp"

namespace rome {

namespace {

using cd = std::complex<double>;

void validate(const SpinWaveParams& p) {
  auto fail = [](const std::string& msg) { throw Error(ErrorKind::Config, "spinwave: " + msg); };
  if (p.nx < 4) fail("nx must be >= 4");
  if (!(p.dx > 0.0) || !(p.dt > 0.0)) fail("dx and dt must be > 0");
  if (p.substeps_per_symbol < 1) fail("substeps_per_symbol must be >= 1");
  if (!(p.gamma >= 0.0) || !(p.dispersion >= 0.0) || !(p.noise_sigma >= 0.0)) {
    fail("gamma, dispersion and noise_sigma must be >= 0");
  }
  if (!std::isfinite(p.omega0) || !std::isfinite(p.v_g) || !std::isfinite(p.bias_amplitude)) {
    fail("omega0, v_g and bias_amplitude must be finite");
  }
  if (p.w_in < 1 || p.w_out_count < 1 || p.w_out_start < 0) fail("window sizes must be positive");
  if (p.w_in + p.w_out_count > p.nx) fail("w_in + w_out exceeds nx");
  if (p.w_out_start + p.w_out_count > p.nx) fail("readout window runs past the waveguide");
  if (p.absorb_ramp < 0 || 4 * p.absorb_ramp >= p.nx) fail("absorb_ramp must be < nx/4");

  double limit = std::numeric_limits<double>::infinity();
  if (p.v_g != 0.0) limit = std::min(limit, p.dx / std::abs(p.v_g));
  if (p.dispersion > 0.0) limit = std::min(limit, p.dx * p.dx / (2.0 * p.dispersion));
  if (p.gamma > 0.0) limit = std::min(limit, 1.0 / p.gamma);
  if (p.dt > 0.5 * limit) {
    fail(fmt::format("CFL violation: dt = {} > 0.5 * min(dx/v_g, dx^2/(2D), 1/Gamma) = {}", p.dt, 0.5 * limit));
  }

  // Interior von Neumann factor of one substep without the ramp.
  const double c = std::abs(p.v_g) * p.dt / p.dx;
  const double a = p.dispersion * p.dt / (p.dx * p.dx);
  const double damp = std::exp(-p.gamma * p.dt);
  for (int i = 0; i <= 720; ++i) {
    const double theta = std::numbers::pi * i / 720.0;
    const cd e = std::polar(1.0, -theta);
    const cd g = 1.0 - c * (1.0 - e) + cd(0.0, a) * (2.0 * std::cos(theta) - 2.0);
    if (damp * std::abs(g) > 1.0 + 1e-12) {
      fail(fmt::format("explicit scheme amplifies mode theta = {:.4f} (|G| = {:.6f}); reduce dt or D", theta,
                       damp * std::abs(g)));
    }
  }
}

}  // namespace

SpinWaveIntegrator::SpinWaveIntegrator(const SpinWaveParams& p) : p_(p) {
  validate(p_);
  decay_.resize(p_.nx);
  const int ramp_start = p_.nx - p_.absorb_ramp;
  for (int j = 0; j < p_.nx; ++j) {
    double gamma_j = p_.gamma;
    if (p_.absorb_ramp > 0 && j >= ramp_start) {
      gamma_j *= 1.0 + 9.0 * static_cast<double>(j - ramp_start + 1) / static_cast<double>(p_.absorb_ramp);
    }
    decay_(j) = std::exp(cd(-gamma_j, p_.omega0) * p_.dt);
  }
  scratch_.resize(p_.nx);
}

void SpinWaveIntegrator::substep(ComplexVector& psi, const ComplexVector& drive, Rng& rng) const {
  const int nx = p_.nx;
  const double adv = p_.v_g * p_.dt / p_.dx;
  const cd disp(0.0, p_.dispersion * p_.dt / (p_.dx * p_.dx));
  ComplexVector& next = scratch_;
  for (int j = 0; j < nx; ++j) {
    const cd left = j > 0 ? psi(j - 1) : cd(0.0);          // inflow ghost
    const cd right = j + 1 < nx ? psi(j + 1) : psi(nx - 1);  // copy-out ghost
    const cd here = psi(j);
    const cd advection = p_.v_g >= 0.0 ? -adv * (here - left) : -adv * (right - here);
    next(j) = decay_(j) * (here + advection + disp * (right - 2.0 * here + left));
  }
  for (int j = 0; j < p_.w_in; ++j) next(j) += p_.dt * (p_.bias_amplitude + drive(j));
  if (p_.noise_sigma > 0.0) {
    const double s = p_.noise_sigma * std::sqrt(p_.dt) / std::numbers::sqrt2;
    for (int j = 0; j < nx; ++j) {
      const double re = rng.normal();
      const double im = rng.normal();
      next(j) += cd(s * re, s * im);
    }
  }
  psi.swap(next);
}

void SpinWaveIntegrator::symbol(ComplexVector& psi, const ComplexVector& drive, Rng& rng) const {
  if (psi.size() != p_.nx || drive.size() != p_.w_in) {
    throw Error(ErrorKind::Dimension, "spinwave: field or drive has the wrong length");
  }
  for (int s = 0; s < p_.substeps_per_symbol; ++s) substep(psi, drive, rng);
  if (!psi.allFinite()) throw Error(ErrorKind::NumericalBlowup, "spinwave: non-finite field");
}

void SpinWaveIntegrator::observe(const ComplexVector& psi, Vector& out) const {
  out.resize(p_.w_out_count);
  for (int i = 0; i < p_.w_out_count; ++i) out(i) = std::abs(psi(p_.w_out_start + i));
}

void spinwave_step(ComplexVector& psi, const SpinWaveParams& p, double u, const ComplexVector& b_profile, Rng& rng) {
  const SpinWaveIntegrator integrator(p);
  if (b_profile.size() != p.w_in) throw Error(ErrorKind::Dimension, "spinwave_step: b_profile length != w_in");
  integrator.symbol(psi, b_profile * u, rng);
}

SpinWaveReservoir::SpinWaveReservoir(const SpinWaveParams& p) : integrator_(p) {
  contract_.obs_dim = static_cast<std::size_t>(p.w_out_count);
  contract_.input_support.resize(static_cast<std::size_t>(2 * p.w_in));
  for (std::size_t i = 0; i < contract_.input_support.size(); ++i) contract_.input_support[i] = i;
  contract_.step_duration = p.dt * p.substeps_per_symbol;
  psi_ = ComplexVector::Zero(p.nx);
  drive_ = ComplexVector::Zero(p.w_in);
  obs_ = Vector::Zero(p.w_out_count);
}

void SpinWaveReservoir::reset(std::uint64_t seed) {
  psi_.setZero();
  rng_ = Rng(derive_seed(seed, "noise"));
  symbols_ = 0;
}

const Vector& SpinWaveReservoir::step(const Vector& injection) {
  const int w_in = integrator_.params().w_in;
  if (injection.size() != 2 * w_in) throw Error(ErrorKind::Dimension, "SpinWaveReservoir::step: injection size");
  for (int j = 0; j < w_in; ++j) drive_(j) = cd(injection(2 * j), injection(2 * j + 1));
  try {
    integrator_.symbol(psi_, drive_, rng_);
  } catch (const Error& e) {
    if (e.kind() == ErrorKind::NumericalBlowup) {
      throw Error(ErrorKind::NumericalBlowup, fmt::format("{} at symbol {}", e.what(), symbols_));
    }
    throw;
  }
  ++symbols_;
  integrator_.observe(psi_, obs_);
  return obs_;
}

nlohmann::json SpinWaveReservoir::params_json() const {
  const auto& p = integrator_.params();
  return {{"nx", p.nx},
          {"dx", p.dx},
          {"dt", p.dt},
          {"substeps_per_symbol", p.substeps_per_symbol},
          {"gamma", p.gamma},
          {"omega0", p.omega0},
          {"v_g", p.v_g},
          {"dispersion", p.dispersion},
          {"noise_sigma", p.noise_sigma},
          {"w_in", p.w_in},
          {"w_out_start", p.w_out_start},
          {"w_out_count", p.w_out_count},
          {"absorb_ramp", p.absorb_ramp},
          {"bias_amplitude", p.bias_amplitude},
          {"seed", p.seed}};
}

}  // namespace rome
