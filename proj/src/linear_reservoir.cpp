#include <cmath>

#include <fmt/format.h>

#include "rome/error.hpp"
#include "rome/reservoirs.hpp"

namespace rome {

Matrix make_random_internal_matrix(int n, double spectral_radius_target, double density, std::uint64_t seed) {
  if (n < 1) throw Error(ErrorKind::InvalidInput, "make_random_internal_matrix: N must be >= 1");
  if (!(spectral_radius_target > 0.0 && spectral_radius_target < 1.0)) {
    throw Error(ErrorKind::InvalidInput, "make_random_internal_matrix: spectral radius target must lie in (0,1)");
  }
  if (!(density > 0.0 && density <= 1.0)) {
    throw Error(ErrorKind::InvalidInput, "make_random_internal_matrix: density must lie in (0,1]");
  }
  for (std::uint64_t attempt = 0; attempt < 8; ++attempt) {
    Rng rng(derive_seed(derive_seed(seed, "internal-matrix"), attempt));
    Matrix w(n, n);
    // Column-major fill, entry (i, j) drawn in a fixed order.
    for (int j = 0; j < n; ++j) {
      for (int i = 0; i < n; ++i) {
        const double g = rng.normal();
        const bool keep = density >= 1.0 || rng.bernoulli(density);
        w(i, j) = keep ? g : 0.0;
      }
    }
    const double rho = spectral_radius(w);
    if (rho <= 1e-300) continue;
    return w * (spectral_radius_target / rho);
  }
  throw Error(ErrorKind::InvalidInput,
              fmt::format("make_random_internal_matrix: all 8 realizations were degenerate (N={}, density={})", n,
                          density));
}

namespace {

void check_dims(const Vector& state, const Matrix& w, const Vector& drive) {
  if (w.rows() != state.size() || w.cols() != state.size() || drive.size() != state.size()) {
    throw Error(ErrorKind::Dimension,
                fmt::format("reservoir step: state {} / W {}x{} / drive {} disagree", state.size(), w.rows(),
                            w.cols(), drive.size()));
  }
}

void add_noise(Vector& x, double sigma, Rng& rng) {
  if (sigma == 0.0) return;
  for (Eigen::Index i = 0; i < x.size(); ++i) x(i) += sigma * rng.normal();
}

}  // namespace

Vector linear_step(const Vector& state, const Matrix& w, const Vector& drive, double noise_sigma, Rng& rng) {
  check_dims(state, w, drive);
  Vector next = w * state + drive;
  add_noise(next, noise_sigma, rng);
  return next;
}

Vector esn_step(const Vector& state, const Matrix& w, const Vector& drive, double noise_sigma, Rng& rng) {
  check_dims(state, w, drive);
  Vector pre = w * state + drive;
  add_noise(pre, noise_sigma, rng);
  return pre.array().tanh().matrix();
}

LinearReservoir::LinearReservoir(Matrix w, double noise_sigma, bool tanh_nonlinearity)
    : w_(std::move(w)), noise_sigma_(noise_sigma), tanh_(tanh_nonlinearity) {
  if (w_.rows() != w_.cols() || w_.rows() == 0) throw Error(ErrorKind::Dimension, "LinearReservoir: W must be square");
  require_finite(w_, "LinearReservoir");
  if (!(noise_sigma_ >= 0.0) || !std::isfinite(noise_sigma_)) {
    throw Error(ErrorKind::Config, "LinearReservoir: noise_sigma must be finite and >= 0");
  }
  const auto n = static_cast<std::size_t>(w_.rows());
  contract_.obs_dim = n;
  contract_.input_support.resize(n);
  for (std::size_t i = 0; i < n; ++i) contract_.input_support[i] = i;
  contract_.step_duration = 1.0;
  state_ = Vector::Zero(w_.rows());
  noise_ = Vector::Zero(w_.rows());
  origin_ = {{"n", w_.rows()}, {"noise_sigma", noise_sigma_}, {"weights", "explicit"}};
}

std::unique_ptr<LinearReservoir> LinearReservoir::linear(const LinearReservoirParams& p) {
  auto r = std::make_unique<LinearReservoir>(
      make_random_internal_matrix(p.n, p.spectral_radius, p.density, p.seed), p.noise_sigma, false);
  r->origin_ = {{"n", p.n},
                {"spectral_radius", p.spectral_radius},
                {"density", p.density},
                {"noise_sigma", p.noise_sigma},
                {"seed", p.seed}};
  return r;
}

std::unique_ptr<LinearReservoir> LinearReservoir::esn(const EsnParams& p) {
  auto r = std::make_unique<LinearReservoir>(
      make_random_internal_matrix(p.n, p.spectral_radius, p.density, p.seed), p.noise_sigma, true);
  r->origin_ = {{"n", p.n},
                {"spectral_radius", p.spectral_radius},
                {"density", p.density},
                {"noise_sigma", p.noise_sigma},
                {"seed", p.seed}};
  return r;
}

void LinearReservoir::reset(std::uint64_t seed) {
  state_.setZero();
  rng_ = Rng(derive_seed(seed, "noise"));
}

void LinearReservoir::set_state(const Vector& x) {
  if (x.size() != state_.size()) throw Error(ErrorKind::Dimension, "LinearReservoir::set_state: size mismatch");
  state_ = x;
}

const Vector& LinearReservoir::step(const Vector& injection) {
  if (injection.size() != state_.size()) {
    throw Error(ErrorKind::Dimension, "LinearReservoir::step: injection size mismatch");
  }
  noise_.noalias() = w_ * state_;
  noise_ += injection;
  add_noise(noise_, noise_sigma_, rng_);
  if (tanh_) {
    state_ = noise_.array().tanh().matrix();
  } else {
    state_.swap(noise_);
  }
  return state_;
}

nlohmann::json LinearReservoir::params_json() const { return origin_; }

}  // namespace rome
