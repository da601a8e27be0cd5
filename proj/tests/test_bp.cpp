#include <cmath>

#include "doctest.h"
#include "rome/bp.hpp"
#include "rome/encoder.hpp"
#include "rome/error.hpp"
#include "rome/eval.hpp"
#include "rome/probe.hpp"
#include "rome/reservoirs.hpp"

using namespace rome;

namespace {

Matrix random_psd(int n, std::uint64_t seed) {
  Rng rng(seed);
  Matrix a(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) a(i, j) = rng.normal();
  return a * a.transpose() / n;
}

MemoryOperator linear_operator(int n, int k0, std::uint64_t seed) {
  Matrix w = make_random_internal_matrix(n, 0.9, 0.2, seed);
  return build_memory_operator(analytic_response(w, k0), analytic_fluctuations(w, 0.05), TaskWeights::single(k0),
                               1e-6);
}

}  // namespace

TEST_CASE("analytic gradient") {
  Matrix m = Matrix::Zero(2, 2);
  m(0, 0) = 2.0;
  m(1, 1) = 1.0;
  auto op = memory_operator_from_matrix(m);
  Matrix g(2, 1);
  g << 0.0, 1.0;
  auto grad = grad_objective_analytic(op, Encoder::from_whitened(g, Matrix::Identity(1, 1)));
  CHECK(grad(0, 0) == doctest::Approx(0.0));
  CHECK(grad(1, 0) == doctest::Approx(2.0));

  auto top = optimal_encoder(op, {.power = 3.0});
  auto gtop = grad_objective_analytic(op, top);
  CHECK(alignment(gtop, top.g) == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("analytic gradient matches finite differences") {
  for (std::uint64_t seed : {1, 2, 3}) {
    auto op = memory_operator_from_matrix(random_psd(7, seed));
    Matrix cov = Matrix::Constant(1, 1, 1.0 / 48.0);
    auto enc = random_encoder(0.4, 7, 1, seed + 10, cov);
    const Matrix sqrt_cov = sym_sqrt(cov);
    EncoderObjective j = [&](const Matrix& g) { return predicted_objective(op.m, Matrix(g * sqrt_cov)); };
    Matrix fd = finite_difference_gradient(j, enc.g, 1e-5);
    Matrix an = grad_objective_analytic(op, enc);
    CHECK((fd - an).norm() <= 1e-6 * an.norm());
  }
}

TEST_CASE("finite differences of simple objectives") {
  Matrix g(2, 1);
  g << 0.3, -0.7;
  EncoderObjective constant = [](const Matrix&) { return 4.0; };
  CHECK(finite_difference_gradient(constant, g, 1e-3).norm() == 0.0);
  EncoderObjective quad = [](const Matrix& x) { return 3.0 * x(0, 0) * x(0, 0) + x(1, 0); };
  Matrix fd = finite_difference_gradient(quad, g, 1e-2);
  CHECK(fd(0, 0) == doctest::Approx(1.8).epsilon(1e-10));
  CHECK(fd(1, 0) == doctest::Approx(1.0).epsilon(1e-10));
}

TEST_CASE("ascent from the optimum stays put") {
  auto op = linear_operator(20, 5, 4);
  auto rome = optimal_encoder(op, {.power = 1.0});
  AscentOptions opt;
  opt.steps = 100;
  auto trace = projected_gradient_ascent(op, rome, 1.0, opt, rome);
  for (const auto& rec : trace.records) {
    CHECK(rec.alignment == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(rec.objective == doctest::Approx(op.lambda_max()).epsilon(1e-10));
  }
}

TEST_CASE("ascent converges to the ROME direction with a monotone objective") {
  auto op = linear_operator(20, 5, 4);
  auto rome = optimal_encoder(op, {.power = 1.0});
  AscentOptions opt;
  opt.eta = 0.5 / op.lambda_max();
  opt.steps = 3000;
  for (std::uint64_t s = 1; s <= 4; ++s) {
    auto trace = projected_gradient_ascent(op, random_encoder(1.0, 20, 1, s), 1.0, opt, rome);
    REQUIRE(!trace.records.empty());
    CHECK(trace.records.back().alignment >= 0.99);
    CHECK(trace.final_encoder.whitened_power() == doctest::Approx(1.0).epsilon(1e-10));
    bool monotone = true;
    for (std::size_t i = 1; i < trace.records.size(); ++i) {
      monotone = monotone && trace.records[i].objective >= trace.records[i - 1].objective * (1.0 - 1e-12);
    }
    CHECK(monotone);
    CHECK(static_cast<int>(trace.records.size()) <= opt.steps + 1);
  }
}

TEST_CASE("ascent is sign invariant") {
  auto op = linear_operator(15, 3, 6);
  auto rome = optimal_encoder(op, {.power = 1.0});
  auto start = random_encoder(1.0, 15, 1, 9);
  Encoder flipped = start;
  flipped.g = -start.g;
  AscentOptions opt;
  opt.steps = 200;
  auto a = projected_gradient_ascent(op, start, 1.0, opt, rome);
  auto b = projected_gradient_ascent(op, flipped, 1.0, opt, rome);
  REQUIRE(a.records.size() == b.records.size());
  for (std::size_t i = 0; i < a.records.size(); ++i) {
    CHECK(a.records[i].alignment == doctest::Approx(b.records[i].alignment).epsilon(1e-12));
  }
}

TEST_CASE("ascent calls the evaluation hook on schedule") {
  auto op = linear_operator(10, 2, 7);
  auto rome = optimal_encoder(op, {.power = 1.0});
  AscentOptions opt;
  opt.steps = 50;
  opt.eval_every = 10;
  int calls = 0;
  auto trace = projected_gradient_ascent(op, random_encoder(1.0, 10, 1, 1), 1.0, opt, rome, [&](const Encoder&) {
    ++calls;
    return 0.5;
  });
  CHECK(calls >= 5);
  for (const auto& rec : trace.records) CHECK(rec.r2.has_value() == (rec.step % 10 == 0));
}

TEST_CASE("a persistently decreasing objective is reported") {
  // Descent direction in place of the gradient.
  Matrix m = Matrix::Zero(2, 2);
  m(0, 0) = 1.0;
  m(1, 1) = 0.999;
  auto op = memory_operator_from_matrix(m);
  EncoderObjective j = [&](const Matrix& g) { return predicted_objective(op.m, g); };
  EncoderGradient grad = [&](const Matrix& g) { return Matrix(-2.0 * op.m * g); };
  auto start = random_encoder(1.0, 2, 1, 3);
  AscentOptions opt;
  opt.eta = 0.1;
  opt.steps = 200;
  CHECK_THROWS_AS(projected_gradient_ascent(j, grad, start, 1.0, opt, optimal_encoder(op, {.power = 1.0})), Error);
}

TEST_CASE("exact corr² objective: gradient ascent also finds the optimum") {
  Matrix w = make_random_internal_matrix(6, 0.8, 0.6, 5);
  const int k = 2;
  EncoderObjective j = exact_linear_memory_objective(w, 0.05, k);
  EncoderGradient grad = [&](const Matrix& g) { return finite_difference_gradient(j, g, 1e-6); };
  auto start = random_encoder(0.5, 6, 1, 2);
  AscentOptions opt;
  opt.eta = 0.5;
  opt.steps = 400;
  auto trace = projected_gradient_ascent(j, grad, start, 0.5, opt, start);
  const double final_value = j(trace.final_encoder.whitened());
  CHECK(final_value >= j(start.whitened()));
  Rng rng(8);
  for (int i = 0; i < 200; ++i) {
    Matrix g(6, 1);
    for (int r = 0; r < 6; ++r) g(r, 0) = rng.normal();
    g *= std::sqrt(0.5) / g.norm();
    CHECK(j(g) <= final_value + 1e-6);
  }

  // The exact objective is the empirical MF of long runs.
  LinearReservoir res(w, 0.05);
  auto u = gen_white_input(50000, 1.0, 4);
  Encoder enc = Encoder::from_whitened(trace.final_encoder.whitened(), Matrix::Constant(1, 1, 1.0 / 3.0));
  auto run = drive(res, enc, u, 500, 4);
  CHECK(memory_function_empirical(run, u, k) == doctest::Approx(final_value).epsilon(0.05));
}

TEST_CASE("encoder fingerprint") {
  Matrix a = Matrix::Constant(3, 1, 0.25);
  CHECK(encoder_fingerprint(a) == encoder_fingerprint(Matrix(a)));
  Matrix b = a;
  b(2, 0) = 0.2500001;
  CHECK(encoder_fingerprint(a) != encoder_fingerprint(b));
}
