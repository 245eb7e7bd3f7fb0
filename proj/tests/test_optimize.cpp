#include <doctest.h>

#include <cmath>

#include "ftnet/errors.hpp"
#include "ftnet/optimize.hpp"
#include "ftnet/random_models.hpp"

using namespace ftnet;

namespace {

Dataset random_dataset(Rng& rng, std::size_t n, std::size_t I) {
  Dataset d;
  for (std::size_t i = 0; i < n; ++i) {
    d.xs.push_back(random_vector(rng, I, 1.0));
    d.ys.push_back(uniform(rng, -1.0, 1.0));
  }
  return d;
}

SequenceDataset random_sequences(Rng& rng, std::size_t count, std::size_t T, std::size_t I) {
  SequenceDataset d;
  for (std::size_t k = 0; k < count; ++k) {
    d.xs.push_back(random_sequence(rng, T, I));
    d.ys.push_back(random_vector(rng, T, 1.0));
  }
  return d;
}

bool all_zero(const GradientBundle& g) {
  for (double v : g.dW.data())
    if (v != 0.0) return false;
  for (double v : g.dV.data())
    if (v != 0.0) return false;
  for (double v : g.dAlpha)
    if (v != 0.0) return false;
  return true;
}

// Random perturbations on the delta sphere, any of which lowers the loss.
bool ball_oracle_improves(const FFTNetParams& p, const Dataset& data, const LossSpec& spec,
                          double delta, Rng& rng) {
  const double base = empirical_loss(p, data, spec);
  for (int trial = 0; trial < 4000; ++trial) {
    const double scale = delta * std::ldexp(1.0, -static_cast<int>(trial % 20));
    ComplexMatrix dz(random_matrix(rng, p.H, p.H, 1.0), random_matrix(rng, p.H, p.H, 1.0));
    Vector da = random_vector(rng, p.H, 1.0);
    const double norm = frobenius_norm(dz) + norm2(da);
    for (double& v : dz.re.data()) v *= 0.99 * scale / norm;
    for (double& v : dz.im.data()) v *= 0.99 * scale / norm;
    for (double& v : da) v *= 0.99 * scale / norm;
    if (empirical_loss(perturbed(p, dz, da), data, spec) < base) return true;
  }
  return false;
}

void check_probe(const ProbeResult& r, const FFTNetParams& p, const Dataset& data, const LossSpec& spec,
                 double delta) {
  REQUIRE(r.found);
  CHECK(r.new_loss < r.old_loss);
  CHECK(frobenius_norm(r.deltaZ) + norm2(r.deltaAlpha) <= delta);
  CHECK(r.perturbation_norm <= delta);
  CHECK(empirical_loss(perturbed(p, r.deltaZ, r.deltaAlpha), data, spec) < r.old_loss);
}

}  // namespace

TEST_CASE("feedforward gradient matches central differences") {
  Rng rng(71);
  for (const auto& kind : {ActivationKind::holexpm1(), ActivationKind::holsin()}) {
    for (int trial = 0; trial < 25; ++trial) {
      const std::size_t I = uniform_int(rng, 1, 5);
      const std::size_t H = uniform_int(rng, I + 1, I + 4);
      const FFTNetParams p = random_fftnet(rng, I, H, kind, 0.5);
      const Dataset data = random_dataset(rng, uniform_int(rng, 1, 8), I);
      for (const LossSpec& s : {LossSpec::squared(), LossSpec::param_cosh(1.2, 1.2, 0.8)}) {
        CHECK(relative_error(grad_fftnet(p, data, s), finite_diff_grad(p, data, s, 1e-5)) <= 1e-5);
      }
    }
  }
}

TEST_CASE("recurrent gradient matches central differences") {
  Rng rng(72);
  for (const auto& kind : {ActivationKind::holexpm1(), ActivationKind::holsin()}) {
    for (int trial = 0; trial < 25; ++trial) {
      const std::size_t I = uniform_int(rng, 1, 4);
      const std::size_t H = uniform_int(rng, I + 1, I + 4);
      const RFTNetParams p = random_rftnet(rng, I, H, kind, 0.4);
      const SequenceDataset data = random_sequences(rng, 3, uniform_int(rng, 1, 6), I);
      CHECK(relative_error(grad_rftnet(p, data, LossSpec::squared()),
                           finite_diff_grad_rftnet(p, data, LossSpec::squared(), 1e-5)) <= 1e-4);
    }
  }
}

TEST_CASE("gradient with zero readout") {
  Rng rng(73);
  FFTNetParams p = random_fftnet(rng, 2, 3, ActivationKind::holexpm1(), 0.7);
  std::fill(p.alpha.begin(), p.alpha.end(), 0.0);
  const Dataset data = random_dataset(rng, 4, 2);
  const GradientBundle g = grad_fftnet(p, data, LossSpec::squared());
  for (double v : g.dW.data()) CHECK(v == 0.0);
  for (double v : g.dV.data()) CHECK(v == 0.0);
  for (std::size_t h = 0; h < 3; ++h) {
    double expected = 0.0;
    for (std::size_t i = 0; i < 4; ++i) {
      const Vector k = kappa(data.xs[i], 3);
      Complex z = 0.0;
      for (std::size_t j = 0; j < 3; ++j) z += Complex(p.W(h, j), p.V(h, j)) * k[j];
      expected += LossSpec::squared().deriv(-data.ys[i]) * ftnet::apply(p.activation, z).real();
    }
    CHECK(g.dAlpha[h] == doctest::Approx(expected).epsilon(1e-13));
  }
  CHECK(relative_error(g, finite_diff_grad(p, data, LossSpec::squared())) <= 1e-5);
}

TEST_CASE("zero residuals give a zero gradient") {
  Rng rng(74);
  const FFTNetParams p = random_fftnet(rng, 3, 4, ActivationKind::holsin(), 0.5);
  Dataset data = random_dataset(rng, 5, 3);
  for (std::size_t i = 0; i < data.size(); ++i) data.ys[i] = eval_fftnet(p, data.xs[i]);
  CHECK(all_zero(grad_fftnet(p, data, LossSpec::squared())));
  CHECK(all_zero(grad_fftnet(p, data, LossSpec::param_cosh())));
}

TEST_CASE("finite differences reject steps outside the admissible range") {
  Rng rng(75);
  const FFTNetParams p = random_fftnet(rng, 1, 2, ActivationKind::holsin(), 0.5);
  const Dataset data = random_dataset(rng, 2, 1);
  CHECK_THROWS_AS(finite_diff_grad(p, data, LossSpec::squared(), 1e-2), ContractViolation);
  CHECK_THROWS_AS(finite_diff_grad(p, data, LossSpec::squared(), 1e-9), ContractViolation);
}

TEST_CASE("trainer stops immediately on solved data") {
  FFTNetParams zero{2, 3, Matrix(3, 3), Matrix(3, 3), Vector(3, 0.0), ActivationKind::holexpm1()};
  Dataset data{{{0.1, 0.2}, {-0.3, 0.5}}, {0.0, 0.0}};
  TrainConfig cfg;
  cfg.max_iters = 100;
  const FFTNetTrainResult r = train_fftnet(zero, data, LossSpec::squared(), cfg);
  CHECK(r.trace.iterations == 0);
  CHECK(r.trace.losses == Vector{0.0});
  CHECK(r.trace.reached_target);
}

TEST_CASE("trainer accepted losses never increase") {
  Rng rng(76);
  const FFTNetParams p0 = random_fftnet(rng, 3, 6, ActivationKind::holexpm1(), 0.3);
  const Dataset data = random_dataset(rng, 10, 3);
  TrainConfig cfg;
  cfg.step_size = 0.5;
  cfg.max_iters = 300;
  cfg.step_growth = 1.2;
  const FFTNetTrainResult r = train_fftnet(p0, data, LossSpec::squared(), cfg);
  REQUIRE(r.trace.losses.size() >= 2);
  for (std::size_t i = 1; i < r.trace.losses.size(); ++i) CHECK(r.trace.losses[i] <= r.trace.losses[i - 1]);
  CHECK(r.trace.losses.back() < r.trace.losses.front());
  CHECK(r.trace.losses.back() == doctest::Approx(empirical_loss(r.params, data, LossSpec::squared())));
}

TEST_CASE("trainer reports a non-finite start") {
  Rng rng(77);
  const FFTNetParams p0 = random_fftnet(rng, 1, 2, ActivationKind::holexpm1(), 1e3);
  Dataset data{{{1.0}}, {0.0}};
  CHECK_THROWS_AS(train_fftnet(p0, data, LossSpec::squared(), TrainConfig{}), NonFiniteLoss);
}

TEST_CASE("recurrent trainer fits a memoryless target") {
  const auto f = [](std::span<const double> x) { return 0.6 * x[0] - 0.4 * x[1]; };
  const DODSSpec target = dods_input_passthrough(2, f);
  Rng rng(78);
  SequenceDataset data;
  for (int k = 0; k < 16; ++k) {
    Sequence xs = random_sequence(rng, 5, 2);
    data.ys.push_back(eval_dods(target, xs));
    data.xs.push_back(std::move(xs));
  }
  const RFTNetParams p0 = random_rftnet(rng, 2, 8, ActivationKind::holexpm1(), 0.2);
  TrainConfig cfg;
  cfg.step_size = 1e-2;
  cfg.step_growth = 1.1;
  cfg.max_iters = 5000;
  cfg.target_loss = 1e-2 * 16 * 5;
  const RFTNetTrainResult r = train_rftnet(p0, data, LossSpec::squared(), cfg);
  CHECK(r.trace.losses.back() / (16 * 5) <= 1e-2);

  SequenceDataset zeros = data;
  for (Vector& y : zeros.ys) std::fill(y.begin(), y.end(), 0.0);
  cfg.target_loss = 1e-6;
  cfg.max_iters = 20000;
  const RFTNetTrainResult z = train_rftnet(p0, zeros, LossSpec::squared(), cfg);
  CHECK(z.trace.reached_target);
  CHECK(z.trace.losses.back() <= 1e-6);
}

TEST_CASE("descent probe, nonzero readout") {
  FFTNetParams p;
  p.I = 2;
  p.H = 3;
  Rng rng(79);
  p.W = random_matrix(rng, 3, 3, 0.5);
  p.V = random_matrix(rng, 3, 3, 0.5);
  p.alpha = {1.0, 0.0, 0.0};
  p.activation = ActivationKind::holexpm1();
  Dataset data{{{0.4, -0.2}}, {0.0}};
  data.ys[0] = eval_fftnet(p, data.xs[0]) - 0.5;
  const ProbeResult r = descent_probe(p, data, LossSpec::squared(), 0.1, 5);
  check_probe(r, p, data, LossSpec::squared(), 0.1);
  CHECK(r.case_tag == ProbeCase::AlphaNonzero);
  Rng oracle(1);
  CHECK(ball_oracle_improves(p, data, LossSpec::squared(), 0.1, oracle));
}

TEST_CASE("descent probe, zero readout") {
  Rng rng(80);
  FFTNetParams p = random_fftnet(rng, 3, 4, ActivationKind::holsin(), 0.5);
  std::fill(p.alpha.begin(), p.alpha.end(), 0.0);
  const Dataset data = random_dataset(rng, 2, 3);
  const ProbeResult r = descent_probe(p, data, LossSpec::squared(), 0.1, 9);
  check_probe(r, p, data, LossSpec::squared(), 0.1);
  CHECK(r.case_tag == ProbeCase::AlphaZero);
  Rng oracle(2);
  CHECK(ball_oracle_improves(p, data, LossSpec::squared(), 0.1, oracle));
}

TEST_CASE("descent probe on random admissible instances") {
  Rng rng(81);
  for (int trial = 0; trial < 40; ++trial) {
    const std::size_t I = uniform_int(rng, 2, 8);
    const std::size_t n = uniform_int(rng, 1, I);
    FFTNetParams p = random_fftnet(rng, I, I + 1, ActivationKind::holexpm1(), 0.5);
    if (trial % 2 == 1) std::fill(p.alpha.begin(), p.alpha.end(), 0.0);
    const Dataset data = random_dataset(rng, n, I);
    const LossSpec spec = trial % 3 == 0 ? LossSpec::param_cosh() : LossSpec::squared();
    const ProbeResult r = descent_probe(p, data, spec, 0.1, derive_seed(7, trial));
    check_probe(r, p, data, spec, 0.1);
    const ProbeResult again = descent_probe(p, data, spec, 0.1, derive_seed(7, trial));
    CHECK(again.new_loss == r.new_loss);
  }
}

TEST_CASE("descent probe preconditions") {
  Rng rng(82);
  const FFTNetParams p = random_fftnet(rng, 2, 3, ActivationKind::holexpm1(), 0.5);
  Dataset solved{{{0.1, 0.2}}, {0.0}};
  solved.ys[0] = eval_fftnet(p, solved.xs[0]);
  CHECK_THROWS_AS(descent_probe(p, solved, LossSpec::squared(), 0.1, 1), ContractViolation);

  const Dataset data = random_dataset(rng, 2, 2);
  FFTNetParams z = p;
  z.activation = ActivationKind::zrelu();
  CHECK_THROWS_AS(descent_probe(z, data, LossSpec::squared(), 0.1, 1), ContractViolation);
  CHECK_THROWS_AS(descent_probe(p, data, LossSpec::param_cosh(2, 3, 1), 0.1, 1), ContractViolation);
  CHECK_THROWS_AS(descent_probe(p, data, LossSpec::squared(), 0.0, 1), ContractViolation);
  Dataset dependent{{{0.5, 0.5}, {0.5, 0.5}}, {1.0, -1.0}};
  CHECK_THROWS_AS(descent_probe(p, dependent, LossSpec::squared(), 0.1, 1), ContractViolation);
}

TEST_CASE("holomorphic bidirectional search") {
  const std::vector<Complex> origin = {Complex(0.0, 0.0)};
  SUBCASE("identity") {
    const auto r = holomorphic_bidirectional_search([](std::span<const Complex> z) { return z[0]; }, origin, 0.01);
    REQUIRE(r.found_up);
    REQUIRE(r.found_down);
    CHECK(r.dz_up[0].real() > 0.0);
    CHECK(r.dz_down[0].real() < 0.0);
    CHECK(std::norm(r.dz_up[0]) <= 0.01);
    CHECK(std::norm(r.dz_down[0]) <= 0.01);
  }
  SUBCASE("square with vanishing first derivative") {
    const auto g = [](std::span<const Complex> z) { return z[0] * z[0]; };
    const auto r = holomorphic_bidirectional_search(g, origin, 0.01);
    REQUIRE(r.found_up);
    REQUIRE(r.found_down);
    CHECK(g(r.dz_up).real() > 0.0);
    CHECK(g(r.dz_down).real() < 0.0);
  }
  SUBCASE("several coordinates") {
    const std::vector<Complex> z0 = {Complex(0.3, 0.1), Complex(-0.2, 0.4)};
    const auto g = [](std::span<const Complex> z) { return std::exp(z[0]) * z[1]; };
    const auto r = holomorphic_bidirectional_search(g, z0, 1e-3);
    REQUIRE(r.found_up);
    REQUIRE(r.found_down);
    std::vector<Complex> up = z0;
    std::vector<Complex> down = z0;
    double n_up = 0.0;
    double n_down = 0.0;
    for (std::size_t m = 0; m < 2; ++m) {
      up[m] += r.dz_up[m];
      down[m] += r.dz_down[m];
      n_up += std::norm(r.dz_up[m]);
      n_down += std::norm(r.dz_down[m]);
    }
    CHECK(g(up).real() > g(z0).real());
    CHECK(g(down).real() < g(z0).real());
    CHECK(n_up <= 1e-3);
    CHECK(n_down <= 1e-3);
  }
  SUBCASE("constant") {
    const auto r = holomorphic_bidirectional_search([](std::span<const Complex>) { return Complex(2.0, 1.0); },
                                                    origin, 0.01);
    CHECK_FALSE(r.found_up);
    CHECK_FALSE(r.found_down);
  }
}
