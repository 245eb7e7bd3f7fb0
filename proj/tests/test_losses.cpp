#include <doctest.h>

#include <cmath>

#include "ftnet/losses.hpp"
#include "ftnet/random_models.hpp"

using namespace ftnet;

TEST_CASE("loss values") {
  CHECK(loss_value(LossSpec::squared(), 0.0) == 0.0);
  CHECK(loss_value(LossSpec::squared(), -3.0) == 9.0);
  CHECK(loss_value(LossSpec::param_cosh(), 0.0) == 0.0);
  const double expected = std::log(std::exp(1.0) + std::exp(-1.0)) - std::log(2.0);
  CHECK(loss_value(LossSpec::param_cosh(1, 1, 1), 1.0) == doctest::Approx(expected).epsilon(1e-15));
  CHECK(loss_value(LossSpec::param_cosh(1, 1, 1), 1.0) == doctest::Approx(0.433780).epsilon(1e-6));
  // large arguments stay finite
  const double big = loss_value(LossSpec::param_cosh(2, 1, 0.5), 800.0);
  CHECK(std::isfinite(big));
  CHECK(big == doctest::Approx((2.0 * 800.0 - std::log(2.0)) / 0.5).epsilon(1e-12));
  CHECK(std::isfinite(loss_value(LossSpec::param_cosh(1, 3, 1), -900.0)));
}

TEST_CASE("loss derivatives match central differences") {
  Rng rng(61);
  const std::vector<LossSpec> specs = {LossSpec::squared(), LossSpec::param_cosh(),
                                       LossSpec::param_cosh(2, 3, 1), LossSpec::param_cosh(0.5, 0.7, 2)};
  for (const LossSpec& s : specs) {
    double worst = 0.0;
    for (int i = 0; i < 1000; ++i) {
      const double x = uniform(rng, -10.0, 10.0);
      const double h = 1e-5 * std::max(1.0, std::abs(x));
      const double fd = (loss_value(s, x + h) - loss_value(s, x - h)) / (2 * h);
      const double d = loss_deriv(s, x);
      worst = std::max(worst, std::abs(d - fd) / std::max(std::abs(d), 1e-3));
    }
    CAPTURE(to_string(s));
    CHECK(worst <= 1e-7);
  }
}

TEST_CASE("well-posedness checker") {
  CHECK(check_well_posed(LossSpec::squared()).passed);
  CHECK(check_well_posed(LossSpec::param_cosh()).passed);
  CHECK(check_well_posed(LossSpec::param_cosh(2.5, 2.5, 0.7)).passed);

  const WellPosedReport cube = check_well_posed([](double x) { return x * x * x; },
                                                [](double x) { return 3.0 * x * x; });
  CHECK_FALSE(cube.passed);
  CHECK(cube.violations > 0);
  CHECK(cube.first_violations.front() < 0.0);

  const WellPosedReport shifted =
      check_well_posed([](double x) { return x * x + 1.0; }, [](double x) { return 2.0 * x; });
  CHECK_FALSE(shifted.passed);
  CHECK(shifted.value_at_zero == 1.0);
}

TEST_CASE("param_cosh with unequal slopes has its minimum away from zero") {
  const LossSpec s = LossSpec::param_cosh(2, 3, 1);
  CHECK(loss_deriv(s, 0.0) == doctest::Approx((2.0 - 3.0) / 2.0).epsilon(1e-15));
  const double xstar = std::log(3.0 / 2.0) / 5.0;
  CHECK(std::abs(loss_deriv(s, xstar)) <= 1e-15);
  CHECK(loss_value(s, xstar) < 0.0);
  const WellPosedReport r = check_well_posed(s);
  CHECK_FALSE(r.passed);
  CHECK(r.first_violations.front() > 0.0);
  CHECK(r.first_violations.front() < xstar + 1e-2);
}

TEST_CASE("empirical loss") {
  FFTNetParams zero{1, 2, Matrix(2, 2), Matrix(2, 2), Vector(2, 0.0), ActivationKind::holexpm1()};
  Dataset d{{{0.3}, {-0.4}}, {0.0, 0.0}};
  CHECK(empirical_loss(zero, d, LossSpec::squared()) == 0.0);
  d.ys = {1.0, -1.0};
  CHECK(empirical_loss(zero, d, LossSpec::squared()) == 2.0);

  Rng rng(62);
  for (int trial = 0; trial < 30; ++trial) {
    const std::size_t I = uniform_int(rng, 1, 5);
    const FFTNetParams p = random_fftnet(rng, I, I + 2, ActivationKind::holsin(), 0.5);
    Dataset data;
    for (int i = 0; i < 7; ++i) {
      data.xs.push_back(random_vector(rng, I, 1.0));
      data.ys.push_back(uniform(rng, -1.0, 1.0));
    }
    for (const LossSpec& s : {LossSpec::squared(), LossSpec::param_cosh(1.5, 1.5, 2.0)}) {
      double naive = 0.0;
      for (std::size_t i = 0; i < data.size(); ++i) naive += s.value(eval_fftnet(p, data.xs[i]) - data.ys[i]);
      const double got = empirical_loss(p, data, s);
      CHECK(got == doctest::Approx(naive).epsilon(1e-14));
      CHECK(got > 0.0);
    }
  }
}

TEST_CASE("well-posed losses are positive away from zero") {
  Rng rng(63);
  for (const LossSpec& s : {LossSpec::squared(), LossSpec::param_cosh(), LossSpec::param_cosh(0.6, 0.6, 3)}) {
    for (int i = 0; i < 1000; ++i) {
      double x = uniform(rng, -10.0, 10.0);
      if (x == 0.0) x = 1e-3;
      CHECK(loss_value(s, x) > 0.0);
    }
  }
}

TEST_CASE("empirical loss vanishes exactly on interpolating data") {
  Rng rng(64);
  const FFTNetParams p = random_fftnet(rng, 3, 4, ActivationKind::holexpm1(), 0.5);
  Dataset data;
  for (int i = 0; i < 5; ++i) {
    data.xs.push_back(random_vector(rng, 3, 1.0));
    data.ys.push_back(eval_fftnet(p, data.xs.back()));
  }
  CHECK(empirical_loss(p, data, LossSpec::squared()) <= 1e-12);
  CHECK(empirical_loss(p, data, LossSpec::param_cosh()) <= 1e-12);
  data.ys[2] += 1e-3;
  CHECK(empirical_loss(p, data, LossSpec::squared()) > 1e-12);
}

TEST_CASE("loss descriptors") {
  CHECK(to_string(LossSpec::squared()) == "squared");
  CHECK(LossSpec::param_cosh().a == 1.0);
}
