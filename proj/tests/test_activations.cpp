#include <doctest.h>

#include <cmath>

#include "ftnet/activations.hpp"
#include "ftnet/errors.hpp"
#include "ftnet/random_models.hpp"

using namespace ftnet;

namespace {

const std::vector<ActivationKind> kAllKinds = {
    ActivationKind::zrelu(),    ActivationKind::modrelu(),  ActivationKind::crelu(),
    ActivationKind::holexpm1(), ActivationKind::holsin(),   ActivationKind::relu(),
    ActivationKind::identity()};

bool same(Complex a, Complex b) { return a.real() == b.real() && a.imag() == b.imag(); }

}  // namespace

TEST_CASE("zReLU phase gate") {
  const auto z = ActivationKind::zrelu();
  CHECK(same(ftnet::apply(z, {1.0, 1.0}), {1.0, 1.0}));
  CHECK(same(ftnet::apply(z, {1.0, -1.0}), {0.0, 0.0}));
  CHECK(same(ftnet::apply(z, {-1.0, -1.0}), {-1.0, -1.0}));
  CHECK(same(ftnet::apply(z, {-1.0, 1.0}), {0.0, 0.0}));
  // axes belong to the closed pass set
  CHECK(same(ftnet::apply(z, {2.0, 0.0}), {2.0, 0.0}));
  CHECK(same(ftnet::apply(z, {0.0, -3.0}), {0.0, -3.0}));
  CHECK(same(ftnet::apply(z, {0.0, 0.0}), {0.0, 0.0}));
}

TEST_CASE("holomorphic kinds") {
  CHECK(same(ftnet::apply(ActivationKind::holexpm1(), {0.0, 0.0}), {0.0, 0.0}));
  const Complex w(0.3, -0.7);
  const Complex e = ftnet::apply(ActivationKind::holexpm1(), w);
  CHECK(std::abs(e - (std::exp(w) - 1.0)) <= 1e-15);
  CHECK(std::abs(ftnet::apply(ActivationKind::holsin(), w) - std::sin(w)) <= 1e-15);
  // expm1 path keeps full relative accuracy near zero
  const Complex tiny(1e-12, 1e-12);
  CHECK(std::abs(ftnet::apply(ActivationKind::holexpm1(), tiny) - tiny) <= 1e-22);
}

TEST_CASE("ModReLU, CReLU and real kinds") {
  const auto m = ActivationKind::modrelu(-0.5);
  CHECK(same(ftnet::apply(m, {0.3, 0.0}), {0.0, 0.0}));
  const Complex out = ftnet::apply(m, {3.0, 4.0});
  CHECK(out.real() == doctest::Approx(3.0 * 4.5 / 5.0));
  CHECK(out.imag() == doctest::Approx(4.0 * 4.5 / 5.0));
  CHECK(same(ftnet::apply(ActivationKind::crelu(), {-1.0, 2.0}), {0.0, 2.0}));
  CHECK(same(ftnet::apply(ActivationKind::relu(), {-1.0, 2.0}), {0.0, 2.0}));
  CHECK(same(ftnet::apply(ActivationKind::identity(), {-1.0, 2.0}), {-1.0, 2.0}));
}

TEST_CASE("every kind maps zero to zero") {
  for (const auto& k : kAllKinds) {
    CAPTURE(to_string(k));
    CHECK(same(ftnet::apply(k, {0.0, 0.0}), {0.0, 0.0}));
  }
}

TEST_CASE("zReLU output is z or 0, and z exactly when Re*Im >= 0") {
  Rng rng(21);
  const auto k = ActivationKind::zrelu();
  for (int i = 0; i < 5000; ++i) {
    const Complex z(uniform(rng, -5.0, 5.0), uniform(rng, -5.0, 5.0));
    const Complex out = ftnet::apply(k, z);
    CHECK((same(out, z) || same(out, {0.0, 0.0})));
    CHECK(same(out, z) == (z.real() * z.imag() >= 0.0));
    CHECK(same(ftnet::apply(k, -z), -out));
  }
}

TEST_CASE("induced restrictions") {
  const auto z = ActivationKind::zrelu();
  CHECK(induced_real(z, 1.0, 0.5, InducedConvention::RealArgImagBias) == 0.5);
  CHECK(induced_real(z, 1.0, -0.5, InducedConvention::RealArgImagBias) == 0.0);
  CHECK(induced_real(z, 1.0, 0.5, InducedConvention::ImagArgRealBias) == 1.0);
  CHECK(induced_imag(z, 1.0, 0.5, InducedConvention::ImagArgRealBias) == 0.5);
  CHECK(induced_imag(z, 1.0, 0.5, InducedConvention::RealArgImagBias) == 1.0);

  const auto sigma = RealActivation::restriction(z, 1.0, InducedConvention::RealArgImagBias, Part::Re);
  CHECK(sigma(0.5) == 0.5);
  CHECK(sigma(-0.5) == 0.0);
  CHECK(RealActivation::relu()(-2.0) == 0.0);
  CHECK(RealActivation::identity()(-2.0) == -2.0);
}

TEST_CASE("subgradient examples") {
  const Jacobian2 id = subgradient(ActivationKind::zrelu(), {1.0, 1.0});
  CHECK((id.j00 == 1.0 && id.j01 == 0.0 && id.j10 == 0.0 && id.j11 == 1.0));
  const Jacobian2 zero = subgradient(ActivationKind::zrelu(), {1.0, -1.0});
  CHECK((zero.j00 == 0.0 && zero.j01 == 0.0 && zero.j10 == 0.0 && zero.j11 == 0.0));
  const Jacobian2 boundary = subgradient(ActivationKind::zrelu(), {0.0, -1.0});
  CHECK((boundary.j00 == 1.0 && boundary.j11 == 1.0));
  const Jacobian2 e = subgradient(ActivationKind::holexpm1(), {0.0, 0.0});
  CHECK((e.j00 == 1.0 && e.j01 == 0.0 && e.j10 == 0.0 && e.j11 == 1.0));
  CHECK_THROWS_AS(holomorphic_derivative(ActivationKind::zrelu(), {1.0, 0.0}), ContractViolation);
}

TEST_CASE("holomorphic subgradients match central differences") {
  Rng rng(22);
  const double h = 1e-5;
  for (const auto& k : {ActivationKind::holexpm1(), ActivationKind::holsin()}) {
    double worst = 0.0;
    for (int i = 0; i < 1000; ++i) {
      const Complex z(uniform(rng, -3.0, 3.0), uniform(rng, -3.0, 3.0));
      const Jacobian2 j = subgradient(k, z);
      const Complex dx = (ftnet::apply(k, z + Complex(h, 0)) - ftnet::apply(k, z - Complex(h, 0))) / (2 * h);
      const Complex dy = (ftnet::apply(k, z + Complex(0, h)) - ftnet::apply(k, z - Complex(0, h))) / (2 * h);
      const double err = std::hypot(std::hypot(j.j00 - dx.real(), j.j10 - dx.imag()),
                                    std::hypot(j.j01 - dy.real(), j.j11 - dy.imag()));
      const double scale = std::hypot(std::hypot(j.j00, j.j10), std::hypot(j.j01, j.j11));
      worst = std::max(worst, err / scale);
      // Cauchy-Riemann structure
      CHECK(j.j00 == j.j11);
      CHECK(j.j01 == -j.j10);
    }
    CAPTURE(to_string(k));
    CHECK(worst <= 1e-6);
  }
}

TEST_CASE("ModReLU subgradient matches central differences off the dead zone") {
  Rng rng(23);
  const auto k = ActivationKind::modrelu(-0.5);
  const double h = 1e-6;
  for (int i = 0; i < 500; ++i) {
    const Complex z(uniform(rng, -3.0, 3.0), uniform(rng, -3.0, 3.0));
    if (std::abs(z) < 0.6) continue;
    const Jacobian2 j = subgradient(k, z);
    const Complex dx = (ftnet::apply(k, z + Complex(h, 0)) - ftnet::apply(k, z - Complex(h, 0))) / (2 * h);
    const Complex dy = (ftnet::apply(k, z + Complex(0, h)) - ftnet::apply(k, z - Complex(0, h))) / (2 * h);
    CHECK(j.j00 == doctest::Approx(dx.real()).epsilon(1e-6));
    CHECK(j.j10 == doctest::Approx(dx.imag()).epsilon(1e-6));
    CHECK(j.j01 == doctest::Approx(dy.real()).epsilon(1e-6));
    CHECK(j.j11 == doctest::Approx(dy.imag()).epsilon(1e-6));
  }
}

TEST_CASE("induced derivative matches finite differences") {
  Rng rng(24);
  const double h = 1e-6;
  for (const auto conv : {InducedConvention::RealArgImagBias, InducedConvention::ImagArgRealBias}) {
    for (const auto part : {Part::Re, Part::Im}) {
      const auto sigma = RealActivation::restriction(ActivationKind::holsin(), 0.7, conv, part);
      for (int i = 0; i < 200; ++i) {
        const double x = uniform(rng, -2.0, 2.0);
        const double fd = (sigma(x + h) - sigma(x - h)) / (2 * h);
        CHECK(sigma.derivative(x) == doctest::Approx(fd).epsilon(1e-6));
      }
    }
  }
}

TEST_CASE("string tags round trip") {
  for (const auto& k : kAllKinds) CHECK(activation_from_string(to_string(k)) == k);
  CHECK(to_string(ActivationKind::zrelu()) == "zrelu");
  CHECK(to_string(ActivationKind::holexpm1()) == "holexpm1");
  CHECK(activation_from_string("modrelu", -0.25).modrelu_bias == -0.25);
  CHECK_THROWS_AS(activation_from_string("tanh"), ContractViolation);
  CHECK(ActivationKind::holsin().holomorphic());
  CHECK_FALSE(ActivationKind::zrelu().holomorphic());
}
