#include "ftnet/random_models.hpp"

#include <algorithm>
#include <cmath>

namespace ftnet {

std::uint64_t derive_seed(std::uint64_t base, std::uint64_t index) {
  std::uint64_t z = base + 0x9e3779b97f4a7c15ULL * (index + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

double uniform(Rng& rng, double lo, double hi) {
  return std::uniform_real_distribution<double>(lo, hi)(rng);
}

std::size_t uniform_int(Rng& rng, std::size_t lo, std::size_t hi) {
  return std::uniform_int_distribution<std::size_t>(lo, hi)(rng);
}

Matrix random_matrix(Rng& rng, std::size_t rows, std::size_t cols, double scale) {
  Matrix m(rows, cols);
  for (double& x : m.data()) x = uniform(rng, -scale, scale);
  return m;
}

Vector random_vector(Rng& rng, std::size_t n, double scale) {
  Vector v(n);
  for (double& x : v) x = uniform(rng, -scale, scale);
  return v;
}

Sequence random_sequence(Rng& rng, std::size_t T, std::size_t I, double scale) {
  Sequence xs(T);
  for (auto& x : xs) x = random_vector(rng, I, scale);
  return xs;
}

namespace {

double fan_in_scale(std::size_t n) { return 1.0 / std::sqrt(static_cast<double>(std::max<std::size_t>(n, 1))); }

}  // namespace

FNNParams random_fnn(Rng& rng, std::size_t I, std::size_t H, const RealActivation& sigma) {
  FNNParams f;
  f.I = I;
  f.H = H;
  f.W = random_matrix(rng, H, I, 1.0);
  f.b = random_vector(rng, H, 1.0);
  f.alpha = random_vector(rng, H, 1.0);
  f.activation = sigma;
  return f;
}

RNNParams random_rnn(Rng& rng, std::size_t I, std::size_t H, const RealActivation& sigma) {
  RNNParams r;
  r.I = I;
  r.H = H;
  r.W = random_matrix(rng, H, I, 1.0);
  r.V = random_matrix(rng, H, H, fan_in_scale(H));
  r.b = random_vector(rng, H, 1.0);
  r.alpha = random_vector(rng, H, 1.0);
  r.m0 = random_vector(rng, H, 1.0);
  for (double& m : r.m0) m = std::abs(m);
  r.activation = sigma;
  return r;
}

CRNetParams random_crnet(Rng& rng, std::size_t I, std::size_t H, const ActivationKind& kind) {
  CRNetParams c;
  c.I = I;
  c.H = H;
  c.W = ComplexMatrix(random_matrix(rng, H, I / 2, 1.0), random_matrix(rng, H, I / 2, 1.0));
  c.b = ComplexVector(random_vector(rng, H, 1.0), random_vector(rng, H, 1.0));
  c.alpha = ComplexVector(random_vector(rng, H, 1.0), random_vector(rng, H, 1.0));
  c.activation = kind;
  return c;
}

AdditiveFTNetParams random_additive(Rng& rng, std::size_t I, std::size_t H,
                                    const ActivationKind& base, double c) {
  AdditiveFTNetParams a;
  a.I = I;
  a.H = H;
  a.A = random_matrix(rng, H, I, 1.0);
  a.B = random_matrix(rng, H, H, fan_in_scale(H));
  a.bias = random_vector(rng, H, 1.0);
  a.alpha = random_vector(rng, H, 1.0);
  a.q0 = random_vector(rng, H, 1.0);
  a.sigma1 = RealActivation::restriction(base, c, InducedConvention::ImagArgRealBias, Part::Re);
  a.sigma2 = RealActivation::restriction(base, c, InducedConvention::ImagArgRealBias, Part::Im);
  return a;
}

FFTNetParams random_fftnet(Rng& rng, std::size_t I, std::size_t H, const ActivationKind& kind,
                           double scale) {
  FFTNetParams p;
  p.I = I;
  p.H = H;
  p.W = random_matrix(rng, H, H, scale);
  p.V = random_matrix(rng, H, H, scale);
  p.alpha = random_vector(rng, H, scale);
  p.activation = kind;
  return p;
}

RFTNetParams random_rftnet(Rng& rng, std::size_t I, std::size_t H, const ActivationKind& kind,
                           double scale) {
  const FFTNetParams f = random_fftnet(rng, I, H, kind, scale);
  return {f.I, f.H, f.W, f.V, f.alpha, Vector(H, 0.0), f.activation};
}

}  // namespace ftnet
