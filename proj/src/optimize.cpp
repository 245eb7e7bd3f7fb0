#include "ftnet/optimize.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>
#include <sstream>

#include "ftnet/errors.hpp"

namespace ftnet {

namespace {

double max_abs(std::span<const double> v) {
  double m = 0.0;
  for (double x : v) m = std::max(m, std::abs(x));
  return m;
}

GradientBundle zero_bundle(std::size_t H) { return {Matrix(H, H), Matrix(H, H), Vector(H, 0.0)}; }

void check_dataset(const FFTNetParams& p, const Dataset& data) {
  p.validate();
  require(data.xs.size() == data.ys.size(), "dataset: xs and ys differ in length");
  for (const auto& x : data.xs)
    require(x.size() == p.I, "dataset: sample of length " + std::to_string(x.size()) +
                                 ", expected " + std::to_string(p.I));
}

void check_dataset(const RFTNetParams& p, const SequenceDataset& data) {
  p.validate();
  require(data.xs.size() == data.ys.size(), "sequence dataset: xs and ys differ in length");
  for (std::size_t i = 0; i < data.size(); ++i) {
    require(!data.xs[i].empty(), "sequence dataset: empty sequence");
    require(data.xs[i].size() == data.ys[i].size(),
            "sequence dataset: targets and inputs differ in length");
    for (const auto& x : data.xs[i])
      require(x.size() == p.I, "sequence dataset: input of wrong length");
  }
}

// (W + V i) kappa(x, H) for row h, touching only the nonzero entries of kappa.
Complex sparse_preactivation(const FFTNetParams& p, std::span<const double> x, std::size_t h) {
  const auto w = p.W.row(h);
  const auto v = p.V.row(h);
  double re = 0.0;
  double im = 0.0;
  for (std::size_t k = 0; k < p.I; ++k) {
    re += w[k] * x[k];
    im += v[k] * x[k];
  }
  return {re + w[p.H - 1], im + v[p.H - 1]};
}

double fast_loss(const FFTNetParams& p, const Dataset& data, const LossSpec& spec) {
  double total = 0.0;
  for (std::size_t i = 0; i < data.size(); ++i) {
    double y = 0.0;
    for (std::size_t h = 0; h < p.H; ++h) {
      if (p.alpha[h] == 0.0) continue;
      y += p.alpha[h] * apply(p.activation, sparse_preactivation(p, data.xs[i], h)).real();
    }
    total += spec.value(y - data.ys[i]);
  }
  return total;
}

template <typename Params>
void axpy(Params& p, const GradientBundle& g, double scale) {
  auto step = [scale](std::span<double> dst, std::span<const double> src) {
    for (std::size_t i = 0; i < dst.size(); ++i) dst[i] += scale * src[i];
  };
  step(p.W.data(), g.dW.data());
  step(p.V.data(), g.dV.data());
  step(p.alpha, g.dAlpha);
}

bool finite_bundle(const GradientBundle& g) {
  return all_finite(g.dW.data()) && all_finite(g.dV.data()) && all_finite(g.dAlpha);
}

// Central differences over every real coordinate of (W, V, alpha).
template <typename Params, typename LossFn>
GradientBundle central_differences(const Params& p, double step, LossFn loss) {
  require(step >= 1e-7 && step <= 1e-3, "finite differences: step must lie in [1e-7, 1e-3]");
  GradientBundle g = zero_bundle(p.H);
  Params work = p;
  auto probe = [&](std::span<double> coords, std::span<double> out) {
    for (std::size_t i = 0; i < coords.size(); ++i) {
      const double saved = coords[i];
      coords[i] = saved + step;
      const double up = loss(work);
      coords[i] = saved - step;
      const double down = loss(work);
      coords[i] = saved;
      out[i] = (up - down) / (2.0 * step);
    }
  };
  probe(work.W.data(), g.dW.data());
  probe(work.V.data(), g.dV.data());
  probe(work.alpha, g.dAlpha);
  return g;
}

template <typename Params, typename LossFn, typename GradFn>
TrainTrace gradient_descent(Params& p, const TrainConfig& cfg, LossFn loss, GradFn grad) {
  require(cfg.step_size > 0.0, "TrainConfig: step_size must be positive");
  require(cfg.step_growth >= 1.0, "TrainConfig: step_growth must be at least 1");
  TrainTrace trace;
  double current = loss(p);
  if (!std::isfinite(current)) throw NonFiniteLoss("training: initial loss is not finite");
  trace.losses.push_back(current);
  double eta = cfg.step_size;
  constexpr int kMaxHalvings = 30;
  while (true) {
    if (current <= cfg.target_loss) {
      trace.reached_target = true;
      trace.stop_reason = "target";
      break;
    }
    if (trace.iterations >= cfg.max_iters) {
      trace.stop_reason = "max_iters";
      break;
    }
    const GradientBundle g = grad(p);
    if (!finite_bundle(g))
      throw NonFiniteLoss("training: non-finite gradient at iteration " +
                          std::to_string(trace.iterations));
    bool accepted = false;
    Params candidate = p;
    for (int halving = 0; halving <= kMaxHalvings; ++halving) {
      candidate = p;
      axpy(candidate, g, -eta);
      const double next = loss(candidate);
      if (std::isfinite(next) && next < current) {
        accepted = true;
        current = next;
        break;
      }
      eta *= 0.5;
    }
    if (!accepted) {
      trace.stop_reason = "stalled";
      break;
    }
    p = std::move(candidate);
    ++trace.iterations;
    trace.losses.push_back(current);
    trace.steps.push_back(eta);
    eta *= cfg.step_growth;
  }
  return trace;
}

}  // namespace

double relative_error(const GradientBundle& g, const GradientBundle& reference) {
  require(g.dW.rows() == reference.dW.rows() && g.dAlpha.size() == reference.dAlpha.size(),
          "relative_error: bundle shapes differ");
  double diff = 0.0;
  auto fold = [&diff](std::span<const double> a, std::span<const double> b) {
    for (std::size_t i = 0; i < a.size(); ++i) diff = std::max(diff, std::abs(a[i] - b[i]));
  };
  fold(g.dW.data(), reference.dW.data());
  fold(g.dV.data(), reference.dV.data());
  fold(g.dAlpha, reference.dAlpha);
  const double scale = std::max({max_abs(reference.dW.data()), max_abs(reference.dV.data()),
                                 max_abs(reference.dAlpha), 1e-12});
  return diff / scale;
}

GradientBundle grad_fftnet(const FFTNetParams& p, const Dataset& data, const LossSpec& spec) {
  check_dataset(p, data);
  const std::size_t H = p.H;
  GradientBundle g = zero_bundle(H);
  std::vector<Complex> z(H);
  std::vector<Complex> s(H);
  for (std::size_t i = 0; i < data.size(); ++i) {
    const auto& x = data.xs[i];
    double y = 0.0;
    for (std::size_t h = 0; h < H; ++h) {
      z[h] = sparse_preactivation(p, x, h);
      s[h] = apply(p.activation, z[h]);
      y += p.alpha[h] * s[h].real();
    }
    const double dl = spec.deriv(y - data.ys[i]);
    if (dl == 0.0) continue;
    for (std::size_t h = 0; h < H; ++h) {
      g.dAlpha[h] += dl * s[h].real();
      if (p.alpha[h] == 0.0) continue;
      const Jacobian2 j = subgradient(p.activation, z[h]);
      const double ga = dl * p.alpha[h] * j.j00;
      const double gb = dl * p.alpha[h] * j.j01;
      auto dw = g.dW.row(h);
      auto dv = g.dV.row(h);
      for (std::size_t k = 0; k < p.I; ++k) {
        dw[k] += ga * x[k];
        dv[k] += gb * x[k];
      }
      dw[H - 1] += ga;
      dv[H - 1] += gb;
    }
  }
  return g;
}

GradientBundle finite_diff_grad(const FFTNetParams& p, const Dataset& data, const LossSpec& spec,
                                double step) {
  check_dataset(p, data);
  return central_differences(
      p, step, [&](const FFTNetParams& q) { return empirical_loss(q, data, spec); });
}

double sequence_loss(const RFTNetParams& p, const SequenceDataset& data, const LossSpec& spec) {
  check_dataset(p, data);
  double total = 0.0;
  for (std::size_t i = 0; i < data.size(); ++i) {
    const Vector y = eval_rftnet(p, data.xs[i]);
    for (std::size_t t = 0; t < y.size(); ++t) total += spec.value(y[t] - data.ys[i][t]);
  }
  return total;
}

GradientBundle grad_rftnet(const RFTNetParams& p, const SequenceDataset& data,
                           const LossSpec& spec) {
  check_dataset(p, data);
  const std::size_t H = p.H;
  const ComplexMatrix M{p.W, p.V};
  GradientBundle g = zero_bundle(H);
  for (std::size_t i = 0; i < data.size(); ++i) {
    const Sequence& xs = data.xs[i];
    const std::size_t T = xs.size();
    Sequence kappas(T);
    Sequence prev_r(T);
    std::vector<std::vector<Jacobian2>> jac(T, std::vector<Jacobian2>(H));
    Vector dl(T);
    Vector r = p.r0;
    Sequence stimuli(T);
    for (std::size_t t = 0; t < T; ++t) {
      kappas[t] = kappa(xs[t], H);
      prev_r[t] = r;
      const ComplexVector z = cmatvec(M, ComplexVector(kappas[t], r));
      Vector s(H);
      for (std::size_t h = 0; h < H; ++h) {
        const Complex a = apply(p.activation, z[h]);
        jac[t][h] = subgradient(p.activation, z[h]);
        s[h] = a.real();
        r[h] = a.imag();
      }
      dl[t] = spec.deriv(dot(p.alpha, s) - data.ys[i][t]);
      stimuli[t] = std::move(s);
    }
    Vector gr(H, 0.0);
    Vector ga(H);
    Vector gb(H);
    for (std::size_t t = T; t-- > 0;) {
      for (std::size_t h = 0; h < H; ++h) {
        g.dAlpha[h] += dl[t] * stimuli[t][h];
        const double gs = dl[t] * p.alpha[h];
        const Jacobian2& j = jac[t][h];
        ga[h] = j.j00 * gs + j.j10 * gr[h];
        gb[h] = j.j01 * gs + j.j11 * gr[h];
      }
      const Vector& kap = kappas[t];
      const Vector& rp = prev_r[t];
      for (std::size_t h = 0; h < H; ++h) {
        auto dw = g.dW.row(h);
        auto dv = g.dV.row(h);
        for (std::size_t k = 0; k < H; ++k) {
          dw[k] += ga[h] * kap[k] + gb[h] * rp[k];
          dv[k] += gb[h] * kap[k] - ga[h] * rp[k];
        }
      }
      // Receptor gradient flowing into step t-1: d(a)/d(r) = -V, d(b)/d(r) = W.
      const Vector from_a = matvec_transposed(p.V, ga);
      const Vector from_b = matvec_transposed(p.W, gb);
      for (std::size_t k = 0; k < H; ++k) gr[k] = from_b[k] - from_a[k];
    }
  }
  return g;
}

GradientBundle finite_diff_grad_rftnet(const RFTNetParams& p, const SequenceDataset& data,
                                       const LossSpec& spec, double step) {
  check_dataset(p, data);
  return central_differences(
      p, step, [&](const RFTNetParams& q) { return sequence_loss(q, data, spec); });
}

FFTNetTrainResult train_fftnet(const FFTNetParams& p0, const Dataset& data, const LossSpec& spec,
                               const TrainConfig& cfg) {
  check_dataset(p0, data);
  FFTNetTrainResult result{p0, {}};
  result.trace = gradient_descent(
      result.params, cfg, [&](const FFTNetParams& q) { return fast_loss(q, data, spec); },
      [&](const FFTNetParams& q) { return grad_fftnet(q, data, spec); });
  return result;
}

RFTNetTrainResult train_rftnet(const RFTNetParams& p0, const SequenceDataset& data,
                               const LossSpec& spec, const TrainConfig& cfg) {
  check_dataset(p0, data);
  RFTNetTrainResult result{p0, {}};
  result.trace = gradient_descent(
      result.params, cfg, [&](const RFTNetParams& q) { return sequence_loss(q, data, spec); },
      [&](const RFTNetParams& q) { return grad_rftnet(q, data, spec); });
  return result;
}

std::string to_string(ProbeCase c) {
  return c == ProbeCase::AlphaNonzero ? "alpha_nonzero" : "alpha_zero";
}

FFTNetParams perturbed(const FFTNetParams& p, const ComplexMatrix& deltaZ,
                       std::span<const double> deltaAlpha) {
  require(deltaZ.rows() == p.H && deltaZ.cols() == p.H && deltaAlpha.size() == p.H,
          "perturbed: perturbation shape differs from the network");
  FFTNetParams out = p;
  for (std::size_t i = 0; i < out.W.data().size(); ++i) {
    out.W.data()[i] += deltaZ.re.data()[i];
    out.V.data()[i] += deltaZ.im.data()[i];
  }
  for (std::size_t h = 0; h < p.H; ++h) out.alpha[h] += deltaAlpha[h];
  return out;
}

namespace {

// Keeps radii computed as delta * 2^-k from landing a rounding error above delta.
constexpr double kInside = 1.0 - 1e-12;

std::size_t argmax_abs(std::span<const double> v) {
  std::size_t best = 0;
  for (std::size_t i = 1; i < v.size(); ++i)
    if (std::abs(v[i]) > std::abs(v[best])) best = i;
  return best;
}

void finish(ProbeResult& r) {
  r.perturbation_norm = frobenius_norm(r.deltaZ) + norm2(r.deltaAlpha);
}

}  // namespace

ProbeResult descent_probe(const FFTNetParams& p, const Dataset& data, const LossSpec& spec,
                          double delta, std::uint64_t seed) {
  check_dataset(p, data);
  require(delta > 0.0, "descent_probe: delta must be positive");
  require(p.activation.holomorphic(),
          "descent_probe: activation '" + to_string(p.activation) + "' is not holomorphic");
  const WellPosedReport wp = check_well_posed(spec);
  require(wp.passed, "descent_probe: loss " + to_string(spec) + " is not well posed (" +
                         wp.message + ")");
  const std::size_t n = data.size();
  const std::size_t H = p.H;
  require(n >= 1, "descent_probe: empty dataset");
  Sequence kappas;
  for (const auto& x : data.xs) kappas.push_back(kappa(x, H));
  require(numerical_rank(kappas, 1e-8) == n,
          "descent_probe: padded samples are not linearly independent");

  ProbeResult result;
  result.old_loss = empirical_loss(p, data, spec);
  require(result.old_loss > 0.0, "descent_probe: loss is already zero");
  result.deltaZ = ComplexMatrix(H, H);
  result.deltaAlpha = Vector(H, 0.0);
  result.new_loss = result.old_loss;

  const bool alpha_zero = std::all_of(p.alpha.begin(), p.alpha.end(),
                                      [](double a) { return a == 0.0; });
  constexpr int kRadii = 40;
  constexpr int kPhases = 64;

  if (!alpha_zero) {
    result.case_tag = ProbeCase::AlphaNonzero;
    Vector residual(n);
    for (std::size_t j = 0; j < n; ++j) residual[j] = eval_fftnet(p, data.xs[j]) - data.ys[j];
    const std::size_t j0 = argmax_abs(residual);
    const std::size_t k0 = argmax_abs(p.alpha);
    std::vector<ComplexVector> kc;
    for (const auto& k : kappas) kc.push_back(ComplexVector::from_real(k));
    const ComplexVector v = null_vector_against(kc, j0);
    const double vnorm = norm2(v);
    for (int level = 0; level < kRadii && !result.found; ++level) {
      const double radius = delta * std::ldexp(1.0, -level) / vnorm * kInside;
      double best = result.old_loss;
      Complex best_c = 0.0;
      for (int ph = 0; ph < kPhases; ++ph) {
        const Complex c = std::polar(radius, 2.0 * std::numbers::pi * ph / kPhases);
        ComplexMatrix dz(H, H);
        for (std::size_t k = 0; k < H; ++k) {
          const Complex e = c * v[k];
          dz.re(k0, k) = e.real();
          dz.im(k0, k) = e.imag();
        }
        const double trial = empirical_loss(perturbed(p, dz, result.deltaAlpha), data, spec);
        if (trial < best) {
          best = trial;
          best_c = c;
        }
      }
      if (best < result.old_loss) {
        result.found = true;
        result.new_loss = best;
        for (std::size_t k = 0; k < H; ++k) {
          const Complex e = best_c * v[k];
          result.deltaZ.re(k0, k) = e.real();
          result.deltaZ.im(k0, k) = e.imag();
        }
      }
    }
    if (!result.found)
      result.diagnostics = "no decrease over " + std::to_string(kRadii) + " radii x " +
                           std::to_string(kPhases) + " phases (j0=" + std::to_string(j0) +
                           ", k0=" + std::to_string(k0) + ")";
    finish(result);
    return result;
  }

  result.case_tag = ProbeCase::AlphaZero;
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  constexpr int kSamples = 200;
  constexpr double kMinC1 = 1e-10;
  ComplexVector dz1(H);
  double c1 = 0.0;
  int sample = 0;
  for (; sample < kSamples; ++sample) {
    Vector dir(2 * H);
    for (double& d : dir) d = gauss(rng);
    const double len = norm2(dir);
    const double radius =
        0.5 * delta * std::pow(unit(rng), 1.0 / static_cast<double>(2 * H)) * kInside;
    for (std::size_t k = 0; k < H; ++k)
      dz1.set(k, Complex(dir[k], dir[H + k]) * (radius / len));
    c1 = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
      Complex z = 0.0;
      for (std::size_t k = 0; k < H; ++k)
        z += (Complex(p.W(0, k), p.V(0, k)) + dz1[k]) * kappas[j][k];
      c1 += spec.deriv(-data.ys[j]) * apply(p.activation, z).real();
    }
    if (std::abs(c1) > kMinC1) break;
  }
  if (sample == kSamples) {
    result.diagnostics = "C1 stayed below 1e-10 for " + std::to_string(kSamples) + " samples";
    finish(result);
    return result;
  }
  ComplexMatrix dz(H, H);
  for (std::size_t k = 0; k < H; ++k) {
    dz.re(0, k) = dz1.re[k];
    dz.im(0, k) = dz1.im[k];
  }
  double magnitude = 0.5 * delta * kInside;
  Vector dalpha(H, 0.0);
  for (int level = 0; level <= kRadii; ++level, magnitude *= 0.5) {
    dalpha[0] = c1 > 0.0 ? -magnitude : magnitude;
    const double trial = empirical_loss(perturbed(p, dz, dalpha), data, spec);
    if (trial < result.old_loss) {
      result.found = true;
      result.new_loss = trial;
      result.deltaZ = dz;
      result.deltaAlpha = dalpha;
      break;
    }
  }
  if (!result.found) {
    std::ostringstream msg;
    msg << "no decrease along alpha_1 with C1=" << c1;
    result.diagnostics = msg.str();
  }
  finish(result);
  return result;
}

BidirectionalResult holomorphic_bidirectional_search(
    const std::function<Complex(std::span<const Complex>)>& g, std::span<const Complex> z0,
    double delta) {
  require(delta > 0.0, "holomorphic_bidirectional_search: delta must be positive");
  require(!z0.empty(), "holomorphic_bidirectional_search: empty point");
  BidirectionalResult out;
  const double base = g(z0).real();
  std::vector<Complex> z(z0.begin(), z0.end());
  constexpr int kRadii = 40;
  constexpr int kPhases = 64;
  for (int level = 0; level < kRadii && !(out.found_up && out.found_down); ++level) {
    const double radius = std::sqrt(delta) * std::ldexp(1.0, -level) * kInside;
    for (std::size_t m = 0; m < z.size(); ++m) {
      for (int ph = 0; ph < kPhases; ++ph) {
        const Complex step = std::polar(radius, 2.0 * std::numbers::pi * ph / kPhases);
        z[m] = z0[m] + step;
        const double value = g(z).real();
        z[m] = z0[m];
        if (!out.found_up && value > base) {
          out.found_up = true;
          out.dz_up.assign(z.size(), Complex(0.0, 0.0));
          out.dz_up[m] = step;
        }
        if (!out.found_down && value < base) {
          out.found_down = true;
          out.dz_down.assign(z.size(), Complex(0.0, 0.0));
          out.dz_down[m] = step;
        }
      }
    }
  }
  return out;
}

}  // namespace ftnet
