#include "ftnet/models.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "ftnet/errors.hpp"

namespace ftnet {

namespace {

void require_shape(const Matrix& m, std::size_t rows, std::size_t cols, const std::string& what) {
  require(m.rows() == rows && m.cols() == cols,
          what + ": expected " + std::to_string(rows) + "x" + std::to_string(cols) + ", got " +
              std::to_string(m.rows()) + "x" + std::to_string(m.cols()));
  require(all_finite(m.data()), what + ": non-finite entry");
}

void require_length(const Vector& v, std::size_t n, const std::string& what) {
  require(v.size() == n, what + ": expected length " + std::to_string(n) + ", got " +
                             std::to_string(v.size()));
  require(all_finite(v), what + ": non-finite entry");
}

void require_input(std::span<const double> x, std::size_t I, const std::string& what) {
  require(x.size() == I, what + ": input has length " + std::to_string(x.size()) +
                             ", expected " + std::to_string(I));
}

// Adds m x into out.
void accumulate(Vector& out, const Matrix& m, std::span<const double> x) {
  for (std::size_t r = 0; r < m.rows(); ++r) out[r] += dot(m.row(r), x);
}

}  // namespace

void FFTNetParams::validate() const {
  require(H >= I + 1, "FFTNetParams: H must be at least I+1");
  require_shape(W, H, H, "FFTNetParams.W");
  require_shape(V, H, H, "FFTNetParams.V");
  require_length(alpha, H, "FFTNetParams.alpha");
}

void RFTNetParams::validate() const {
  require(H >= I + 1, "RFTNetParams: H must be at least I+1");
  require_shape(W, H, H, "RFTNetParams.W");
  require_shape(V, H, H, "RFTNetParams.V");
  require_length(alpha, H, "RFTNetParams.alpha");
  require_length(r0, H, "RFTNetParams.r0");
}

void AdditiveFTNetParams::validate() const {
  require_shape(A, H, I, "AdditiveFTNetParams.A");
  require_shape(B, H, H, "AdditiveFTNetParams.B");
  require_length(bias, H, "AdditiveFTNetParams.bias");
  require_length(alpha, H, "AdditiveFTNetParams.alpha");
  require_length(q0, H, "AdditiveFTNetParams.q0");
}

void FNNParams::validate() const {
  require_shape(W, H, I, "FNNParams.W");
  require_length(b, H, "FNNParams.b");
  require_length(alpha, H, "FNNParams.alpha");
}

void RNNParams::validate() const {
  require_shape(W, H, I, "RNNParams.W");
  require_shape(V, H, H, "RNNParams.V");
  require_length(b, H, "RNNParams.b");
  require_length(alpha, H, "RNNParams.alpha");
  require_length(m0, H, "RNNParams.m0");
}

void CRNetParams::validate() const {
  require(I % 2 == 0, "CRNetParams: input dimension must be even, got " + std::to_string(I));
  require_shape(W.re, H, I / 2, "CRNetParams.W.re");
  require_shape(W.im, H, I / 2, "CRNetParams.W.im");
  require_length(b.re, H, "CRNetParams.b.re");
  require_length(b.im, H, "CRNetParams.b.im");
  require_length(alpha.re, H, "CRNetParams.alpha.re");
  require_length(alpha.im, H, "CRNetParams.alpha.im");
}

DODSSpec dods_linear(const Matrix& P, const Matrix& Q, const Vector& c, const Vector& h0) {
  require(Q.rows() == Q.cols() && P.rows() == Q.rows(), "dods_linear: P and Q shapes differ");
  require(c.size() == Q.rows() && h0.size() == Q.rows(), "dods_linear: readout or h0 length");
  DODSSpec d;
  d.I = P.cols();
  d.HD = Q.rows();
  d.h0 = h0;
  d.phi = [P, Q](std::span<const double> x, std::span<const double> h) {
    Vector out = matvec(P, x);
    accumulate(out, Q, h);
    return out;
  };
  d.psi = [c](std::span<const double> h) { return dot(c, h); };
  return d;
}

DODSSpec dods_tanh_saturating(const Matrix& P, const Matrix& Q, const Vector& c,
                              const Vector& h0) {
  DODSSpec d = dods_linear(P, Q, c, h0);
  d.phi = [P, Q](std::span<const double> x, std::span<const double> h) {
    Vector out = matvec(P, x);
    accumulate(out, Q, h);
    for (double& v : out) v = std::tanh(v);
    return out;
  };
  return d;
}

DODSSpec dods_input_passthrough(std::size_t I, std::function<double(std::span<const double>)> f) {
  DODSSpec d;
  d.I = I;
  d.HD = I;
  d.h0 = Vector(I, 0.0);
  d.phi = [](std::span<const double> x, std::span<const double>) {
    return Vector(x.begin(), x.end());
  };
  d.psi = std::move(f);
  return d;
}

Vector kappa(std::span<const double> x, std::size_t H) {
  require(H >= x.size() + 1, "kappa: H=" + std::to_string(H) + " is smaller than I+1=" +
                                 std::to_string(x.size() + 1));
  Vector out(H, 0.0);
  std::copy(x.begin(), x.end(), out.begin());
  out[H - 1] = 1.0;
  return out;
}

double eval_fftnet(const FFTNetParams& p, std::span<const double> x) {
  p.validate();
  require_input(x, p.I, "eval_fftnet");
  const ComplexVector z = cmatvec(p.weights(), ComplexVector::from_real(kappa(x, p.H)));
  double y = 0.0;
  for (std::size_t h = 0; h < p.H; ++h) y += p.alpha[h] * apply(p.activation, z[h]).real();
  return y;
}

RFTNetTrajectory trace_rftnet(const RFTNetParams& p, const Sequence& xs) {
  p.validate();
  require(!xs.empty(), "eval_rftnet: empty sequence");
  const ComplexMatrix M{p.W, p.V};
  RFTNetTrajectory out;
  Vector r = p.r0;
  for (const auto& x : xs) {
    require_input(x, p.I, "eval_rftnet");
    const ComplexVector z = cmatvec(M, ComplexVector(kappa(x, p.H), r));
    Vector s(p.H);
    for (std::size_t h = 0; h < p.H; ++h) {
      const Complex a = apply(p.activation, z[h]);
      s[h] = a.real();
      r[h] = a.imag();
    }
    out.y.push_back(dot(p.alpha, s));
    out.s.push_back(std::move(s));
    out.r.push_back(r);
  }
  return out;
}

Vector eval_rftnet(const RFTNetParams& p, const Sequence& xs) { return trace_rftnet(p, xs).y; }

AdditiveTrajectory trace_additive(const AdditiveFTNetParams& p, const Sequence& xs) {
  p.validate();
  require(!xs.empty(), "eval_additive: empty sequence");
  AdditiveTrajectory out;
  Vector q = p.q0;
  for (const auto& x : xs) {
    require_input(x, p.I, "eval_additive");
    Vector u = matvec(p.A, x);
    accumulate(u, p.B, q);
    for (std::size_t h = 0; h < p.H; ++h) u[h] += p.bias[h];
    Vector pt(p.H);
    for (std::size_t h = 0; h < p.H; ++h) {
      pt[h] = p.sigma1(u[h]);
      q[h] = p.sigma2(u[h]);
    }
    out.y.push_back(dot(p.alpha, pt));
    out.p.push_back(std::move(pt));
    out.q.push_back(q);
  }
  return out;
}

Vector eval_additive(const AdditiveFTNetParams& p, const Sequence& xs) {
  return trace_additive(p, xs).y;
}

double eval_fnn(const FNNParams& p, std::span<const double> x) {
  p.validate();
  require_input(x, p.I, "eval_fnn");
  const Vector u = matvec(p.W, x);
  double y = 0.0;
  for (std::size_t h = 0; h < p.H; ++h) y += p.alpha[h] * p.activation(u[h] + p.b[h]);
  return y;
}

RNNTrajectory trace_rnn(const RNNParams& p, const Sequence& xs) {
  p.validate();
  require(!xs.empty(), "eval_rnn: empty sequence");
  RNNTrajectory out;
  Vector m = p.m0;
  for (const auto& x : xs) {
    require_input(x, p.I, "eval_rnn");
    Vector u = matvec(p.W, x);
    accumulate(u, p.V, m);
    for (std::size_t h = 0; h < p.H; ++h) m[h] = p.activation(u[h] + p.b[h]);
    out.y.push_back(dot(p.alpha, m));
    out.m.push_back(m);
  }
  return out;
}

Vector eval_rnn(const RNNParams& p, const Sequence& xs) { return trace_rnn(p, xs).y; }

ComplexVector fold_input(std::span<const double> x) {
  require(x.size() % 2 == 0, "fold_input: input dimension must be even, got " +
                                 std::to_string(x.size()));
  const std::size_t half = x.size() / 2;
  return ComplexVector(Vector(x.begin(), x.begin() + half), Vector(x.begin() + half, x.end()));
}

double eval_crnet(const CRNetParams& p, std::span<const double> x) {
  p.validate();
  require_input(x, p.I, "eval_crnet");
  const ComplexVector z = cmatvec(p.W, fold_input(x));
  Complex y = 0.0;
  for (std::size_t h = 0; h < p.H; ++h) y += p.alpha[h] * apply(p.activation, z[h] + p.b[h]);
  return y.real();
}

DODSTrajectory trace_dods(const DODSSpec& d, const Sequence& xs) {
  require(d.phi && d.psi, "eval_dods: phi and psi must be set");
  require(d.h0.size() == d.HD, "eval_dods: h0 length differs from HD");
  require(!xs.empty(), "eval_dods: empty sequence");
  DODSTrajectory out;
  Vector h = d.h0;
  for (const auto& x : xs) {
    require_input(x, d.I, "eval_dods");
    h = d.phi(x, h);
    require(h.size() == d.HD, "eval_dods: phi returned a state of the wrong length");
    out.y.push_back(d.psi(h));
    out.h.push_back(h);
  }
  return out;
}

Vector eval_dods(const DODSSpec& d, const Sequence& xs) { return trace_dods(d, xs).y; }

std::string to_string(ModelKind kind) {
  switch (kind) {
    case ModelKind::FTNet: return "ftnet";
    case ModelKind::CRNet: return "crnet";
    case ModelKind::FNN: return "fnn";
    case ModelKind::RNN: return "rnn";
    case ModelKind::Additive: return "additive";
    case ModelKind::DODS: return "dods";
  }
  return "unknown";
}

std::size_t param_count(ModelKind kind, std::size_t hidden, std::size_t I) {
  require(hidden >= 1, "param_count: hidden must be positive");
  switch (kind) {
    case ModelKind::FTNet: return 2 * hidden * hidden + hidden;
    case ModelKind::CRNet: return 2 * hidden * (I + 2);
    case ModelKind::FNN: return 2 * hidden * (I + 1);
    case ModelKind::RNN: return hidden * (I + hidden + 2);
    default:
      throw ContractViolation("param_count: no parameter-count formula for kind '" +
                              to_string(kind) + "'");
  }
}

}  // namespace ftnet
