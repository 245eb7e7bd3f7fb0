#include "ftnet/constructions.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>

#include "ftnet/errors.hpp"

namespace ftnet {

std::string embedding_csv_header() {
  return "source_kind,target_kind,I,T,source_hidden,target_hidden,source_params,target_params,"
         "max_abs_output_gap";
}

std::string to_csv_row(const EmbeddingReport& report) {
  std::ostringstream out;
  out << report.source_kind << ',' << report.target_kind << ',' << report.I << ',' << report.T
      << ',' << report.source_hidden << ',' << report.target_hidden << ',';
  if (report.source_params) out << *report.source_params;
  out << ',';
  if (report.target_params) out << *report.target_params;
  out << ',';
  if (report.max_abs_output_gap) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.6e", *report.max_abs_output_gap);
    out << buf;
  }
  return out.str();
}

namespace {

void copy_into_row(Matrix& m, std::size_t row, std::size_t col0, std::span<const double> values,
                   double sign = 1.0) {
  for (std::size_t k = 0; k < values.size(); ++k) m(row, col0 + k) = sign * values[k];
}

void require_zrelu_crnet(const CRNetParams& cr) {
  require(cr.activation.tag == ActivationTag::ZReLU,
          "CRNet embedding requires the zrelu activation, got '" + to_string(cr.activation) + "'");
  require(cr.I % 2 == 0, "CRNet embedding requires an even input dimension, got I=" +
                             std::to_string(cr.I));
  cr.validate();
}

// Writes the two CRNet blocks into rows [row0, row0 + 2 H_C) of W and V.
void place_crnet_blocks(const CRNetParams& cr, Matrix& W, Matrix& V, Vector& alpha,
                        std::size_t row0) {
  const std::size_t half = cr.I / 2;
  const std::size_t bias_col = W.cols() - 1;
  for (std::size_t h = 0; h < cr.H; ++h) {
    const auto wr = cr.W.re.row(h);
    const auto wi = cr.W.im.row(h);
    const std::size_t a = row0 + h;
    const std::size_t b = row0 + cr.H + h;
    // Row a: pre-activation z; row b: Im z + Re z i, so Re sigma(row b) = Im sigma(z).
    copy_into_row(W, a, 0, wr);
    copy_into_row(W, a, half, wi, -1.0);
    W(a, bias_col) = cr.b.re[h];
    copy_into_row(V, a, 0, wi);
    copy_into_row(V, a, half, wr);
    V(a, bias_col) = cr.b.im[h];

    copy_into_row(W, b, 0, wi);
    copy_into_row(W, b, half, wr);
    W(b, bias_col) = cr.b.im[h];
    copy_into_row(V, b, 0, wr);
    copy_into_row(V, b, half, wi, -1.0);
    V(b, bias_col) = cr.b.re[h];

    alpha[a] = cr.alpha.re[h];
    alpha[b] = -cr.alpha.im[h];
  }
}

}  // namespace

FFTNetParams fnn_to_fftnet(const FNNParams& f, double c, FnnEmbedMode mode) {
  f.validate();
  FFTNetParams out;
  double bias_imag = 1.0;
  if (mode == FnnEmbedMode::Induced) {
    require(f.activation.induced && f.activation.part == Part::Re &&
                f.activation.convention == InducedConvention::RealArgImagBias &&
                f.activation.c == c && !f.activation.base.real_valued(),
            "fnn_to_fftnet: induced mode requires the FNN activation Re sigma(x + c i) with c=" +
                std::to_string(c) + ", got " + describe(f.activation));
    out.activation = f.activation.base;
    bias_imag = c;
  } else {
    require(f.activation == RealActivation::relu(),
            "fnn_to_fftnet: zrelu mode requires a relu FNN, got " + describe(f.activation));
    out.activation = ActivationKind::zrelu();
  }
  out.I = f.I;
  out.H = std::max(f.H, f.I + 1);
  out.W = Matrix(out.H, out.H);
  out.V = Matrix(out.H, out.H);
  out.alpha = Vector(out.H, 0.0);
  for (std::size_t h = 0; h < f.H; ++h) {
    copy_into_row(out.W, h, 0, f.W.row(h));
    out.W(h, out.H - 1) = f.b[h];
    out.V(h, out.H - 1) = bias_imag;
    out.alpha[h] = f.alpha[h];
  }
  require(out.H == std::max(f.H, f.I + 1), "fnn_to_fftnet: hidden size formula");
  return out;
}

RFTNetParams additive_to_rftnet(const AdditiveFTNetParams& a) {
  a.validate();
  const RealActivation& s1 = a.sigma1;
  const RealActivation& s2 = a.sigma2;
  require(s1.induced && s2.induced && s1.base == s2.base && s1.c == s2.c &&
              s1.convention == InducedConvention::ImagArgRealBias &&
              s2.convention == InducedConvention::ImagArgRealBias && s1.part == Part::Re &&
              s2.part == Part::Im && !s1.base.real_valued(),
          "additive_to_rftnet: sigma1/sigma2 must be Re/Im of sigma(c + x i) for one complex "
          "activation, got " + describe(s1) + " and " + describe(s2));
  require(apply(s1.base, Complex(0.0, 0.0)) == Complex(0.0, 0.0),
          "additive_to_rftnet: activation must map 0 to 0");
  RFTNetParams out;
  out.I = a.I;
  out.H = a.I + a.H + 1;
  out.activation = s1.base;
  out.W = Matrix(out.H, out.H);
  out.V = Matrix(out.H, out.H);
  out.alpha = Vector(out.H, 0.0);
  out.r0 = Vector(out.H, 0.0);
  const std::size_t last = out.H - 1;
  for (std::size_t h = 0; h < a.H; ++h) {
    const std::size_t row = a.I + h;
    copy_into_row(out.W, row, a.I, a.B.row(h));
    out.W(row, last) = s1.c;
    copy_into_row(out.V, row, 0, a.A.row(h));
    out.V(row, last) = a.bias[h];
    out.alpha[row] = a.alpha[h];
    out.r0[row] = a.q0[h];
  }
  require(out.H == a.I + a.H + 1, "additive_to_rftnet: hidden size formula");
  return out;
}

FFTNetParams crnet_to_fftnet(const CRNetParams& cr) {
  require_zrelu_crnet(cr);
  FFTNetParams out;
  out.I = cr.I;
  out.H = std::max(2 * cr.H, cr.I + 1);
  out.activation = ActivationKind::zrelu();
  out.W = Matrix(out.H, out.H);
  out.V = Matrix(out.H, out.H);
  out.alpha = Vector(out.H, 0.0);
  place_crnet_blocks(cr, out.W, out.V, out.alpha, 0);
  require(out.H == std::max(2 * cr.H, cr.I + 1), "crnet_to_fftnet: hidden size formula");
  return out;
}

RFTNetParams crnet_to_rftnet(const CRNetParams& cr) {
  require_zrelu_crnet(cr);
  RFTNetParams out;
  out.I = cr.I;
  out.H = 2 * cr.H + cr.I + 1;
  out.activation = ActivationKind::zrelu();
  out.W = Matrix(out.H, out.H);
  out.V = Matrix(out.H, out.H);
  out.alpha = Vector(out.H, 0.0);
  out.r0 = Vector(out.H, 0.0);
  place_crnet_blocks(cr, out.W, out.V, out.alpha, cr.I);
  require(out.H == 2 * cr.H + cr.I + 1, "crnet_to_rftnet: hidden size formula");
  return out;
}

RFTNetParams rnn_to_rftnet(const RNNParams& r) {
  r.validate();
  require(r.activation == RealActivation::relu(),
          "rnn_to_rftnet: requires a relu RNN, got " + describe(r.activation));
  RFTNetParams out;
  out.I = r.I;
  out.H = 2 * r.H + r.I + 1;
  out.activation = ActivationKind::zrelu();
  out.W = Matrix(out.H, out.H);
  out.V = Matrix(out.H, out.H);
  out.alpha = Vector(out.H, 0.0);
  out.r0 = Vector(out.H, 0.0);
  const std::size_t block2 = r.I;
  const std::size_t block3 = r.I + r.H;
  const std::size_t last = out.H - 1;
  for (std::size_t h = 0; h < r.H; ++h) {
    // Block 2: (W_R x + V_R m + b_R) + 1 i, its stimulus is m_t.
    copy_into_row(out.W, block2 + h, 0, r.W.row(h));
    out.W(block2 + h, last) = r.b[h];
    copy_into_row(out.V, block2 + h, block3, r.V.row(h), -1.0);
    out.V(block2 + h, last) = 1.0;
    // Block 3: 1 + (W_R x + V_R m + b_R) i, its receptor is m_t.
    copy_into_row(out.W, block3 + h, block3, r.V.row(h));
    out.W(block3 + h, last) = 1.0;
    copy_into_row(out.V, block3 + h, 0, r.W.row(h));
    out.V(block3 + h, last) = r.b[h];

    out.alpha[block2 + h] = r.alpha[h];
    out.r0[block3 + h] = r.m0[h];
  }
  require(out.H == 2 * r.H + r.I + 1, "rnn_to_rftnet: hidden size formula");
  return out;
}

FNNParams rnn_timepoint_to_fnn(const RNNParams& r, const Sequence& xs_prefix, std::size_t t0) {
  r.validate();
  require(t0 >= 1 && t0 <= xs_prefix.size() + 1,
          "rnn_timepoint_to_fnn: t0=" + std::to_string(t0) + " outside [1, " +
              std::to_string(xs_prefix.size() + 1) + "]");
  Vector memory = r.m0;
  if (t0 > 1) {
    const Sequence history(xs_prefix.begin(), xs_prefix.begin() + static_cast<long>(t0 - 1));
    memory = trace_rnn(r, history).m.back();
  }
  FNNParams out;
  out.I = r.I;
  out.H = r.H;
  out.W = r.W;
  out.b = matvec(r.V, memory);
  for (std::size_t h = 0; h < r.H; ++h) out.b[h] += r.b[h];
  out.alpha = r.alpha;
  out.activation = r.activation;
  return out;
}

double activation_root(const RealActivation& sigma) {
  if (sigma(0.0) == 0.0) return 0.0;
  constexpr double kLimit = 50.0;
  constexpr double kStep = 1e-2;
  const auto steps = static_cast<long>(kLimit / kStep);
  // Scan outward from 0 so the root closest to the origin wins.
  for (long k = 1; k <= steps; ++k) {
    for (const double dir : {1.0, -1.0}) {
      const double inner = dir * static_cast<double>(k - 1) * kStep;
      const double outer = dir * static_cast<double>(k) * kStep;
      const double f_outer = sigma(outer);
      if (f_outer == 0.0) return outer;
      double lo = inner;
      double hi = outer;
      double f_lo = sigma(lo);
      if (std::signbit(f_lo) == std::signbit(f_outer)) continue;
      for (int it = 0; it < 200 && hi != lo; ++it) {
        const double mid = 0.5 * (lo + hi);
        if (mid == lo || mid == hi) break;
        const double f_mid = sigma(mid);
        if (f_mid == 0.0) return mid;
        if (std::signbit(f_mid) == std::signbit(f_lo)) {
          lo = mid;
          f_lo = f_mid;
        } else {
          hi = mid;
        }
      }
      const double f_hi = sigma(hi);
      return std::abs(f_lo) <= std::abs(f_hi) ? lo : hi;
    }
  }
  throw DegenerateInput("activation_root: " + describe(sigma) + " has no zero in [-50, 50]");
}

RowIndependentPadding pad_row_independent(const Matrix& U1, const RealActivation& sigma) {
  const std::size_t O = U1.rows();
  RowIndependentPadding out;
  out.U = Matrix(O, U1.cols() + O);
  out.U.set_block(0, 0, U1);
  out.U.set_block(0, U1.cols(), Matrix::identity(O));
  out.padded_bias = activation_root(sigma);
  return out;
}

StateApproximator pad_state_approximator(const StateApproximator& phi,
                                         const RealActivation& sigma) {
  const std::size_t H = phi.hidden();
  const std::size_t HD = phi.C.rows();
  const RowIndependentPadding pad = pad_row_independent(phi.C, sigma);
  StateApproximator out;
  out.A = Matrix(H + HD, phi.A.cols());
  out.A.set_block(0, 0, phi.A);
  out.B = Matrix(H + HD, phi.B.cols());
  out.B.set_block(0, 0, phi.B);
  out.C = pad.U;
  out.bias = phi.bias;
  out.bias.resize(H + HD, pad.padded_bias);
  return out;
}

FNNParams pad_fnn_readout(const FNNParams& f) {
  f.validate();
  Matrix U1(1, f.H);
  copy_into_row(U1, 0, 0, f.alpha);
  const RowIndependentPadding pad = pad_row_independent(U1, f.activation);
  FNNParams out = f;
  out.H = f.H + 1;
  out.W = Matrix(out.H, f.I);
  out.W.set_block(0, 0, f.W);
  out.b.push_back(pad.padded_bias);
  out.alpha = Vector(pad.U.row(0).begin(), pad.U.row(0).end());
  return out;
}

namespace {

void require_approximator(const Matrix& A, const Matrix& B, const Matrix& C, const Vector& bias,
                          std::size_t I, std::size_t state_dim, std::size_t out_rows,
                          const std::string& what) {
  const std::size_t H = A.rows();
  require(H >= 1, what + ": empty approximator");
  require(A.cols() == I, what + ".A has " + std::to_string(A.cols()) + " columns, expected I=" +
                             std::to_string(I));
  require(B.rows() == H && B.cols() == state_dim,
          what + ".B must be " + std::to_string(H) + "x" + std::to_string(state_dim));
  require(C.rows() == out_rows && C.cols() == H,
          what + ".C must be " + std::to_string(out_rows) + "x" + std::to_string(H));
  require(bias.size() == H, what + ".bias length");
}

// sigma(A x + B s + bias) elementwise.
Vector layer(const Matrix& A, const Matrix& B, const Vector& bias, std::span<const double> x,
             std::span<const double> s, const RealActivation& sigma) {
  Vector u = matvec(A, x);
  for (std::size_t r = 0; r < B.rows(); ++r) u[r] += dot(B.row(r), s);
  for (std::size_t r = 0; r < u.size(); ++r) u[r] = sigma(u[r] + bias[r]);
  return u;
}

double scaled_gap(std::span<const double> a, std::span<const double> b) {
  double worst = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i)
    worst = std::max(worst, std::abs(a[i] - b[i]) / (1.0 + std::abs(b[i])));
  return worst;
}

}  // namespace

DodsAssembly assemble_dods_additive(const StateApproximator& phi1, const StateApproximator& phi2,
                                    const ReadoutApproximator& psi, const Vector& h0,
                                    const RealActivation& sigma1, const RealActivation& sigma2) {
  const std::size_t HD = h0.size();
  const std::size_t I = phi1.A.cols();
  require(HD >= 1, "assemble_dods_additive: h0 is empty");
  require_approximator(phi1.A, phi1.B, phi1.C, phi1.bias, I, HD, HD, "phi1");
  require_approximator(phi2.A, phi2.B, phi2.C, phi2.bias, I, HD, HD, "phi2");
  const std::size_t H1 = phi1.hidden();
  const std::size_t H2 = phi2.hidden();
  require_approximator(psi.A, psi.B, psi.C, psi.bias, I, H2, 1, "psi");
  const std::size_t H5 = psi.hidden();
  const std::size_t H3 = H1 + H2;

  DodsAssembly d;
  d.phi1 = phi1;
  d.phi2 = phi2;
  d.psi = psi;
  d.h0 = h0;
  d.p0_stage2 = solve_min_norm(phi1.C, h0);
  d.q0_stage2 = solve_min_norm(phi2.C, h0);
  d.B1C1 = matmul(phi1.B, phi1.C);
  d.B1C2 = matmul(phi1.B, phi2.C);
  d.B2C2 = matmul(phi2.B, phi2.C);
  d.C3 = Matrix(HD, H3);
  d.C3.set_block(0, 0, phi1.C);

  AdditiveFTNetParams& net = d.net;
  net.I = I;
  net.H = H3 + H5;
  net.sigma1 = sigma1;
  net.sigma2 = sigma2;
  net.A = Matrix(net.H, I);
  net.A.set_block(0, 0, phi1.A);
  net.A.set_block(H1, 0, phi2.A);
  net.A.set_block(H3, 0, psi.A);
  net.B = Matrix(net.H, net.H);
  net.B.set_block(0, H1, d.B1C2);
  net.B.set_block(H1, H1, d.B2C2);
  net.B.set_block(H3, H1, psi.B);
  net.bias = phi1.bias;
  net.bias.insert(net.bias.end(), phi2.bias.begin(), phi2.bias.end());
  net.bias.insert(net.bias.end(), psi.bias.begin(), psi.bias.end());
  net.alpha = Vector(net.H, 0.0);
  for (std::size_t h = 0; h < H5; ++h) net.alpha[H3 + h] = psi.C(0, h);
  net.q0 = Vector(net.H, 0.0);
  std::copy(d.q0_stage2.begin(), d.q0_stage2.end(), net.q0.begin() + static_cast<long>(H1));
  net.validate();
  return d;
}

AssemblyTrace trace_assembly(const DodsAssembly& d, const Sequence& xs) {
  const RealActivation& s1 = d.net.sigma1;
  const RealActivation& s2 = d.net.sigma2;
  const std::size_t H1 = d.phi1.hidden();
  const std::size_t H2 = d.phi2.hidden();
  const std::size_t H3 = H1 + H2;

  Matrix A3(H3, d.net.I);
  A3.set_block(0, 0, d.phi1.A);
  A3.set_block(H1, 0, d.phi2.A);
  Matrix B3(H3, H3);
  B3.set_block(0, H1, d.B1C2);
  B3.set_block(H1, H1, d.B2C2);
  Vector b3 = d.phi1.bias;
  b3.insert(b3.end(), d.phi2.bias.begin(), d.phi2.bias.end());

  AssemblyTrace out;
  Vector p1 = d.h0;
  Vector q1 = d.h0;
  Vector p2 = d.p0_stage2;
  Vector q2 = d.q0_stage2;
  Vector q3(H3, 0.0);
  std::copy(q2.begin(), q2.end(), q3.begin() + static_cast<long>(H1));
  for (const auto& x : xs) {
    p1 = matvec(d.phi1.C, layer(d.phi1.A, d.phi1.B, d.phi1.bias, x, p1, s1));
    q1 = matvec(d.phi2.C, layer(d.phi2.A, d.phi2.B, d.phi2.bias, x, q1, s2));
    const Vector p5 = layer(d.psi.A, d.psi.B, d.psi.bias, x, q2, s1);
    p2 = layer(d.phi1.A, d.B1C1, d.phi1.bias, x, p2, s1);
    const Vector p3 = layer(A3, B3, b3, x, q3, s1);
    q3 = layer(A3, B3, b3, x, q3, s2);
    q2 = layer(d.phi2.A, d.B2C2, d.phi2.bias, x, q2, s2);
    out.p1.push_back(p1);
    out.q1.push_back(q1);
    out.p2.push_back(p2);
    out.q2.push_back(q2);
    out.p3.push_back(p3);
    out.q3.push_back(q3);
    out.p5.push_back(p5);
  }
  out.assembled = trace_additive(d.net, xs);
  return out;
}

double AssemblyCheck::max() const {
  return std::max({stage1_vs_stage2, q3_tail_vs_q2, p_vs_p3p5});
}

AssemblyCheck check_assembly(const DodsAssembly& d, const AssemblyTrace& trace) {
  AssemblyCheck check;
  const std::size_t H1 = d.phi1.hidden();
  for (std::size_t t = 0; t < trace.p1.size(); ++t) {
    check.stage1_vs_stage2 =
        std::max({check.stage1_vs_stage2, scaled_gap(trace.p1[t], matvec(d.phi1.C, trace.p2[t])),
                  scaled_gap(trace.q1[t], matvec(d.phi2.C, trace.q2[t]))});
    const std::span<const double> tail(trace.q3[t].data() + H1, trace.q2[t].size());
    check.q3_tail_vs_q2 = std::max(check.q3_tail_vs_q2, scaled_gap(tail, trace.q2[t]));
    Vector stacked = trace.p3[t];
    stacked.insert(stacked.end(), trace.p5[t].begin(), trace.p5[t].end());
    check.p_vs_p3p5 = std::max(check.p_vs_p3p5, scaled_gap(trace.assembled.p[t], stacked));
  }
  return check;
}

}  // namespace ftnet
