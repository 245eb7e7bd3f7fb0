#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <string>

#include "ftnet/activations.hpp"
#include "ftnet/numerics.hpp"

namespace ftnet {

// One-hidden-layer feedforward FTNet: y = alpha^T Re[sigma((W + V i) kappa(x, H))].
struct FFTNetParams {
  std::size_t I = 0;
  std::size_t H = 0;
  Matrix W;
  Matrix V;
  Vector alpha;
  ActivationKind activation = ActivationKind::zrelu();

  void validate() const;
  ComplexMatrix weights() const { return {W, V}; }
};

// Recurrent FTNet: s_t + r_t i = sigma((W + V i)(kappa(x_t, H) + r_{t-1} i)), y_t = alpha^T s_t.
struct RFTNetParams {
  std::size_t I = 0;
  std::size_t H = 0;
  Matrix W;
  Matrix V;
  Vector alpha;
  Vector r0;
  ActivationKind activation = ActivationKind::zrelu();

  void validate() const;
  FFTNetParams feedforward() const { return {I, H, W, V, alpha, activation}; }
};

// p_t = sigma1(A x_t + B q_{t-1} + bias), q_t = sigma2(same), y_t = alpha^T p_t.
struct AdditiveFTNetParams {
  std::size_t I = 0;
  std::size_t H = 0;
  Matrix A;
  Matrix B;
  Vector bias;
  Vector alpha;
  Vector q0;
  RealActivation sigma1 = RealActivation::identity();
  RealActivation sigma2 = RealActivation::identity();

  void validate() const;
};

// y = alpha^T sigma(W x + b).
struct FNNParams {
  std::size_t I = 0;
  std::size_t H = 0;
  Matrix W;
  Vector b;
  Vector alpha;
  RealActivation activation = RealActivation::relu();

  void validate() const;
};

// m_t = sigma(W x_t + V m_{t-1} + b), y_t = alpha^T m_t.
struct RNNParams {
  std::size_t I = 0;
  std::size_t H = 0;
  Matrix W;
  Matrix V;
  Vector b;
  Vector alpha;
  Vector m0;
  RealActivation activation = RealActivation::relu();

  void validate() const;
};

// y = Re[alpha^T sigma(W tau(x) + b)] with tau(x) = x[0:I/2] + x[I/2:I] i.
struct CRNetParams {
  std::size_t I = 0;
  std::size_t H = 0;
  ComplexMatrix W;
  ComplexVector b;
  ComplexVector alpha;
  ActivationKind activation = ActivationKind::zrelu();

  void validate() const;
};

// h_t = phi(x_t, h_{t-1}), y_t = psi(h_t).
struct DODSSpec {
  std::size_t I = 0;
  std::size_t HD = 0;
  Vector h0;
  std::function<Vector(std::span<const double> x, std::span<const double> h)> phi;
  std::function<double(std::span<const double> h)> psi;
};

// phi = P x + Q h, psi = c^T h.
DODSSpec dods_linear(const Matrix& P, const Matrix& Q, const Vector& c, const Vector& h0);
// phi = tanh(P x + Q h), psi = c^T h.
DODSSpec dods_tanh_saturating(const Matrix& P, const Matrix& Q, const Vector& c, const Vector& h0);
// phi(x, h) = x, psi = f.
DODSSpec dods_input_passthrough(std::size_t I, std::function<double(std::span<const double>)> f);

Vector kappa(std::span<const double> x, std::size_t H);

double eval_fftnet(const FFTNetParams& p, std::span<const double> x);

struct RFTNetTrajectory {
  Sequence s;  // stimulus s_t, t = 1..T
  Sequence r;  // receptor r_t, t = 1..T
  Vector y;
};

Vector eval_rftnet(const RFTNetParams& p, const Sequence& xs);
RFTNetTrajectory trace_rftnet(const RFTNetParams& p, const Sequence& xs);

struct AdditiveTrajectory {
  Sequence p;
  Sequence q;
  Vector y;
};

Vector eval_additive(const AdditiveFTNetParams& p, const Sequence& xs);
AdditiveTrajectory trace_additive(const AdditiveFTNetParams& p, const Sequence& xs);

double eval_fnn(const FNNParams& p, std::span<const double> x);

struct RNNTrajectory {
  Sequence m;
  Vector y;
};

Vector eval_rnn(const RNNParams& p, const Sequence& xs);
RNNTrajectory trace_rnn(const RNNParams& p, const Sequence& xs);

ComplexVector fold_input(std::span<const double> x);
double eval_crnet(const CRNetParams& p, std::span<const double> x);

struct DODSTrajectory {
  Sequence h;
  Vector y;
};

Vector eval_dods(const DODSSpec& d, const Sequence& xs);
DODSTrajectory trace_dods(const DODSSpec& d, const Sequence& xs);

enum class ModelKind { FTNet, CRNet, FNN, RNN, Additive, DODS };

std::string to_string(ModelKind kind);

// FTNet 2H^2+H, CRNet 2H(I+2), FNN 2H(I+1), RNN H(I+H+2).
std::size_t param_count(ModelKind kind, std::size_t hidden, std::size_t I);

}  // namespace ftnet
