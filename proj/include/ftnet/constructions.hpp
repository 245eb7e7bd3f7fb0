#pragma once

#include <cstddef>
#include <optional>
#include <string>

#include "ftnet/models.hpp"

namespace ftnet {

struct EmbeddingReport {
  std::string source_kind;
  std::string target_kind;
  std::size_t I = 0;
  std::size_t T = 1;
  std::size_t source_hidden = 0;
  std::size_t target_hidden = 0;
  std::optional<std::size_t> source_params;
  std::optional<std::size_t> target_params;
  std::optional<double> max_abs_output_gap;
};

std::string embedding_csv_header();
std::string to_csv_row(const EmbeddingReport& report);

enum class FnnEmbedMode { Induced, ZReLU };

// Induced mode: f.activation must be Re sigma(x + c i) for the target kind; the result uses
// that kind. ZReLU mode: f.activation must be ReLU; the result uses zReLU.
FFTNetParams fnn_to_fftnet(const FNNParams& f, double c, FnnEmbedMode mode);

// sigma1/sigma2 must be the Re/Im restrictions sigma(c + x i) of one complex kind.
RFTNetParams additive_to_rftnet(const AdditiveFTNetParams& a);

// Requires zReLU and even I.
FFTNetParams crnet_to_fftnet(const CRNetParams& cr);
RFTNetParams crnet_to_rftnet(const CRNetParams& cr);

// Requires a ReLU RNN; the result uses zReLU.
RFTNetParams rnn_to_rftnet(const RNNParams& r);

// FNN reproducing the RNN output at time t0 (1-based) for a substituted input x_{t0},
// with the memory m_{t0-1} produced by the first t0-1 inputs of xs_prefix.
FNNParams rnn_timepoint_to_fnn(const RNNParams& r, const Sequence& xs_prefix, std::size_t t0);

// Zero of sigma used as the bias of padded units, so they output exactly 0.
double activation_root(const RealActivation& sigma);

struct RowIndependentPadding {
  Matrix U;             // [U1 | I_O]
  double padded_bias;   // bias of every padded hidden unit (weights are zero)
};

RowIndependentPadding pad_row_independent(const Matrix& U1,
                                          const RealActivation& sigma = RealActivation::relu());

// Hidden state approximator x, h -> C sigma(A x + B h + bias).
struct StateApproximator {
  Matrix A;  // H x I
  Matrix B;  // H x HD
  Matrix C;  // HD x H
  Vector bias;

  std::size_t hidden() const { return A.rows(); }
};

// Readout chain x, q -> C sigma1(A x + B q + bias) with q the second state block.
struct ReadoutApproximator {
  Matrix A;  // H5 x I
  Matrix B;  // H5 x H2
  Matrix C;  // 1 x H5
  Vector bias;

  std::size_t hidden() const { return A.rows(); }
};

StateApproximator pad_state_approximator(const StateApproximator& phi, const RealActivation& sigma);
FNNParams pad_fnn_readout(const FNNParams& f);

struct DodsAssembly {
  AdditiveFTNetParams net;
  StateApproximator phi1;
  StateApproximator phi2;
  ReadoutApproximator psi;
  Vector h0;
  Vector p0_stage2;  // C1 p0 = h0, minimum norm
  Vector q0_stage2;  // C2 q0 = h0, minimum norm
  Matrix B1C1;
  Matrix B1C2;
  Matrix B2C2;
  Matrix C3;         // [C1, 0]
};

DodsAssembly assemble_dods_additive(const StateApproximator& phi1, const StateApproximator& phi2,
                                    const ReadoutApproximator& psi, const Vector& h0,
                                    const RealActivation& sigma1, const RealActivation& sigma2);

// All intermediate recurrences of the assembly, t = 1..T.
struct AssemblyTrace {
  Sequence p1, q1;  // C1 sigma1(A1 x + B1 p1 + b1) from h0, likewise for q1
  Sequence p2, q2;  // sigma1(A1 x + B1 C1 p2 + b1) from p0_stage2, likewise for q2
  Sequence p3, q3;  // merged recurrence of both stage-2 nets
  Sequence p5;      // sigma1(A5 x + B5 q2 + b5)
  AdditiveTrajectory assembled;
};

AssemblyTrace trace_assembly(const DodsAssembly& d, const Sequence& xs);

// Largest violation of the three structural identities over a trace, each scaled by
// 1 + |reference|.
struct AssemblyCheck {
  double stage1_vs_stage2 = 0.0;  // p1 = C1 p2 and q1 = C2 q2
  double q3_tail_vs_q2 = 0.0;
  double p_vs_p3p5 = 0.0;
  double max() const;
};

AssemblyCheck check_assembly(const DodsAssembly& d, const AssemblyTrace& trace);

}  // namespace ftnet
