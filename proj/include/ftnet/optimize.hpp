#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "ftnet/losses.hpp"
#include "ftnet/models.hpp"

namespace ftnet {

struct GradientBundle {
  Matrix dW;
  Matrix dV;
  Vector dAlpha;
};

// ||g - reference||_inf / max(||reference||_inf, 1e-12) over all coordinates.
double relative_error(const GradientBundle& g, const GradientBundle& reference);

GradientBundle grad_fftnet(const FFTNetParams& p, const Dataset& data, const LossSpec& spec);
GradientBundle finite_diff_grad(const FFTNetParams& p, const Dataset& data, const LossSpec& spec,
                                double step = 1e-5);

struct SequenceDataset {
  std::vector<Sequence> xs;
  std::vector<Vector> ys;  // one target per time step

  std::size_t size() const { return xs.size(); }
};

// Sum over sequences and time steps of l(y_t - target_t).
double sequence_loss(const RFTNetParams& p, const SequenceDataset& data, const LossSpec& spec);
GradientBundle grad_rftnet(const RFTNetParams& p, const SequenceDataset& data,
                           const LossSpec& spec);
GradientBundle finite_diff_grad_rftnet(const RFTNetParams& p, const SequenceDataset& data,
                                       const LossSpec& spec, double step = 1e-5);

struct TrainConfig {
  double step_size = 1e-2;
  std::size_t max_iters = 1000;
  std::uint64_t seed = 0;
  double target_loss = 0.0;
  double init_scale = 0.1;
  // Step multiplier applied after every accepted step; 1 keeps the step fixed.
  double step_growth = 1.0;
};

struct TrainTrace {
  std::vector<double> losses;  // accepted losses, starting with the initial one
  std::vector<double> steps;   // step size used for each accepted update
  std::size_t iterations = 0;
  bool reached_target = false;
  std::string stop_reason;
};

struct FFTNetTrainResult {
  FFTNetParams params;
  TrainTrace trace;
};

struct RFTNetTrainResult {
  RFTNetParams params;
  TrainTrace trace;
};

// Gradient descent with backtracking (up to 30 halvings per iteration).
FFTNetTrainResult train_fftnet(const FFTNetParams& p0, const Dataset& data, const LossSpec& spec,
                               const TrainConfig& cfg);
RFTNetTrainResult train_rftnet(const RFTNetParams& p0, const SequenceDataset& data,
                               const LossSpec& spec, const TrainConfig& cfg);

enum class ProbeCase { AlphaNonzero, AlphaZero };

std::string to_string(ProbeCase c);

struct ProbeResult {
  bool found = false;
  ComplexMatrix deltaZ;
  Vector deltaAlpha;
  double old_loss = 0.0;
  double new_loss = 0.0;
  ProbeCase case_tag = ProbeCase::AlphaNonzero;
  double perturbation_norm = 0.0;
  std::string diagnostics;
};

FFTNetParams perturbed(const FFTNetParams& p, const ComplexMatrix& deltaZ,
                       std::span<const double> deltaAlpha);

// Constructs (deltaZ, deltaAlpha) with ||deltaZ||_F + ||deltaAlpha||_2 <= delta and strictly
// smaller empirical loss. Requires a holomorphic activation, a well-posed loss, linearly
// independent padded inputs and a positive loss.
ProbeResult descent_probe(const FFTNetParams& p, const Dataset& data, const LossSpec& spec,
                          double delta, std::uint64_t seed);

struct BidirectionalResult {
  bool found_up = false;
  bool found_down = false;
  std::vector<Complex> dz_up;
  std::vector<Complex> dz_down;
};

// Searches coordinate directions for dz with ||dz||^2 <= delta raising and lowering Re g.
BidirectionalResult holomorphic_bidirectional_search(
    const std::function<Complex(std::span<const Complex>)>& g, std::span<const Complex> z0,
    double delta);

}  // namespace ftnet
