#pragma once

#include <functional>
#include <string>
#include <vector>

#include "ftnet/models.hpp"

namespace ftnet {

enum class LossKind { Squared, ParamCosh };

struct LossSpec {
  LossKind kind = LossKind::Squared;
  double a = 1.0;
  double b = 1.0;
  double c = 1.0;

  static LossSpec squared() { return {}; }
  static LossSpec param_cosh(double a = 1.0, double b = 1.0, double c = 1.0);

  double value(double x) const;
  double deriv(double x) const;
};

std::string to_string(const LossSpec& spec);

double loss_value(const LossSpec& spec, double x);
double loss_deriv(const LossSpec& spec, double x);

struct Dataset {
  Sequence xs;
  Vector ys;

  std::size_t size() const { return ys.size(); }
};

struct WellPosedReport {
  bool passed = true;
  double value_at_zero = 0.0;
  std::size_t violations = 0;
  std::vector<double> first_violations;  // up to 8 offending grid points
  std::string message;
};

// Scans [-G, G] with the given step; checks |l(0)| <= 1e-12 and sign l'(x) = sign x for x != 0.
WellPosedReport check_well_posed(const std::function<double(double)>& value,
                                 const std::function<double(double)>& deriv, double G = 10.0,
                                 double step = 1e-2);
WellPosedReport check_well_posed(const LossSpec& spec, double G = 10.0, double step = 1e-2);

// Sum over samples of l(f(x_i) - y_i).
double empirical_loss(const FFTNetParams& p, const Dataset& data, const LossSpec& spec);

}  // namespace ftnet
