#include "ftnet/losses.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

#include "ftnet/errors.hpp"

namespace ftnet {

LossSpec LossSpec::param_cosh(double a, double b, double c) {
  require(a > 0.0 && b > 0.0 && c > 0.0, "param_cosh: a, b, c must be positive");
  return {LossKind::ParamCosh, a, b, c};
}

double LossSpec::value(double x) const {
  if (kind == LossKind::Squared) return x * x;
  const double u = a * x;
  const double v = -b * x;
  const double m = std::max(u, v);
  const double lse = m + std::log1p(std::exp(-std::abs(u - v)));
  return (lse - std::numbers::ln2) / c;
}

double LossSpec::deriv(double x) const {
  if (kind == LossKind::Squared) return 2.0 * x;
  const double t = (a + b) * x;
  // s = sigmoid(t), 1 - s = sigmoid(-t), both evaluated without overflow.
  const double e = std::exp(-std::abs(t));
  const double s = t >= 0.0 ? 1.0 / (1.0 + e) : e / (1.0 + e);
  const double one_minus_s = t >= 0.0 ? e / (1.0 + e) : 1.0 / (1.0 + e);
  return (a * s - b * one_minus_s) / c;
}

std::string to_string(const LossSpec& spec) {
  if (spec.kind == LossKind::Squared) return "squared";
  std::ostringstream out;
  out << "param_cosh(" << spec.a << ',' << spec.b << ',' << spec.c << ')';
  return out.str();
}

double loss_value(const LossSpec& spec, double x) { return spec.value(x); }
double loss_deriv(const LossSpec& spec, double x) { return spec.deriv(x); }

WellPosedReport check_well_posed(const std::function<double(double)>& value,
                                 const std::function<double(double)>& deriv, double G,
                                 double step) {
  require(G >= 10.0, "check_well_posed: grid must cover at least [-10, 10]");
  require(step > 0.0 && step <= 1e-2, "check_well_posed: step must lie in (0, 1e-2]");
  WellPosedReport report;
  report.value_at_zero = value(0.0);
  if (!(std::abs(report.value_at_zero) <= 1e-12)) {
    report.passed = false;
    report.message = "l(0) is not zero";
  }
  const auto n = static_cast<long>(std::ceil(G / step));
  for (long k = -n; k <= n; ++k) {
    if (k == 0) continue;
    const double x = static_cast<double>(k) * step;
    const double d = deriv(x);
    const bool ok = x > 0.0 ? d > 0.0 : d < 0.0;
    if (ok) continue;
    report.passed = false;
    ++report.violations;
    if (report.first_violations.size() < 8) report.first_violations.push_back(x);
  }
  if (report.violations > 0) {
    std::ostringstream msg;
    if (!report.message.empty()) msg << report.message << "; ";
    msg << report.violations << " grid points where sign l'(x) != sign x, first at x="
        << report.first_violations.front();
    report.message = msg.str();
  }
  return report;
}

WellPosedReport check_well_posed(const LossSpec& spec, double G, double step) {
  return check_well_posed([&](double x) { return spec.value(x); },
                          [&](double x) { return spec.deriv(x); }, G, step);
}

double empirical_loss(const FFTNetParams& p, const Dataset& data, const LossSpec& spec) {
  require(data.xs.size() == data.ys.size(), "empirical_loss: xs and ys differ in length");
  double total = 0.0;
  for (std::size_t i = 0; i < data.size(); ++i)
    total += spec.value(eval_fftnet(p, data.xs[i]) - data.ys[i]);
  return total;
}

}  // namespace ftnet
