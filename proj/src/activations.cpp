#include "ftnet/activations.hpp"

#include <cmath>

#include "ftnet/errors.hpp"

namespace ftnet {

std::string to_string(const ActivationKind& kind) {
  switch (kind.tag) {
    case ActivationTag::ZReLU: return "zrelu";
    case ActivationTag::ModReLU: return "modrelu";
    case ActivationTag::CReLU: return "crelu";
    case ActivationTag::HolExpM1: return "holexpm1";
    case ActivationTag::HolSin: return "holsin";
    case ActivationTag::RealReLU: return "relu";
    case ActivationTag::RealIdentity: return "identity";
  }
  return "unknown";
}

ActivationKind activation_from_string(const std::string& tag, double modrelu_bias) {
  if (tag == "zrelu") return ActivationKind::zrelu();
  if (tag == "modrelu") return ActivationKind::modrelu(modrelu_bias);
  if (tag == "crelu") return ActivationKind::crelu();
  if (tag == "holexpm1") return ActivationKind::holexpm1();
  if (tag == "holsin") return ActivationKind::holsin();
  if (tag == "relu") return ActivationKind::relu();
  if (tag == "identity") return ActivationKind::identity();
  throw ContractViolation("unknown activation tag '" + tag + "'");
}

namespace {

double ramp(double x) { return x > 0.0 ? x : 0.0; }
double relu_slope(double x) { return x >= 0.0 ? 1.0 : 0.0; }

bool zrelu_passes(Complex z) {
  const double x = z.real();
  const double y = z.imag();
  return (x >= 0.0 && y >= 0.0) || (x <= 0.0 && y <= 0.0);
}

// exp(z) - 1 without cancellation near 0.
Complex expm1_complex(Complex z) {
  const double x = z.real();
  const double y = z.imag();
  const double half_sin = std::sin(0.5 * y);
  const double re = std::expm1(x) * std::cos(y) - 2.0 * half_sin * half_sin;
  const double im = std::exp(x) * std::sin(y);
  return {re, im};
}

}  // namespace

Complex apply(const ActivationKind& kind, Complex z) {
  switch (kind.tag) {
    case ActivationTag::ZReLU:
      if (z == Complex(0.0, 0.0)) return {0.0, 0.0};
      return zrelu_passes(z) ? z : Complex(0.0, 0.0);
    case ActivationTag::ModReLU: {
      const double r = std::abs(z);
      if (r == 0.0 || r + kind.modrelu_bias < 0.0) return {0.0, 0.0};
      return z * ((r + kind.modrelu_bias) / r);
    }
    case ActivationTag::CReLU:
    case ActivationTag::RealReLU:
      return {ramp(z.real()), ramp(z.imag())};
    case ActivationTag::HolExpM1: return expm1_complex(z);
    case ActivationTag::HolSin: return std::sin(z);
    case ActivationTag::RealIdentity: return z;
  }
  return {0.0, 0.0};
}

Complex holomorphic_derivative(const ActivationKind& kind, Complex z) {
  switch (kind.tag) {
    case ActivationTag::HolExpM1: return std::exp(z);
    case ActivationTag::HolSin: return std::cos(z);
    default:
      throw ContractViolation("holomorphic_derivative: activation '" + to_string(kind) +
                              "' is not holomorphic");
  }
}

Jacobian2 subgradient(const ActivationKind& kind, Complex z) {
  switch (kind.tag) {
    case ActivationTag::ZReLU:
      if (zrelu_passes(z)) return {1.0, 0.0, 0.0, 1.0};
      return {};
    case ActivationTag::ModReLU: {
      const double x = z.real();
      const double y = z.imag();
      const double r = std::abs(z);
      const double b = kind.modrelu_bias;
      if (r == 0.0 || r + b < 0.0) return {};
      const double r3 = r * r * r;
      return {1.0 + b * y * y / r3, -b * x * y / r3, -b * x * y / r3, 1.0 + b * x * x / r3};
    }
    case ActivationTag::CReLU:
    case ActivationTag::RealReLU:
      return {relu_slope(z.real()), 0.0, 0.0, relu_slope(z.imag())};
    case ActivationTag::RealIdentity: return {1.0, 0.0, 0.0, 1.0};
    case ActivationTag::HolExpM1:
    case ActivationTag::HolSin: {
      const Complex d = holomorphic_derivative(kind, z);
      return {d.real(), -d.imag(), d.imag(), d.real()};
    }
  }
  return {};
}

std::string to_string(InducedConvention convention) {
  return convention == InducedConvention::RealArgImagBias ? "real_arg_imag_bias"
                                                          : "imag_arg_real_bias";
}

namespace {

Complex induced_point(double c, double x, InducedConvention convention) {
  return convention == InducedConvention::RealArgImagBias ? Complex(x, c) : Complex(c, x);
}

}  // namespace

double induced_real(const ActivationKind& kind, double c, double x, InducedConvention convention) {
  return apply(kind, induced_point(c, x, convention)).real();
}

double induced_imag(const ActivationKind& kind, double c, double x, InducedConvention convention) {
  return apply(kind, induced_point(c, x, convention)).imag();
}

RealActivation RealActivation::restriction(const ActivationKind& base, double c,
                                           InducedConvention convention, Part part) {
  RealActivation out;
  out.base = base;
  out.induced = true;
  out.c = c;
  out.convention = convention;
  out.part = part;
  return out;
}

double RealActivation::operator()(double x) const {
  if (!induced) {
    require(base.real_valued(), "RealActivation: complex base requires an induced restriction");
    return base.tag == ActivationTag::RealReLU ? ramp(x) : x;
  }
  return part == Part::Re ? induced_real(base, c, x, convention)
                          : induced_imag(base, c, x, convention);
}

double RealActivation::derivative(double x) const {
  if (!induced) {
    require(base.real_valued(), "RealActivation: complex base requires an induced restriction");
    return base.tag == ActivationTag::RealReLU ? relu_slope(x) : 1.0;
  }
  const Jacobian2 j = subgradient(base, induced_point(c, x, convention));
  // x moves Re z under real_arg_imag_bias and Im z under imag_arg_real_bias.
  if (convention == InducedConvention::RealArgImagBias) return part == Part::Re ? j.j00 : j.j10;
  return part == Part::Re ? j.j01 : j.j11;
}

bool RealActivation::operator==(const RealActivation& other) const {
  if (induced != other.induced || !(base == other.base)) return false;
  if (!induced) return true;
  return c == other.c && convention == other.convention && part == other.part;
}

std::string describe(const RealActivation& sigma) {
  if (!sigma.induced) return to_string(sigma.base);
  return std::string(sigma.part == Part::Re ? "Re " : "Im ") + to_string(sigma.base) + "[" +
         to_string(sigma.convention) + ", c=" + std::to_string(sigma.c) + "]";
}

}  // namespace ftnet
