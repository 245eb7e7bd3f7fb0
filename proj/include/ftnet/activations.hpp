#pragma once

#include <string>

#include "ftnet/numerics.hpp"

namespace ftnet {

enum class ActivationTag { ZReLU, ModReLU, CReLU, HolExpM1, HolSin, RealReLU, RealIdentity };

struct ActivationKind {
  ActivationTag tag = ActivationTag::ZReLU;
  double modrelu_bias = -0.5;

  static ActivationKind zrelu() { return {ActivationTag::ZReLU}; }
  static ActivationKind modrelu(double b = -0.5) { return {ActivationTag::ModReLU, b}; }
  static ActivationKind crelu() { return {ActivationTag::CReLU}; }
  static ActivationKind holexpm1() { return {ActivationTag::HolExpM1}; }
  static ActivationKind holsin() { return {ActivationTag::HolSin}; }
  static ActivationKind relu() { return {ActivationTag::RealReLU}; }
  static ActivationKind identity() { return {ActivationTag::RealIdentity}; }

  bool holomorphic() const {
    return tag == ActivationTag::HolExpM1 || tag == ActivationTag::HolSin;
  }
  bool real_valued() const {
    return tag == ActivationTag::RealReLU || tag == ActivationTag::RealIdentity;
  }

  bool operator==(const ActivationKind& other) const {
    return tag == other.tag && (tag != ActivationTag::ModReLU || modrelu_bias == other.modrelu_bias);
  }
};

// Lowercase JSON tag ("zrelu", "modrelu", ...).
std::string to_string(const ActivationKind& kind);
ActivationKind activation_from_string(const std::string& tag, double modrelu_bias = -0.5);

// Real kinds act componentwise on (Re z, Im z).
Complex apply(const ActivationKind& kind, Complex z);

// Jacobian of (Re sigma, Im sigma) with respect to (Re z, Im z).
struct Jacobian2 {
  double j00 = 0.0;  // d Re / d Re z
  double j01 = 0.0;  // d Re / d Im z
  double j10 = 0.0;  // d Im / d Re z
  double j11 = 0.0;  // d Im / d Im z
};

Jacobian2 subgradient(const ActivationKind& kind, Complex z);

// Derivative of a holomorphic kind; contract violation otherwise.
Complex holomorphic_derivative(const ActivationKind& kind, Complex z);

// real_arg_imag_bias evaluates sigma(x + c i); imag_arg_real_bias evaluates sigma(c + x i).
enum class InducedConvention { RealArgImagBias, ImagArgRealBias };
enum class Part { Re, Im };

std::string to_string(InducedConvention convention);

double induced_real(const ActivationKind& kind, double c, double x, InducedConvention convention);
double induced_imag(const ActivationKind& kind, double c, double x, InducedConvention convention);

// A real scalar activation: either a real kind applied directly, or one part of a
// complex kind restricted to a line in the complex plane.
struct RealActivation {
  ActivationKind base = ActivationKind::relu();
  bool induced = false;
  double c = 0.0;
  InducedConvention convention = InducedConvention::RealArgImagBias;
  Part part = Part::Re;

  static RealActivation relu() { return {ActivationKind::relu()}; }
  static RealActivation identity() { return {ActivationKind::identity()}; }
  static RealActivation restriction(const ActivationKind& base, double c,
                                    InducedConvention convention, Part part);

  double operator()(double x) const;
  // One-sided derivative used for training; ReLU kinks take the pass-side value.
  double derivative(double x) const;

  bool operator==(const RealActivation& other) const;
};

std::string describe(const RealActivation& sigma);

}  // namespace ftnet
