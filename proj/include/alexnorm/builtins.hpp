#pragma once

#include "alexnorm/alexiewicz.hpp"

#include <cmath>
#include <numbers>
#include <string>
#include <vector>

namespace alexnorm::builtin {

/// chi_[0,1].
inline Integrand indicator_01() {
  Integrand f = indicator(0.0, 1.0);
  f.label = "indicator_01";
  return f;
}

/// f(y) = y on [0,1), zero elsewhere; F = y^2/2 there.
inline Integrand ramp() {
  Integrand f;
  f.primitive = Primitive::cubic({0.0, 1.0}, {0.0, 0.5}, {0.0, 1.0}, {0.0, 0.0});
  f.pointwise = [](double y) { return (y >= 0.0 && y < 1.0) ? y : 0.0; };
  f.l1 = L1Status::yes;
  f.label = "ramp";
  return f;
}

/// f = F' with F(y) = sin(y)/y; integrable but not absolutely.
inline Integrand sinc_primitive() { return sinc_primitive_integrand(); }

/// e^{-y^2}, F = (sqrt(pi)/2)(1 + erf y).
inline Integrand gaussian() {
  constexpr double c = 0.88622692545275801365;  // sqrt(pi)/2
  auto anti_erf = [](double y) { return y * std::erf(y) + std::exp(-y * y) / std::sqrt(std::numbers::pi); };
  Primitive::ClosedForm cf;
  cf.F = [](double y) { return c * (1.0 + std::erf(y)); };
  cf.limit_neg = 0.0;
  cf.limit_pos = 2.0 * c;
  cf.window = Interval(-8.0, 8.0);
  cf.derivative = [](double y) { return std::exp(-y * y); };
  cf.integral = [anti_erf](double a, double b) { return c * ((b - a) + anti_erf(b) - anti_erf(a)); };
  Integrand f;
  f.primitive = Primitive::closed_form(std::move(cf));
  f.pointwise = [](double y) { return std::exp(-y * y); };
  f.l1 = L1Status::yes;
  f.label = "gaussian";
  return f;
}

/// Standard bump exp(-1/(1-y^2)) on (-1,1).
inline SmoothBump standard_bump() { return SmoothBump{}; }

inline Integrand bump() { return standard_bump().integrand(); }

/// cos(y) on [-pi, pi], F = sin(y) there.
inline Integrand cosine() {
  constexpr double pi = std::numbers::pi;
  Primitive::ClosedForm cf;
  cf.F = [](double y) { return (y <= -pi || y >= pi) ? 0.0 : std::sin(y); };
  cf.window = Interval(-pi, pi);
  cf.constant_outside = true;
  cf.kinks = {-pi, pi};
  cf.derivative = [](double y) { return (y < -pi || y >= pi) ? 0.0 : std::cos(y); };
  cf.integral = [](double a, double b) {
    const double lo = std::clamp(a, -std::numbers::pi, std::numbers::pi), hi = std::clamp(b, -std::numbers::pi, std::numbers::pi);
    return std::cos(lo) - std::cos(hi);
  };
  Integrand f;
  f.primitive = Primitive::closed_form(std::move(cf));
  f.pointwise = f.primitive.closed()->derivative;
  f.l1 = L1Status::yes;
  f.label = "cosine";
  return f;
}

/// Heaviside step chi_[0,inf): a signal without a primitive of finite limits.
inline Signal step_signal() { return signal_from_steps(Steps({0.0}, {0.0, 1.0}), "step_signal"); }

/// Integrand builtins by name (step_signal is a signal only).
inline std::vector<std::string> function_names() {
  return {"bump", "cosine", "gaussian", "indicator_01", "ramp", "sinc_primitive", "step_signal"};
}

inline Integrand function_by_name(const std::string& name) {
  if (name == "indicator_01") return indicator_01();
  if (name == "ramp") return ramp();
  if (name == "sinc_primitive") return sinc_primitive();
  if (name == "gaussian") return gaussian();
  if (name == "bump") return bump();
  if (name == "cosine") return cosine();
  if (name == "step_signal") throw InvalidSpec("step_signal is a signal without a primitive of finite limits");
  throw std::out_of_range("unknown builtin function '" + name + "'");
}

}  // namespace alexnorm::builtin
