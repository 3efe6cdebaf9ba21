#pragma once

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include <cmath>
#include <limits>
#include <vector>

namespace alexnorm::quad {

struct Result {
  double value = 0.0;
  double error = 0.0;
};

namespace detail {

// Non-adaptive Kronrod rule on [a,b]. The rule is applied on [-1,1] and scaled
// here so that the returned error is absolute for [a,b].
template <unsigned Points, class F>
Result kronrod_panel(F& f, double a, double b) {
  const double mid = 0.5 * (a + b), half = 0.5 * (b - a);
  auto g = [&](double s) { return f(mid + half * s); };
  double err = 0.0;
  const double v = boost::math::quadrature::gauss_kronrod<double, Points>::integrate(g, -1.0, 1.0, 0, 0.0, &err);
  return {v * half, err * std::abs(half)};
}

}  // namespace detail

/// One Gauss-Kronrod 7/15 panel on a finite interval, with the usual
/// |K15 - G7| error estimate.
template <class F>
Result gk15(F&& f, double a, double b) {
  return detail::kronrod_panel<15>(f, a, b);
}

namespace detail {

template <class F>
Result adaptive_finite(F& f, double a, double b, double tol, unsigned depth) {
  const Result p = kronrod_panel<31>(f, a, b);
  const double v = p.value, err = p.error;
  if (err <= tol || depth == 0 || !(a < b)) return {v, err};
  const double m = 0.5 * (a + b);
  if (!(a < m && m < b)) return {v, err};
  const Result l = adaptive_finite(f, a, m, 0.5 * tol, depth - 1);
  const Result r = adaptive_finite(f, m, b, 0.5 * tol, depth - 1);
  return {l.value + r.value, l.error + r.error};
}

}  // namespace detail

/// Adaptive bisection with an absolute error target. Either endpoint may be
/// infinite; half-lines are mapped to [0,1) by y = a + s/(1-s).
template <class F>
Result integrate(F&& f, double a, double b, double tol = 1e-12, unsigned max_depth = 24) {
  if (a == b) return {};
  if (b < a) {
    Result r = integrate(f, b, a, tol, max_depth);
    return {-r.value, r.error};
  }
  const bool ia = std::isinf(a), ib = std::isinf(b);
  if (ia && ib) {
    const Result l = integrate(f, a, 0.0, 0.5 * tol, max_depth);
    const Result r = integrate(f, 0.0, b, 0.5 * tol, max_depth);
    return {l.value + r.value, l.error + r.error};
  }
  if (ib) {
    auto g = [&](double s) {
      const double one_minus = 1.0 - s;
      if (one_minus <= 0.0) return 0.0;
      const double v = f(a + s / one_minus) / (one_minus * one_minus);
      return std::isfinite(v) ? v : 0.0;
    };
    return detail::adaptive_finite(g, 0.0, 1.0, tol, max_depth);
  }
  if (ia) {
    auto g = [&](double s) {
      const double one_minus = 1.0 - s;
      if (one_minus <= 0.0) return 0.0;
      const double v = f(b - s / one_minus) / (one_minus * one_minus);
      return std::isfinite(v) ? v : 0.0;
    };
    return detail::adaptive_finite(g, 0.0, 1.0, tol, max_depth);
  }
  return detail::adaptive_finite(f, a, b, tol, max_depth);
}

/// Sum of adaptive integrals over consecutive nodes (kinks of the integrand).
template <class F>
Result integrate_pieces(F&& f, const std::vector<double>& nodes, double tol = 1e-12, unsigned max_depth = 24) {
  Result total;
  if (nodes.size() < 2) return total;
  const double per = tol / static_cast<double>(nodes.size() - 1);
  for (std::size_t i = 0; i + 1 < nodes.size(); ++i) {
    const Result r = integrate(f, nodes[i], nodes[i + 1], per, max_depth);
    total.value += r.value;
    total.error += r.error;
  }
  return total;
}

/// Periodic trapezoid rule over one period starting at `a`, doubling the node
/// count until two successive values agree to `tol`.
template <class F>
Result periodic_trapezoid(F&& f, double a, double period, double tol, std::size_t n0 = 64,
                          std::size_t n_max = std::size_t{1} << 22) {
  auto rule = [&](std::size_t n) {
    double s = 0.0;
    const double h = period / static_cast<double>(n);
    for (std::size_t k = 0; k < n; ++k) s += f(a + h * static_cast<double>(k));
    return s * h;
  };
  std::size_t n = n0;
  double prev = rule(n);
  while (n < n_max) {
    n *= 2;
    const double cur = rule(n);
    const double diff = std::abs(cur - prev);
    if (diff <= tol) return {cur, diff};
    prev = cur;
  }
  return {prev, std::numeric_limits<double>::infinity()};
}

}  // namespace alexnorm::quad
