#pragma once

#include "alexnorm/primitive.hpp"

#include <cmath>
#include <stdexcept>
#include <vector>

namespace alexnorm {

namespace detail {

// Finite sample points: dyadic refinement of the compact part of I (clipped to
// the function's window when I is unbounded) plus every kink inside I.
inline std::vector<double> refinement_points(const RealFunction& h, const Interval& I, int levels) {
  if (levels < 1) throw std::invalid_argument("variation: levels must be >= 1");
  double lo = I.lo(), hi = I.hi();
  if (!I.is_compact()) {
    if (!h.window) throw std::invalid_argument("variation: unbounded interval needs a window on the function");
    if (!I.a.is_finite()) lo = h.window->lo();
    if (!I.b.is_finite()) hi = h.window->hi();
    lo = std::max(lo, I.lo());
    hi = std::min(hi, I.hi());
  }
  if (!(lo < hi)) return {std::max(lo, I.lo())};
  const std::size_t cells = std::size_t{1} << std::min(levels, 30);
  std::vector<double> pts = search::refine_nodes(lo, hi, cells, {});
  for (double k : h.kinks)
    if (k > lo && k < hi) pts.push_back(k);
  return search::merge_nodes(std::move(pts));
}

// Values at the refinement points, with the limits appended at unbounded ends.
inline std::vector<double> refinement_values(const RealFunction& h, const Interval& I, int levels) {
  const auto pts = refinement_points(h, I, levels);
  std::vector<double> vals;
  vals.reserve(pts.size() + 2);
  if (!I.a.is_finite()) {
    if (!h.limit_neg) throw std::invalid_argument("variation: unbounded interval needs a limit at -inf");
    vals.push_back(*h.limit_neg);
  }
  for (double y : pts) vals.push_back(h(y));
  if (!I.b.is_finite()) {
    if (!h.limit_pos) throw std::invalid_argument("variation: unbounded interval needs a limit at +inf");
    vals.push_back(*h.limit_pos);
  }
  return vals;
}

}  // namespace detail

/// Lower estimate of the total variation of h over I from a dyadic partition
/// with 2^levels cells, augmented by the kinks of h. Nondecreasing in
/// `levels`; exact for functions monotone between kinks.
inline double variation(const RealFunction& h, const Interval& I, int levels) {
  const auto vals = detail::refinement_values(h, I, levels);
  double v = 0.0;
  for (std::size_t i = 1; i < vals.size(); ++i) v += std::abs(vals[i] - vals[i - 1]);
  return v;
}

inline double variation(const Primitive& F, const Interval& I, int levels) {
  return variation(F.as_function(), I, levels);
}

/// sup h - inf h over the same points as variation().
inline double oscillation(const RealFunction& h, const Interval& I, int levels) {
  const auto vals = detail::refinement_values(h, I, levels);
  double lo = vals.front(), hi = vals.front();
  for (double v : vals) {
    lo = std::min(lo, v);
    hi = std::max(hi, v);
  }
  return hi - lo;
}

inline double oscillation(const Primitive& F, const Interval& I, int levels) {
  return oscillation(F.as_function(), I, levels);
}

/// Largest |h| over the same points as variation().
inline double sup_abs(const RealFunction& h, const Interval& I, int levels) {
  double m = 0.0;
  for (double v : detail::refinement_values(h, I, levels)) m = std::max(m, std::abs(v));
  return m;
}

/// ||f||_1 of an integrand as the total variation of its primitive over the
/// extended line.
inline double one_norm(const Integrand& f, int levels = 16) {
  if (!f.absolutely_integrable()) throw NotAbsolutelyIntegrable("'" + f.label + "' is not absolutely integrable");
  return variation(f.primitive, Interval::whole_line(), levels);
}

}  // namespace alexnorm
