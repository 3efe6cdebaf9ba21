#pragma once

#include "alexnorm/alexiewicz.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <memory>
#include <mutex>
#include <string>
#include <tuple>
#include <utility>
#include <vector>

namespace alexnorm {

/// A positive weight w on the line. Besides the evaluator it may carry its
/// jump points, a derivative away from the jumps, and an exact integral
/// int_a^b w (infinite ends allowed; +inf when the integral diverges).
/// Grid bounds and local variations are cached per interval on first use.
class Weight {
public:
  struct Def {
    std::string name;
    std::function<double(double)> w;
    std::vector<double> jumps;
    std::function<double(double)> derivative;
    std::function<double(double, double)> integral;
    std::optional<double> constant;
    bool right_continuous_normalized = true;
  };

  struct Bounds {
    double m = 0.0;
    double M = 0.0;
  };

  explicit Weight(Def d) : def_(std::make_shared<const Def>(std::move(d))), cache_(std::make_shared<Cache>()) {
    if (!def_->w) throw InvalidSpec("weight '" + def_->name + "' has no evaluator");
  }

  const std::string& name() const { return def_->name; }
  double operator()(double y) const { return def_->w(y); }
  const std::vector<double>& jumps() const { return def_->jumps; }
  std::optional<double> constant() const { return def_->constant; }
  bool right_continuous_normalized() const { return def_->right_continuous_normalized; }

  /// w'(y) away from the jumps; central differences when no closed form.
  double derivative(double y) const {
    if (def_->derivative) return def_->derivative(y);
    const double h = 1e-6 * std::max(1.0, std::abs(y));
    return (def_->w(y + h) - def_->w(y - h)) / (2 * h);
  }

  /// int_a^b w.
  double integral(double a, double b) const {
    if (a == b) return 0.0;
    if (b < a) return -integral(b, a);
    if (def_->integral) return def_->integral(a, b);
    std::vector<double> nodes{a};
    for (double j : def_->jumps)
      if (j > a && j < b) nodes.push_back(j);
    nodes.push_back(b);
    const auto r = quad::integrate_pieces(def_->w, nodes, 1e-13, 30);
    return r.value;
  }

  RealFunction as_function(const Interval& window) const {
    RealFunction h;
    h.eval = def_->w;
    h.kinks = def_->jumps;
    h.window = window;
    return h;
  }

  /// Grid infimum and supremum of w over I on `grid` cells plus the jumps
  /// (both one-sided values there).
  Bounds bounds(const Interval& I, std::size_t grid = 4096) const {
    if (!I.is_compact()) throw std::invalid_argument("weight bounds need a compact interval");
    const Key key{I.lo(), I.hi(), grid};
    {
      std::lock_guard lock(cache_->mutex);
      if (auto it = cache_->bounds.find(key); it != cache_->bounds.end()) return it->second;
    }
    Bounds b{std::numeric_limits<double>::infinity(), -std::numeric_limits<double>::infinity()};
    auto take = [&](double y) {
      const double v = def_->w(y);
      if (!std::isfinite(v)) throw DegenerateWeight("weight '" + def_->name + "' is not finite at " + std::to_string(y));
      b.m = std::min(b.m, v);
      b.M = std::max(b.M, v);
    };
    for (double y : search::refine_nodes(I.lo(), I.hi(), grid, def_->jumps)) take(y);
    for (double j : def_->jumps)
      if (j > I.lo() && j <= I.hi()) take(std::nextafter(j, -std::numeric_limits<double>::infinity()));
    if (!(b.m > 0.0)) throw DegenerateWeight("weight '" + def_->name + "' is not positive on the grid");
    std::lock_guard lock(cache_->mutex);
    return cache_->bounds.emplace(key, b).first->second;
  }

  /// Variation of w over I (dyadic refinement plus jumps).
  double local_variation(const Interval& I, int levels = 12) const {
    const Key key{I.lo(), I.hi(), static_cast<std::size_t>(levels)};
    {
      std::lock_guard lock(cache_->mutex);
      if (auto it = cache_->variation.find(key); it != cache_->variation.end()) return it->second;
    }
    double v = 0.0;
    if (I.length() > 0.0) v = jump_aware_variation(def_->w, def_->jumps, I, levels);
    std::lock_guard lock(cache_->mutex);
    return cache_->variation.emplace(key, v).first->second;
  }

  /// Variation of h on I from a dyadic grid, with both one-sided values taken
  /// at each jump.
  static double jump_aware_variation(const std::function<double(double)>& h, const std::vector<double>& jumps,
                                     const Interval& I, int levels) {
    const std::size_t cells = std::size_t{1} << std::min(levels, 30);
    std::vector<double> pts = search::refine_nodes(I.lo(), I.hi(), cells, jumps);
    double v = 0.0, prev = h(pts.front());
    const double ninf = -std::numeric_limits<double>::infinity();
    for (std::size_t i = 1; i < pts.size(); ++i) {
      const double y = pts[i];
      if (std::binary_search(jumps.begin(), jumps.end(), y)) {
        const double left = h(std::nextafter(y, ninf));
        v += std::abs(left - prev);
        prev = left;
      }
      const double cur = h(y);
      v += std::abs(cur - prev);
      prev = cur;
    }
    return v;
  }

private:
  struct Key {
    double lo, hi;
    std::size_t n;
    bool operator<(const Key& o) const { return std::tie(lo, hi, n) < std::tie(o.lo, o.hi, o.n); }
  };
  struct Cache {
    std::mutex mutex;
    std::map<Key, Bounds> bounds;
    std::map<Key, double> variation;
  };

  std::shared_ptr<const Def> def_;
  std::shared_ptr<Cache> cache_;
};

// ---------------------------------------------------------------------------
// Builtin weights

namespace weight {

inline Weight reciprocal_quadratic() {
  Weight::Def d;
  d.name = "reciprocal_quadratic";
  d.w = [](double y) { return 1.0 / (y * y + 1.0); };
  d.derivative = [](double y) { return -2.0 * y / ((y * y + 1.0) * (y * y + 1.0)); };
  d.integral = [](double a, double b) { return std::atan(b) - std::atan(a); };
  return Weight(std::move(d));
}

inline Weight exponential() {
  Weight::Def d;
  d.name = "exponential";
  d.w = [](double y) { return std::exp(y); };
  d.derivative = [](double y) { return std::exp(y); };
  d.integral = [](double a, double b) { return std::exp(b) - std::exp(a); };
  return Weight(std::move(d));
}

namespace detail {

// int_a^b of a right-continuous step function with the given edges/levels
inline double step_integral(const Steps& s, double a, double b) {
  double total = 0.0;
  double lo = a;
  for (std::size_t i = 0; i <= s.edges.size(); ++i) {
    const double hi = (i < s.edges.size()) ? std::min(b, s.edges[i]) : b;
    if (hi > lo) {
      const double len = hi - lo, lv = s.levels[i];
      if (lv != 0.0) total += std::isinf(len) ? std::copysign(std::numeric_limits<double>::infinity(), lv) : lv * len;
    }
    if (i < s.edges.size()) lo = std::max(lo, s.edges[i]);
    if (lo >= b) break;
  }
  return total;
}

}  // namespace detail

/// below for y < threshold, above for y >= threshold.
inline Weight step(double below = 1.0, double above = 2.0, double threshold = 0.0) {
  if (!(below > 0.0) || !(above > 0.0)) throw DegenerateWeight("step weight levels must be positive");
  const Steps s({threshold}, {below, above});
  Weight::Def d;
  d.name = "step_weight";
  d.w = [s](double y) { return s(y); };
  d.jumps = {threshold};
  d.derivative = [](double) { return 0.0; };
  d.integral = [s](double a, double b) { return detail::step_integral(s, a, b); };
  return Weight(std::move(d));
}

inline Weight constant(double c = 1.0) {
  if (!(c > 0.0)) throw DegenerateWeight("constant weight must be positive");
  Weight::Def d;
  d.name = "constant";
  d.w = [c](double) { return c; };
  d.derivative = [](double) { return 0.0; };
  d.integral = [c](double a, double b) { return (std::isinf(a) || std::isinf(b)) ? std::numeric_limits<double>::infinity() : c * (b - a); };
  d.constant = c;
  return Weight(std::move(d));
}

/// Weight from a table. "step": values[i] holds on [x[i], x[i+1]), the first
/// value to the left and the last to the right. "linear": piecewise linear,
/// constant outside; a repeated breakpoint is a jump and the right value is
/// kept.
inline Weight table(std::vector<double> x, std::vector<double> v, bool linear) {
  if (x.empty() || x.size() != v.size()) throw InvalidSpec("weight table: breakpoints/values size mismatch");
  for (double val : v)
    if (!(val > 0.0) || !std::isfinite(val)) throw DegenerateWeight("weight table values must be positive");
  for (std::size_t i = 1; i < x.size(); ++i)
    if (x[i] < x[i - 1]) throw InvalidSpec("weight table: breakpoints must not decrease");
  Weight::Def d;
  d.name = "table";
  d.right_continuous_normalized = true;
  if (!linear) {
    std::vector<double> edges, levels{v.front()};
    for (std::size_t i = 0; i < x.size(); ++i) {
      if (!edges.empty() && edges.back() == x[i]) {
        levels.back() = v[i];
        continue;
      }
      edges.push_back(x[i]);
      levels.push_back(v[i]);
    }
    const Steps s(edges, levels);
    d.w = [s](double y) { return s(y); };
    d.jumps = edges;
    d.derivative = [](double) { return 0.0; };
    d.integral = [s](double a, double b) { return detail::step_integral(s, a, b); };
    return Weight(std::move(d));
  }
  // collapse repeated breakpoints into jumps, keeping the right value
  struct Seg { double x0, x1, v0, v1; };
  std::vector<Seg> segs;
  std::vector<double> jumps;
  for (std::size_t i = 0; i + 1 < x.size(); ++i) {
    if (x[i] == x[i + 1]) {
      if (v[i] != v[i + 1]) jumps.push_back(x[i]);
      continue;
    }
    segs.push_back({x[i], x[i + 1], v[i], v[i + 1]});
  }
  const double first = v.front(), last = v.back(), xlo = x.front(), xhi = x.back();
  auto eval = [segs, first, last, xlo, xhi](double y) {
    if (y < xlo) return first;
    if (y >= xhi) return last;
    // right-continuous: the last segment starting at or before y
    auto it = std::upper_bound(segs.begin(), segs.end(), y, [](double t, const Seg& s) { return t < s.x0; });
    const Seg& s = *(it - 1);
    return s.v0 + (s.v1 - s.v0) * (y - s.x0) / (s.x1 - s.x0);
  };
  d.w = eval;
  d.jumps = search::merge_nodes(jumps);
  d.derivative = [segs, xlo, xhi](double y) {
    if (y < xlo || y >= xhi) return 0.0;
    auto it = std::upper_bound(segs.begin(), segs.end(), y, [](double t, const Seg& s) { return t < s.x0; });
    const Seg& s = *(it - 1);
    return (s.v1 - s.v0) / (s.x1 - s.x0);
  };
  d.integral = [segs, first, last, xlo, xhi](double a, double b) {
    constexpr double inf = std::numeric_limits<double>::infinity();
    double total = 0.0;
    if (a < xlo) total += std::isinf(a) ? inf : first * (std::min(b, xlo) - a);
    if (b > xhi) total += std::isinf(b) ? inf : last * (b - std::max(a, xhi));
    for (const Seg& s : segs) {
      const double lo = std::max(a, s.x0), hi = std::min(b, s.x1);
      if (!(hi > lo)) continue;
      auto val = [&s](double t) { return s.v0 + (s.v1 - s.v0) * (t - s.x0) / (s.x1 - s.x0); };
      total += 0.5 * (val(lo) + val(hi)) * (hi - lo);
    }
    return total;
  };
  return Weight(std::move(d));
}

inline std::vector<std::string> names() { return {"constant", "exponential", "reciprocal_quadratic", "step_weight"}; }

inline Weight by_name(const std::string& name) {
  if (name == "reciprocal_quadratic") return reciprocal_quadratic();
  if (name == "exponential") return exponential();
  if (name == "step_weight" || name == "step") return step();
  if (name == "constant") return constant();
  throw std::out_of_range("unknown builtin weight '" + name + "'");
}

}  // namespace weight

// ---------------------------------------------------------------------------
// Ratio functions

/// g_x(y) = w(y + x)/w(y).
struct RatioFunction {
  double x = 0.0;
  Weight w;
  std::vector<double> jumps;  // jumps of w and of w(. + x)

  double operator()(double y) const {
    if (x == 0.0) return 1.0;
    return w(y + x) / w(y);
  }

  RealFunction as_function(const Interval& window) const {
    RealFunction h;
    h.eval = [*this](double y) { return (*this)(y); };
    h.kinks = jumps;
    h.window = window;
    return h;
  }

  /// Grid supremum of |g_x| over I.
  double bound_estimate(const Interval& I, std::size_t grid = 4096) const {
    double b = 0.0;
    for (double y : search::refine_nodes(I.lo(), I.hi(), grid, jumps)) b = std::max(b, std::abs((*this)(y)));
    return b;
  }

  double variation(const Interval& I, int levels = 16) const {
    if (x == 0.0 || !(I.length() > 0.0)) return 0.0;
    return Weight::jump_aware_variation([this](double y) { return (*this)(y); }, jumps, I, levels);
  }
};

inline RatioFunction weight_ratio(const Weight& w, double x) {
  std::vector<double> j = w.jumps();
  for (double t : w.jumps()) j.push_back(t - x);
  return RatioFunction{x, w, search::merge_nodes(std::move(j))};
}

// ---------------------------------------------------------------------------
// Measure estimates

/// Grid fraction of I where |h - target| > eps, on cell midpoints.
struct MeasureEstimate {
  double x = 0.0;
  Interval I{0.0, 1.0};
  double epsilon = 0.0;
  double fraction = 0.0;
  double l1_average = 0.0;  // grid mean of |h - target|
  std::size_t grid_size = 0;
  double stability_delta = 0.0;  // change in fraction when the grid is doubled
};

namespace detail {

inline std::pair<double, double> midpoint_fraction(const std::function<double(double)>& diff, const Interval& I,
                                                   double eps, std::size_t grid) {
  const double h = I.length() / static_cast<double>(grid);
  std::size_t bad = 0;
  double sum = 0.0;
  for (std::size_t k = 0; k < grid; ++k) {
    const double d = std::abs(diff(I.lo() + (static_cast<double>(k) + 0.5) * h));
    if (d > eps) ++bad;
    sum += d;
  }
  return {static_cast<double>(bad) / static_cast<double>(grid), sum / static_cast<double>(grid)};
}

}  // namespace detail

inline std::vector<MeasureEstimate> convergence_in_measure(const std::vector<std::pair<double, std::function<double(double)>>>& family,
                                                           const std::function<double(double)>& target, const Interval& I,
                                                           double eps, std::size_t grid = 4096) {
  if (!I.is_compact() || !(I.length() > 0.0)) throw std::invalid_argument("convergence_in_measure: need a compact interval");
  if (!(eps > 0.0)) throw std::invalid_argument("convergence_in_measure: eps must be positive");
  std::vector<MeasureEstimate> out;
  for (const auto& [x, h] : family) {
    auto diff = [&h, &target](double y) { return h(y) - target(y); };
    const auto [frac, avg] = detail::midpoint_fraction(diff, I, eps, grid);
    const auto [frac2, avg2] = detail::midpoint_fraction(diff, I, eps, 2 * grid);
    (void)avg2;
    out.push_back({x, I, eps, frac, avg, grid, std::abs(frac2 - frac)});
  }
  return out;
}

// ---------------------------------------------------------------------------
// Admissibility checks

struct Verdict {
  bool passed = false;
  double value = 0.0;        // the headline estimate
  double refinement_delta = 0.0;
};

struct RatioConditionsReport {
  Verdict uniform_bound;
  Verdict uniform_variation;
  Verdict measure;
  std::vector<MeasureEstimate> fractions;  // per interval, ladder order
  std::vector<std::pair<double, double>> variation_by_x;  // (x, sup over I of V_I g_x)
  bool passed() const { return uniform_bound.passed && uniform_variation.passed && measure.passed; }
};

struct RatioCheckOptions {
  std::size_t grid = 4096;
  int levels = 16;
  double stability = 1e-3;      // relative change allowed under refinement
  double final_fraction = 1e-2; // measure verdict at the smallest |x|
};

/// Evidence for the three ratio conditions: g_x bounded and of bounded
/// variation uniformly in x, and g_x -> 1 in measure on each interval.
inline RatioConditionsReport ratio_conditions_check(const Weight& w, std::vector<double> xs, const std::vector<Interval>& intervals,
                                                    double eps, const RatioCheckOptions& opt = {}) {
  if (xs.empty()) throw std::invalid_argument("ratio_conditions_check: empty ladder");
  if (!(eps > 0.0)) throw std::invalid_argument("ratio_conditions_check: eps must be positive");
  for (const auto& I : intervals)
    if (!I.is_compact()) throw std::invalid_argument("ratio_conditions_check: intervals must be compact");
  std::stable_sort(xs.begin(), xs.end(), [](double a, double b) { return std::abs(a) > std::abs(b); });

  RatioConditionsReport rep;
  auto rel = [](double a, double b) { return std::abs(a - b) / std::max(1.0, std::abs(b)); };

  double B = 0.0, B2 = 0.0, V = 0.0, V2 = 0.0;
  for (double x : xs) {
    const RatioFunction g = weight_ratio(w, x);
    double vx = 0.0;
    for (const auto& I : intervals) {
      B = std::max(B, g.bound_estimate(I, opt.grid));
      B2 = std::max(B2, g.bound_estimate(I, 2 * opt.grid));
      const double v = g.variation(I, opt.levels);
      vx = std::max(vx, v);
      V = std::max(V, v);
      V2 = std::max(V2, g.variation(I, opt.levels + 1));
    }
    rep.variation_by_x.emplace_back(x, vx);
  }
  rep.uniform_bound = {std::isfinite(B2) && rel(B, B2) <= opt.stability, B2, std::abs(B2 - B)};
  rep.uniform_variation = {std::isfinite(V2) && rel(V, V2) <= opt.stability, V2, std::abs(V2 - V)};

  bool measure_ok = true;
  double worst_final = 0.0, worst_delta = 0.0;
  for (const auto& I : intervals) {
    std::vector<std::pair<double, std::function<double(double)>>> fam;
    for (double x : xs) fam.emplace_back(x, [g = weight_ratio(w, x)](double y) { return g(y); });
    const auto est = convergence_in_measure(fam, [](double) { return 1.0; }, I, eps, opt.grid);
    for (std::size_t i = 0; i < est.size(); ++i) {
      if (i > 0 && est[i].fraction > est[i - 1].fraction + est[i].stability_delta + 1e-12) measure_ok = false;
      worst_delta = std::max(worst_delta, est[i].stability_delta);
    }
    worst_final = std::max(worst_final, est.back().fraction);
    rep.fractions.insert(rep.fractions.end(), est.begin(), est.end());
  }
  rep.measure = {measure_ok && worst_final <= opt.final_fraction, worst_final, worst_delta};
  return rep;
}

struct SufficientConditionsReport {
  double m_I = 0.0;
  double M_I = 0.0;
  double bv_local = 0.0;
  double bv_refinement_delta = 0.0;
  std::vector<MeasureEstimate> measure_continuity;  // T_x fractions, |x| decreasing
  bool passed = false;
};

/// Local sufficient conditions on I: positive bounds, local bounded variation
/// and continuity in measure (|w(y + x) - w(y)| > eps on a vanishing share).
/// With eps <= 0 the threshold is 1e-3 of the grid range of w (or of M_I).
inline SufficientConditionsReport sufficient_conditions_check(const Weight& w, const Interval& I, std::size_t grid = 4096,
                                                              double eps = 0.0, int ladder_depth = 16) {
  if (!I.is_compact() || !(I.length() > 0.0)) throw std::invalid_argument("sufficient_conditions_check: need a compact interval");
  if (grid < 2) throw std::invalid_argument("sufficient_conditions_check: grid must be >= 2");
  SufficientConditionsReport rep;
  const auto b = w.bounds(I, grid);
  rep.m_I = b.m;
  rep.M_I = b.M;
  int levels = 1;
  while ((std::size_t{1} << levels) < grid && levels < 30) ++levels;
  rep.bv_local = w.local_variation(I, levels);
  rep.bv_refinement_delta = std::abs(w.local_variation(I, levels + 1) - rep.bv_local);

  if (!(eps > 0.0)) eps = 1e-3 * ((b.M > b.m) ? (b.M - b.m) : b.M);
  std::vector<std::pair<double, std::function<double(double)>>> fam;
  for (int k = 1; k <= ladder_depth; ++k) {
    const double x = std::ldexp(1.0, -k);
    fam.emplace_back(x, [w, x](double y) { return w(y + x) - w(y); });
  }
  rep.measure_continuity = convergence_in_measure(fam, [](double) { return 0.0; }, I, eps, grid);
  bool decreasing = true;
  for (std::size_t i = 1; i < rep.measure_continuity.size(); ++i)
    if (rep.measure_continuity[i].fraction > rep.measure_continuity[i - 1].fraction + rep.measure_continuity[i].stability_delta + 1e-12)
      decreasing = false;
  const bool bv_ok = std::isfinite(rep.bv_local) && rep.bv_refinement_delta <= 1e-3 * std::max(1.0, rep.bv_local);
  rep.passed = rep.m_I > 0.0 && std::isfinite(rep.M_I) && bv_ok && decreasing &&
               rep.measure_continuity.back().fraction <= 1e-2;
  return rep;
}

struct VariationBoundReport {
  double lhs = 0.0;
  double rhs = 0.0;
  double m = 0.0;
  double M = 0.0;
  bool passed = false;
};

/// V_I g_x against V_{I+x} w / m + M V_I w / m^2, where m and M bound w on
/// the hull of I and I + x.
inline VariationBoundReport variation_bound_check(const Weight& w, double x, const Interval& I, int levels = 16,
                                                  double tol = 1e-9) {
  if (!I.is_compact()) throw std::invalid_argument("variation_bound_check: need a compact interval");
  VariationBoundReport rep;
  const Interval hull(std::min(I.lo(), I.lo() + x), std::max(I.hi(), I.hi() + x));
  const auto b = w.bounds(hull, std::size_t{1} << std::min(levels, 20));
  rep.m = b.m;
  rep.M = b.M;
  rep.lhs = weight_ratio(w, x).variation(I, levels);
  const double v_shift = w.local_variation(I.shifted(x), levels), v = w.local_variation(I, levels);
  rep.rhs = v_shift / b.m + b.M * v / (b.m * b.m);
  rep.passed = rep.lhs <= rep.rhs + tol;
  return rep;
}

// ---------------------------------------------------------------------------
// Weighted norms

namespace detail {

// int over (-inf, lo] or [hi, inf) of h, with a check that dyadic blocks decay
inline double weighted_tail(const std::function<double(double)>& h, double anchor, int dir, double tol, const std::string& label) {
  const double scale = std::max(1.0, std::abs(anchor));
  std::vector<double> blocks;
  double a = anchor;
  for (int k = 0; k < 8; ++k) {
    const double b = anchor + dir * scale * (std::ldexp(1.0, k + 1) - 1.0);
    blocks.push_back(quad::integrate(h, std::min(a, b), std::max(a, b), tol, 30).value);
    a = b;
  }
  if (std::abs(blocks.front()) > tol && std::abs(blocks.back()) > 0.5 * std::abs(blocks.front()))
    throw NonIntegrableProduct("product '" + label + "' does not decay at " + (dir > 0 ? "+inf" : "-inf"));
  const double inf = std::numeric_limits<double>::infinity();
  const auto r = dir > 0 ? quad::integrate(h, anchor, inf, tol, 30) : quad::integrate(h, -inf, anchor, tol, 30);
  if (!std::isfinite(r.value)) throw NonIntegrableProduct("product '" + label + "' has a divergent tail");
  return r.value;
}

}  // namespace detail

/// Primitive of s -> f(s) w(s + shift). Step signals integrate the weight
/// exactly; constant weights scale the given primitive; anything else is
/// built by quadrature on the signal's window with integrated tails.
inline Integrand weighted_product(const Signal& f, const Weight& w, double shift = 0.0, double tol = 1e-12,
                                  const Integrand* as_integrand = nullptr) {
  Integrand out;
  out.label = f.label + "*" + w.name();
  out.pointwise = [f, w, shift](double y) { return f(y) * w(y + shift); };

  if (w.constant() && as_integrand) {
    out.primitive = as_integrand->primitive.scaled(*w.constant());
    out.steps = as_integrand->steps;
    if (out.steps)
      for (double& lv : out.steps->levels) lv *= *w.constant();
    out.l1 = as_integrand->l1;
    return out;
  }

  std::vector<double> kinks = f.kinks;
  for (double j : w.jumps()) kinks.push_back(j - shift);
  kinks = search::merge_nodes(std::move(kinks));

  if (f.steps) {
    const Steps s = *f.steps;
    auto piece_integral = [s, w, shift](double a, double b) {
      // int_a^b f(u) w(u + shift) du, a <= b
      double total = 0.0, lo = a;
      for (std::size_t i = 0; i <= s.edges.size() && lo < b; ++i) {
        const double hi = (i < s.edges.size()) ? std::min(b, s.edges[i]) : b;
        if (hi > lo && s.levels[i] != 0.0) total += s.levels[i] * w.integral(lo + shift, hi + shift);
        if (i < s.edges.size()) lo = std::max(lo, s.edges[i]);
      }
      return total;
    };
    const double ninf = -std::numeric_limits<double>::infinity(), pinf = std::numeric_limits<double>::infinity();
    const double total = piece_integral(ninf, pinf);
    const double left_probe = s.edges.empty() ? 0.0 : s.edges.front();
    if (!std::isfinite(piece_integral(ninf, left_probe)) || !std::isfinite(total))
      throw NonIntegrableProduct("product '" + out.label + "' has no primitive with finite limits");
    Primitive::ClosedForm cf;
    cf.F = [piece_integral](double t) { return piece_integral(-std::numeric_limits<double>::infinity(), t); };
    cf.limit_neg = 0.0;
    cf.limit_pos = total;
    double lo = kinks.empty() ? -1.0 : kinks.front(), hi = kinks.empty() ? 1.0 : kinks.back();
    if (!(lo < hi)) { lo -= 1.0; hi += 1.0; }
    cf.window = Interval(lo, hi);
    const bool compact = s.levels.front() == 0.0 && s.levels.back() == 0.0;
    cf.constant_outside = compact;
    cf.kinks = kinks;
    cf.derivative = out.pointwise;
    out.primitive = Primitive::closed_form(std::move(cf));
    out.l1 = compact ? L1Status::yes : L1Status::unknown;
    return out;
  }

  auto h = [f, w, shift](double y) { return f(y) * w(y + shift); };
  Interval core = f.support;
  if (!core.is_compact()) {
    const Interval win = f.window ? *f.window : Interval(-64.0, 64.0);
    core = Interval(f.support.a.is_finite() ? f.support.lo() : win.lo(), f.support.b.is_finite() ? f.support.hi() : win.hi());
  }
  BuildOptions opt;
  opt.kinks = kinks;
  if (!f.support.a.is_finite() || !f.support.b.is_finite()) {
    opt.tail = TailMode::declared;
    if (!f.support.a.is_finite()) opt.left_mass = detail::weighted_tail(h, core.lo(), -1, tol, out.label);
    if (!f.support.b.is_finite()) opt.right_mass = detail::weighted_tail(h, core.hi(), +1, tol, out.label);
  }
  try {
    out.primitive = build_primitive_from_pointwise(h, core, tol * 1e2, opt);
  } catch (const ToleranceNotMet& e) {
    throw NonIntegrableProduct(std::string("product '") + out.label + "': " + e.what());
  }
  out.l1 = f.support.is_compact() ? L1Status::yes : L1Status::unknown;
  return out;
}

inline Integrand weighted_product(const Integrand& f, const Weight& w, double shift = 0.0, double tol = 1e-12) {
  return weighted_product(as_signal(f), w, shift, tol, &f);
}

/// ||f w||.
inline double weighted_norm(const Signal& f, const Weight& w) { return alexiewicz_norm(weighted_product(f, w)); }
inline double weighted_norm(const Integrand& f, const Weight& w) { return alexiewicz_norm(weighted_product(f, w)); }

struct WeightedGap {
  double gap = 0.0;    // ||(tau_x f - f) w||
  double bound = 0.0;  // 2 sup |G(. - x) - G| + osc C
};

namespace detail {

inline search::Extrema extrema_on(const std::function<double(double)>& q, std::vector<double> nodes, double lim_neg, double lim_pos) {
  search::Extrema ex = search::find_extrema(q, search::merge_nodes(std::move(nodes)), 4, 8);
  ex.offer(-std::numeric_limits<double>::infinity(), lim_neg);
  ex.offer(std::numeric_limits<double>::infinity(), lim_pos);
  return ex;
}

inline std::vector<double> gap_nodes(const Primitive& G, const Primitive& Gx, double x, std::size_t cells) {
  std::vector<double> n = G.search_nodes(cells);
  for (double t : Gx.search_nodes(cells)) n.push_back(t + x);
  return n;
}

}  // namespace detail

/// ||(tau_x f - f) w|| as the oscillation of Q(t) = G_x(t - x) - G(t), where
/// G is the primitive of f w and G_x that of s -> f(s) w(s + x). Q splits as
/// [G(t - x) - G(t)] + C(t - x) with C = G_x - G, which gives the bound.
inline WeightedGap weighted_gap(const Signal& f, const Weight& w, double x, const Integrand& G, const Integrand* as_integrand = nullptr,
                                std::size_t cells = 1024) {
  if (x == 0.0) return {};
  const Integrand Gx = weighted_product(f, w, x, 1e-12, as_integrand);
  const Primitive& P = G.primitive;
  const Primitive& Px = Gx.primitive;
  const auto nodes = detail::gap_nodes(P, Px, x, cells);
  auto Q = [&](double t) { return Px(t - x) - P(t); };
  const auto q = detail::extrema_on(Q, nodes, 0.0, Px.limit_pos() - P.limit_pos());
  auto D = [&](double t) { return P(t - x) - P(t); };
  const auto d = detail::extrema_on(D, nodes, 0.0, 0.0);
  auto C = [&](double s) { return Px(s) - P(s); };
  std::vector<double> cn = P.search_nodes(cells);
  for (double t : Px.search_nodes(cells)) cn.push_back(t);
  const auto c = detail::extrema_on(C, cn, 0.0, Px.limit_pos() - P.limit_pos());
  return {q.oscillation(), 2.0 * d.sup_abs() + c.oscillation()};
}

inline WeightedGap weighted_gap(const Signal& f, const Weight& w, double x) {
  return weighted_gap(f, w, x, weighted_product(f, w));
}

/// Weighted gap per shift with the decomposition bound as upper bound.
inline SweepReport weighted_gap_sweep(const Signal& f, const Weight& w, const std::vector<double>& xs, const SweepOptions& opt = {},
                                      const Integrand* as_integrand = nullptr) {
  if (xs.empty()) throw std::invalid_argument("weighted_gap_sweep: empty ladder");
  const Integrand G = weighted_product(f, w, 0.0, 1e-12, as_integrand);
  std::vector<GapReport> rows;
  for (double x : xs) {
    GapReport r;
    r.x = x;
    if (w.constant() && as_integrand) {
      // g_x = 1: the plain gap of the scaled integrand
      const auto ex = translation_difference_extrema(G, x);
      r.gap = ex.oscillation();
      r.bound_upper = 2.0 * ex.sup_abs();
    } else {
      const WeightedGap g = weighted_gap(f, w, x, G, as_integrand);
      r.gap = g.gap;
      r.bound_upper = g.bound;
    }
    r.passed = within_bounds(r.gap, r.bound_lower, r.bound_upper, opt.tol);
    rows.push_back(r);
  }
  return summarize_sweep(std::move(rows), opt);
}

inline SweepReport weighted_gap_sweep(const Integrand& f, const Weight& w, const std::vector<double>& xs, const SweepOptions& opt = {}) {
  return weighted_gap_sweep(as_signal(f), w, xs, opt, &f);
}

// ---------------------------------------------------------------------------
// Uniform bound lemma

struct LemmaReport {
  double bound = 0.0;              // M + 1 + sup |g|
  double max_abs = 0.0;            // largest sampled |g_n|
  double max_variation = 0.0;
  double final_measure_fraction = 0.0;  // share of E where |g_n - g| > 1e-2, last n
  bool witnessed = false;
};

/// Samples each g_n on E, checks its variation budget, and compares every
/// sampled |g_n| with M + 1 + sup |g|.
inline LemmaReport uniform_bound_lemma_check(const std::vector<RealFunction>& g_seq, const Interval& E, const RealFunction& g_limit,
                                             double M, std::size_t grid = 4096, double tol = 1e-9) {
  if (!E.is_compact() || !(E.length() > 0.0)) throw std::invalid_argument("uniform_bound_lemma_check: E needs positive length");
  int levels = 1;
  while ((std::size_t{1} << levels) < grid && levels < 30) ++levels;
  LemmaReport rep;
  double sup_g = 0.0;
  for (double y : search::refine_nodes(E.lo(), E.hi(), grid, g_limit.kinks)) sup_g = std::max(sup_g, std::abs(g_limit(y)));
  rep.bound = M + 1.0 + sup_g;
  rep.witnessed = true;
  for (std::size_t n = 0; n < g_seq.size(); ++n) {
    const RealFunction& g = g_seq[n];
    std::vector<double> jumps = g.kinks;
    std::sort(jumps.begin(), jumps.end());
    const double v = Weight::jump_aware_variation(g.eval, jumps, E, levels);
    rep.max_variation = std::max(rep.max_variation, v);
    if (v > M + tol)
      throw HypothesisViolated("g_" + std::to_string(n + 1) + " has variation " + std::to_string(v) + " above M = " + std::to_string(M));
    for (double y : search::refine_nodes(E.lo(), E.hi(), grid, g.kinks)) {
      const double a = std::abs(g(y));
      rep.max_abs = std::max(rep.max_abs, a);
      if (a > rep.bound + tol) rep.witnessed = false;
    }
  }
  if (!g_seq.empty()) {
    const auto est = convergence_in_measure({{0.0, g_seq.back().eval}}, g_limit.eval, E, 1e-2, grid);
    rep.final_measure_fraction = est.front().fraction;
  }
  return rep;
}

}  // namespace alexnorm
