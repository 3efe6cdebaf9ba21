#pragma once

#include "alexnorm/errors.hpp"
#include "alexnorm/extended_real.hpp"
#include "alexnorm/quadrature.hpp"
#include "alexnorm/search.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <memory>
#include <numbers>
#include <optional>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

namespace alexnorm {

/// A pointwise real function together with the hints the samplers need:
/// points where smoothness may fail, known limits at +-inf, and a compact
/// window outside of which nothing interesting happens.
struct RealFunction {
  std::function<double(double)> eval;
  std::vector<double> kinks;
  std::optional<double> limit_neg;
  std::optional<double> limit_pos;
  std::optional<Interval> window;

  double operator()(double y) const { return eval(y); }
  double operator()(ExtendedReal y) const {
    if (y.is_neg_inf()) return limit_neg ? *limit_neg : throw std::domain_error("RealFunction: no limit at -inf");
    if (y.is_pos_inf()) return limit_pos ? *limit_pos : throw std::domain_error("RealFunction: no limit at +inf");
    return eval(y.value());
  }
};

/// Right-continuous step function: levels[0] on (-inf, edges[0]), levels[i]
/// on [edges[i-1], edges[i]), levels.back() on [edges.back(), inf).
struct Steps {
  std::vector<double> edges;
  std::vector<double> levels;

  Steps() = default;
  Steps(std::vector<double> e, std::vector<double> l) : edges(std::move(e)), levels(std::move(l)) {
    if (levels.size() != edges.size() + 1) throw std::invalid_argument("Steps: need edges+1 levels");
    for (std::size_t i = 1; i < edges.size(); ++i)
      if (!(edges[i - 1] < edges[i])) throw std::invalid_argument("Steps: edges must increase");
  }

  double operator()(double y) const {
    const auto it = std::upper_bound(edges.begin(), edges.end(), y);
    return levels[static_cast<std::size_t>(it - edges.begin())];
  }
  Steps shifted(double x) const {
    Steps s = *this;
    for (double& e : s.edges) e += x;
    return s;
  }
};

namespace detail {

// Cubic Hermite pieces with one-sided derivatives at each node, plus the
// cumulative integral of F at every node. `linear` marks tables whose pieces
// are straight lines.
struct TableData {
  std::vector<double> x, v, dl, dr, cum;
  bool linear = true;

  std::size_t piece(double y) const {
    const auto it = std::upper_bound(x.begin(), x.end(), y);
    std::size_t i = static_cast<std::size_t>(it - x.begin());
    i = (i == 0) ? 0 : i - 1;
    return std::min(i, x.size() - 2);
  }

  double eval_piece(std::size_t i, double y) const {
    const double h = x[i + 1] - x[i], t = (y - x[i]) / h;
    if (linear) return v[i] + (v[i + 1] - v[i]) * t;
    const double t2 = t * t, t3 = t2 * t;
    return v[i] * (2 * t3 - 3 * t2 + 1) + h * dr[i] * (t3 - 2 * t2 + t) + v[i + 1] * (-2 * t3 + 3 * t2) +
           h * dl[i + 1] * (t3 - t2);
  }

  double deriv_piece(std::size_t i, double y) const {
    const double h = x[i + 1] - x[i], t = (y - x[i]) / h;
    if (linear) return (v[i + 1] - v[i]) / h;
    const double t2 = t * t;
    return (v[i] * (6 * t2 - 6 * t) + v[i + 1] * (-6 * t2 + 6 * t)) / h + dr[i] * (3 * t2 - 4 * t + 1) +
           dl[i + 1] * (3 * t2 - 2 * t);
  }

  // integral of the piece polynomial from x[i] to y
  double integral_piece(std::size_t i, double y) const {
    const double h = x[i + 1] - x[i], t = (y - x[i]) / h;
    if (linear) return h * (v[i] * t + 0.5 * (v[i + 1] - v[i]) * t * t);
    const double t2 = t * t, t3 = t2 * t, t4 = t3 * t;
    return h * (v[i] * (0.5 * t4 - t3 + t) + h * dr[i] * (0.25 * t4 - 2.0 / 3.0 * t3 + 0.5 * t2) +
                v[i + 1] * (-0.5 * t4 + t3) + h * dl[i + 1] * (0.25 * t4 - t3 / 3.0));
  }

  double eval(double y) const {
    if (x.size() == 1 || y <= x.front()) return v.front();
    if (y >= x.back()) return v.back();
    const std::size_t i = piece(y);
    if (y == x[i]) return v[i];
    return eval_piece(i, y);
  }

  double right_derivative(double y) const {
    if (x.size() == 1 || y < x.front() || y >= x.back()) return 0.0;
    return deriv_piece(piece(y), y);
  }

  // int_{x0}^{y} F
  double antiderivative(double y) const {
    if (x.size() == 1 || y <= x.front()) return v.front() * (y - x.front());
    if (y >= x.back()) return cum.back() + v.back() * (y - x.back());
    const std::size_t i = piece(y);
    return cum[i] + integral_piece(i, y);
  }

  void finish() {
    cum.assign(x.size(), 0.0);
    for (std::size_t i = 0; i + 1 < x.size(); ++i) cum[i + 1] = cum[i] + integral_piece(i, x[i + 1]);
  }

  // Interior stationary points of the cubic pieces.
  std::vector<double> stationary_points() const {
    std::vector<double> out;
    if (linear) return out;
    for (std::size_t i = 0; i + 1 < x.size(); ++i) {
      const double h = x[i + 1] - x[i];
      const double d0 = dr[i], d1 = dl[i + 1], dm = deriv_piece(i, x[i] + 0.5 * h);
      const double A = 2.0 * (d1 + d0 - 2.0 * dm), C = d0, B = d1 - C - A;
      auto take = [&](double t) {
        if (t > 0.0 && t < 1.0) out.push_back(x[i] + t * h);
      };
      if (std::abs(A) < 1e-300) {
        if (B != 0.0) take(-C / B);
        continue;
      }
      const double disc = B * B - 4 * A * C;
      if (disc < 0.0) continue;
      const double sq = std::sqrt(disc);
      const double q = -0.5 * (B + std::copysign(sq, B));
      if (q != 0.0) {
        take(q / A);
        take(C / q);
      } else {
        take(0.0);
      }
    }
    return out;
  }
};

inline void check_nodes(const std::vector<double>& x) {
  if (x.empty()) throw std::invalid_argument("table primitive: no breakpoints");
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (!std::isfinite(x[i])) throw std::invalid_argument("table primitive: non-finite breakpoint");
    if (i > 0 && !(x[i - 1] < x[i])) throw std::invalid_argument("table primitive: breakpoints must strictly increase");
  }
}

}  // namespace detail

/// A continuous function F on the extended real line with finite limits at
/// +-inf. Integrands are carried by their primitives (F' = f), so every
/// integral is a difference of two evaluations.
class Primitive {
public:
  /// Closed-form primitive. `window` is a compact interval holding all of the
  /// structure the samplers should look at; when `constant_outside` is set F
  /// equals its limits outside the window.
  struct ClosedForm {
    std::function<double(double)> F;
    double limit_neg = 0.0;
    double limit_pos = 0.0;
    Interval window{-1.0, 1.0};
    bool constant_outside = false;
    std::vector<double> kinks;
    std::function<double(double)> derivative;          // optional f
    std::function<double(double, double)> integral;    // optional int_a^b F
  };

  enum class Kind { closed_form, linear_table, cubic_table };

  static Primitive linear(std::vector<double> x, std::vector<double> v) {
    detail::check_nodes(x);
    if (v.size() != x.size()) throw std::invalid_argument("table primitive: breakpoints/values size mismatch");
    auto t = std::make_shared<detail::TableData>();
    t->x = std::move(x);
    t->v = std::move(v);
    const std::size_t n = t->x.size();
    t->dl.assign(n, 0.0);
    t->dr.assign(n, 0.0);
    for (std::size_t i = 0; i + 1 < n; ++i) {
      const double s = (t->v[i + 1] - t->v[i]) / (t->x[i + 1] - t->x[i]);
      t->dr[i] = s;
      t->dl[i + 1] = s;
    }
    t->linear = true;
    t->finish();
    return Primitive(std::move(t));
  }

  /// Piecewise cubic Hermite table; dl/dr are the one-sided derivatives
  /// (the integrand's left and right values) at each breakpoint.
  static Primitive cubic(std::vector<double> x, std::vector<double> v, std::vector<double> dl, std::vector<double> dr) {
    detail::check_nodes(x);
    if (v.size() != x.size() || dl.size() != x.size() || dr.size() != x.size())
      throw std::invalid_argument("table primitive: size mismatch");
    auto t = std::make_shared<detail::TableData>();
    t->x = std::move(x);
    t->v = std::move(v);
    t->dl = std::move(dl);
    t->dr = std::move(dr);
    t->dl.front() = 0.0;
    t->dr.back() = 0.0;
    t->linear = false;
    t->finish();
    return Primitive(std::move(t));
  }

  static Primitive closed_form(ClosedForm cf) {
    if (!cf.F) throw std::invalid_argument("closed-form primitive: missing evaluator");
    if (!cf.window.is_compact()) throw std::invalid_argument("closed-form primitive: window must be compact");
    if (!std::isfinite(cf.limit_neg) || !std::isfinite(cf.limit_pos))
      throw std::invalid_argument("closed-form primitive: limits must be finite");
    std::sort(cf.kinks.begin(), cf.kinks.end());
    return Primitive(std::make_shared<const ClosedForm>(std::move(cf)));
  }

  static Primitive zero() { return linear({0.0}, {0.0}); }

  Kind kind() const {
    if (closed_) return Kind::closed_form;
    return table_->linear ? Kind::linear_table : Kind::cubic_table;
  }
  bool is_table() const { return table_ != nullptr; }
  const detail::TableData* table() const { return table_.get(); }
  const ClosedForm* closed() const { return closed_.get(); }

  double operator()(double y) const {
    if (table_) return table_->eval(y - shift_) * scale_;
    return closed_->F(y - shift_) * scale_;
  }
  double operator()(ExtendedReal y) const {
    if (y.is_neg_inf()) return limit_neg();
    if (y.is_pos_inf()) return limit_pos();
    return (*this)(y.value());
  }

  double limit_neg() const { return (table_ ? table_->v.front() : closed_->limit_neg) * scale_; }
  double limit_pos() const { return (table_ ? table_->v.back() : closed_->limit_pos) * scale_; }

  /// True when F equals its limits outside window().
  bool constant_outside() const { return table_ ? true : closed_->constant_outside; }

  Interval window() const {
    if (table_) return {table_->x.front() + shift_, table_->x.back() + shift_};
    return closed_->window.shifted(shift_);
  }

  /// Table nodes, or the declared kinks of a closed form.
  std::vector<double> breakpoints() const {
    std::vector<double> out = table_ ? table_->x : closed_->kinks;
    for (double& y : out) y += shift_;
    return out;
  }

  /// Breakpoints plus the interior stationary points of cubic pieces. On a
  /// table, F is monotone between consecutive critical points.
  std::vector<double> critical_points() const {
    if (!table_) return breakpoints();
    std::vector<double> out = table_->x;
    const auto st = table_->stationary_points();
    out.insert(out.end(), st.begin(), st.end());
    for (double& y : out) y += shift_;
    return search::merge_nodes(std::move(out));
  }

  /// f(y) = F'(y): right derivative on tables, the closed-form derivative when
  /// supplied, otherwise a central difference.
  double derivative(double y) const {
    if (table_) return table_->right_derivative(y - shift_) * scale_;
    if (closed_->derivative) return closed_->derivative(y - shift_) * scale_;
    const double h = 1e-6 * std::max(1.0, std::abs(y));
    return ((*this)(y + h) - (*this)(y - h)) / (2 * h);
  }

  /// int_a^b F(s) ds; exact (up to rounding) on tables.
  double integrate(double a, double b) const {
    if (table_) return (table_->antiderivative(b - shift_) - table_->antiderivative(a - shift_)) * scale_;
    if (closed_->integral) return closed_->integral(a - shift_, b - shift_) * scale_;
    std::vector<double> nodes{a, b};
    for (double k : closed_->kinks) {
      const double kk = k + shift_;
      if (kk > std::min(a, b) && kk < std::max(a, b)) nodes.push_back(kk);
    }
    nodes = search::merge_nodes(std::move(nodes));
    const double tol = 1e-14 * std::max(1.0, std::abs(b - a));
    const auto r = quad::integrate_pieces([this](double s) { return (*this)(s); }, nodes, tol, 30);
    return (a <= b) ? r.value : -r.value;
  }

  /// y -> F(y - x).
  Primitive shifted(double x) const {
    Primitive p = *this;
    p.shift_ += x;
    return p;
  }

  Primitive scaled(double c) const {
    Primitive p = *this;
    p.scale_ *= c;
    return p;
  }

  /// Nodes on which sampling F (one sample per cell, plus polishing) finds its
  /// extrema: the table nodes, or a refined window with geometric tails when
  /// F is not constant outside its window.
  std::vector<double> search_nodes(std::size_t cells = 4096) const {
    if (table_) {
      std::vector<double> out = table_->x;
      for (double& y : out) y += shift_;
      return out;
    }
    const Interval w = window();
    std::vector<double> nodes = search::refine_nodes(w.lo(), w.hi(), cells, breakpoints());
    if (!closed_->constant_outside) {
      const double scale = std::max(w.length(), 1.0) / 8.0;
      for (double t : search::geometric_tail(w.hi(), +1, scale, 48)) nodes.push_back(t);
      for (double t : search::geometric_tail(w.lo(), -1, scale, 48)) nodes.push_back(t);
      nodes = search::merge_nodes(std::move(nodes));
    }
    return nodes;
  }

  /// Samples per search cell: 1 suffices for piecewise-linear tables.
  int samples_per_cell() const { return kind() == Kind::linear_table ? 1 : 4; }

  RealFunction as_function() const {
    RealFunction r;
    r.eval = [p = *this](double y) { return p(y); };
    r.kinks = critical_points();
    r.limit_neg = limit_neg();
    r.limit_pos = limit_pos();
    r.window = window();
    return r;
  }

private:
  explicit Primitive(std::shared_ptr<const detail::TableData> t) : table_(std::move(t)) {}
  explicit Primitive(std::shared_ptr<const ClosedForm> c) : closed_(std::move(c)) {}

  std::shared_ptr<const detail::TableData> table_;
  std::shared_ptr<const ClosedForm> closed_;
  double shift_ = 0.0;
  double scale_ = 1.0;
};

inline double eval_primitive(const Primitive& F, ExtendedReal x) { return F(x); }

/// Whether an integrand is known to be absolutely integrable.
enum class L1Status { yes, no, unknown };

/// An integrable object: a primitive, plus an optional pointwise evaluator.
/// Equality is by primitive; pointwise values are advisory.
struct Integrand {
  Primitive primitive = Primitive::zero();
  std::function<double(double)> pointwise;
  std::string label;
  std::optional<Steps> steps;  // exact piecewise-constant form, when known
  L1Status l1 = L1Status::unknown;

  bool absolutely_integrable() const {
    if (l1 != L1Status::unknown) return l1 == L1Status::yes;
    return primitive.constant_outside();
  }
};

inline double integral(const Integrand& f, const Interval& I) { return f.primitive(I.b) - f.primitive(I.a); }

/// Pointwise function on the line, not necessarily integrable (e.g. f = 1).
/// f vanishes outside `support`.
struct Signal {
  std::function<double(double)> eval;
  std::vector<double> kinks;
  Interval support = Interval::whole_line();
  std::optional<Steps> steps;
  std::string label;
  std::optional<Interval> window;  // where the structure lives when support is unbounded

  double operator()(double y) const { return eval(y); }
};

inline Signal signal_from_steps(Steps s, std::string label = {}) {
  Signal out;
  out.kinks = s.edges;
  const double lo = (s.levels.front() == 0.0 && !s.edges.empty()) ? s.edges.front() : -std::numeric_limits<double>::infinity();
  const double hi = (s.levels.back() == 0.0 && !s.edges.empty()) ? s.edges.back() : std::numeric_limits<double>::infinity();
  out.support = Interval(lo, hi);
  out.eval = [s](double y) { return s(y); };
  out.steps = std::move(s);
  out.label = std::move(label);
  return out;
}

/// Pointwise view of an integrand; requires the evaluator (or steps).
inline Signal as_signal(const Integrand& f) {
  if (f.steps) return signal_from_steps(*f.steps, f.label);
  if (!f.pointwise) throw std::invalid_argument("integrand '" + f.label + "' has no pointwise evaluator");
  Signal s;
  s.eval = f.pointwise;
  s.kinks = f.primitive.breakpoints();
  s.support = f.primitive.constant_outside() ? f.primitive.window() : Interval::whole_line();
  s.window = f.primitive.window();
  s.label = f.label;
  return s;
}

/// h * chi_[a,b].
inline Integrand indicator(double a, double b, double height = 1.0) {
  if (!(a < b)) throw std::invalid_argument("indicator: need a < b");
  Integrand f;
  f.primitive = Primitive::linear({a, b}, {0.0, height * (b - a)});
  f.steps = Steps({a, b}, {0.0, height, 0.0});
  f.pointwise = [s = *f.steps](double y) { return s(y); };
  f.l1 = L1Status::yes;
  f.label = "indicator";
  return f;
}

/// Integrand of a step function whose outer levels are zero.
inline Integrand from_steps(const Steps& s, std::string label = "steps") {
  if (s.edges.empty() || s.levels.front() != 0.0 || s.levels.back() != 0.0)
    throw std::invalid_argument("from_steps: outer levels must vanish for an integrable step function");
  std::vector<double> v(s.edges.size(), 0.0);
  for (std::size_t i = 1; i < s.edges.size(); ++i) v[i] = v[i - 1] + s.levels[i] * (s.edges[i] - s.edges[i - 1]);
  Integrand f;
  f.primitive = Primitive::linear(s.edges, std::move(v));
  f.steps = s;
  f.pointwise = [s](double y) { return s(y); };
  f.l1 = L1Status::yes;
  f.label = std::move(label);
  return f;
}

/// Linear combination a*f + b*g of two integrands with table primitives.
inline Integrand combine(const Integrand& f, double a, const Integrand& g, double b) {
  const Primitive& F = f.primitive;
  const Primitive& G = g.primitive;
  if (!F.is_table() || !G.is_table()) throw std::invalid_argument("combine: table primitives only");
  std::vector<double> x = F.breakpoints();
  const auto gx = G.breakpoints();
  x.insert(x.end(), gx.begin(), gx.end());
  x = search::merge_nodes(std::move(x));
  std::vector<double> v(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) v[i] = a * F(x[i]) + b * G(x[i]);
  Integrand out;
  if (F.kind() == Primitive::Kind::linear_table && G.kind() == Primitive::Kind::linear_table) {
    out.primitive = Primitive::linear(std::move(x), std::move(v));
  } else {
    std::vector<double> dl(x.size()), dr(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) {
      dr[i] = a * F.derivative(x[i]) + b * G.derivative(x[i]);
      const double left = std::nextafter(x[i], -std::numeric_limits<double>::infinity());
      dl[i] = a * F.derivative(left) + b * G.derivative(left);
    }
    out.primitive = Primitive::cubic(std::move(x), std::move(v), std::move(dl), std::move(dr));
  }
  if (f.pointwise && g.pointwise)
    out.pointwise = [pf = f.pointwise, pg = g.pointwise, a, b](double y) { return a * pf(y) + b * pg(y); };
  if (f.steps && g.steps) {
    std::vector<double> e = f.steps->edges;
    e.insert(e.end(), g.steps->edges.begin(), g.steps->edges.end());
    e = search::merge_nodes(std::move(e));
    std::vector<double> lv;
    lv.push_back(a * f.steps->levels.front() + b * g.steps->levels.front());
    for (double edge : e) lv.push_back(a * (*f.steps)(edge) + b * (*g.steps)(edge));
    out.steps = Steps(std::move(e), std::move(lv));
  }
  out.l1 = (f.absolutely_integrable() && g.absolutely_integrable()) ? L1Status::yes : L1Status::unknown;
  out.label = f.label + "+" + g.label;
  return out;
}

/// Spot check that a central difference of the primitive matches the
/// pointwise evaluator at the given continuity points.
inline bool derivative_matches(const Integrand& f, const std::vector<double>& points, double tol) {
  if (!f.pointwise) return true;
  for (double y : points) {
    const double h = 1e-5 * std::max(1.0, std::abs(y));
    const double d = (f.primitive(y + h) - f.primitive(y - h)) / (2 * h);
    if (std::abs(d - f.pointwise(y)) > tol) return false;
  }
  return true;
}

/// Integrands are equal when their primitives differ by a constant; checked on
/// the merged critical points of both plus the given probes.
inline bool same_integrable(const Integrand& f, const Integrand& g, double tol = 1e-12, std::vector<double> probes = {}) {
  auto pts = f.primitive.critical_points();
  const auto q = g.primitive.critical_points();
  pts.insert(pts.end(), q.begin(), q.end());
  pts.insert(pts.end(), probes.begin(), probes.end());
  const double c = f.primitive.limit_neg() - g.primitive.limit_neg();
  if (std::abs((f.primitive.limit_pos() - g.primitive.limit_pos()) - c) > tol) return false;
  for (double y : pts)
    if (std::abs((f.primitive(y) - g.primitive(y)) - c) > tol) return false;
  return true;
}

// ---------------------------------------------------------------------------
// Building primitives from pointwise integrands

enum class TailMode { none, declared, accelerate };

struct BuildOptions {
  std::vector<double> kinks;          // known discontinuities of f
  TailMode tail = TailMode::none;
  double left_mass = 0.0;             // declared int over (-inf, lo)
  double right_mass = 0.0;            // declared int over (hi, inf)
  double tail_step = std::numbers::pi;  // closing-segment length, acceleration stride
  int tail_cells = 64;                // strides summed before acceleration
  double tail_tol = 1e-8;             // agreement required of the accelerated limit
  std::size_t initial_panels = 16;
  std::size_t max_panels = std::size_t{1} << 20;
};

namespace detail {

/// Wynn's epsilon algorithm on a sequence of partial sums; returns the
/// highest even-column estimate.
inline double wynn_epsilon(const std::vector<double>& s) {
  const std::size_t n = s.size();
  if (n < 3) return s.empty() ? 0.0 : s.back();
  std::vector<double> prev(n + 1, 0.0), cur(s.begin(), s.end());
  double best = s.back();
  for (std::size_t col = 1; cur.size() > 1; ++col) {
    std::vector<double> next(cur.size() - 1);
    for (std::size_t i = 0; i + 1 < cur.size(); ++i) {
      const double d = cur[i + 1] - cur[i];
      next[i] = prev[i + 1] + (d != 0.0 ? 1.0 / d : 1e300);
    }
    prev = std::move(cur);
    cur = std::move(next);
    if (col % 2 == 0 && !cur.empty() && std::isfinite(cur.back())) best = cur.back();
  }
  return best;
}

struct Panels {
  std::vector<double> x, v, dl, dr;
};

// Adaptive panels on [lo, hi]; v starts at `start`.
inline Panels build_panels(const std::function<double(double)>& f, double lo, double hi, double start, double tol,
                           const BuildOptions& opt) {
  constexpr double inf = std::numeric_limits<double>::infinity();
  auto right_value = [&](double y) { return f(std::nextafter(y, inf)); };
  auto left_value = [&](double y) { return f(std::nextafter(y, -inf)); };

  std::vector<double> seeds = search::refine_nodes(lo, hi, opt.initial_panels, opt.kinks);
  struct Done { double a, b, integral; };
  std::vector<Done> done;
  std::vector<std::pair<double, double>> stack;
  for (std::size_t i = seeds.size() - 1; i > 0; --i) stack.emplace_back(seeds[i - 1], seeds[i]);

  std::size_t count = 0;
  while (!stack.empty()) {
    const auto [a, b] = stack.back();
    stack.pop_back();
    if (++count > opt.max_panels) throw ToleranceNotMet("panel budget exhausted before reaching tolerance");
    const quad::Result whole = quad::gk15(f, a, b);
    const double m = 0.5 * (a + b), h = b - a;
    bool ok = whole.error <= tol;
    if (ok) {
      // the cubic Hermite interpolant must also reproduce F at the midpoint
      const quad::Result half = quad::gk15(f, a, m);
      const double interp = 0.5 * whole.value + h * (right_value(a) - left_value(b)) / 8.0;
      ok = std::abs(interp - half.value) <= tol && half.error <= tol;
    }
    const bool too_small = !(a < m && m < b) || h <= 64 * std::numeric_limits<double>::epsilon() * std::max(1.0, std::abs(a));
    if (!std::isfinite(whole.value)) throw ToleranceNotMet("integrand is not finite on [" + std::to_string(a) + "," + std::to_string(b) + "]");
    if (ok || too_small) {
      done.push_back({a, b, whole.value});
    } else {
      stack.emplace_back(m, b);
      stack.emplace_back(a, m);
    }
  }

  Panels p;
  p.x.push_back(lo);
  p.v.push_back(start);
  double acc = start;
  for (const Done& d : done) {
    acc += d.integral;
    p.x.push_back(d.b);
    p.v.push_back(acc);
  }
  const std::size_t n = p.x.size();
  p.dl.resize(n);
  p.dr.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    p.dr[i] = (i + 1 < n) ? right_value(p.x[i]) : 0.0;
    p.dl[i] = (i > 0) ? left_value(p.x[i]) : 0.0;
  }
  return p;
}

}  // namespace detail

/// Builds a piecewise-cubic primitive F(y) = int_{-inf}^y f of a pointwise
/// integrand. Panels are bisected until both the Gauss-Kronrod error and the
/// Hermite midpoint reconstruction error are below `tol`.
///
/// Infinite support ends need a tail mode: `declared` takes the tail masses
/// from the options, `accelerate` sums `tail_cells` strides of length
/// `tail_step` and extrapolates the partial integrals with Wynn's epsilon
/// algorithm. Either way the tail is closed by a linear segment of length
/// `tail_step`, so the result is an estimate there.
inline Primitive build_primitive_from_pointwise(const std::function<double(double)>& f, const Interval& support,
                                                double tol, const BuildOptions& opt = {}) {
  if (!(tol > 0.0)) throw std::invalid_argument("build_primitive_from_pointwise: tol must be positive");
  double lo = support.lo(), hi = support.hi();
  const bool left_inf = !support.a.is_finite(), right_inf = !support.b.is_finite();
  if ((left_inf || right_inf) && opt.tail == TailMode::none)
    throw NonConvergentTail("infinite support needs a declared or accelerated tail");

  double left_mass = 0.0, right_mass = 0.0;
  if (left_inf) lo = right_inf ? -opt.tail_step * opt.tail_cells / 2 : hi - opt.tail_step * opt.tail_cells;
  if (right_inf) hi = left_inf ? opt.tail_step * opt.tail_cells / 2 : lo + opt.tail_step * opt.tail_cells;
  if (opt.tail == TailMode::declared) {
    left_mass = opt.left_mass;
    right_mass = opt.right_mass;
  }

  auto accelerate = [&](double anchor, int dir) {
    // partial integrals over strides moving away from anchor
    std::vector<double> sums;
    double acc = 0.0;
    for (int k = 0; k < opt.tail_cells; ++k) {
      const double a = anchor + dir * opt.tail_step * k, b = anchor + dir * opt.tail_step * (k + 1);
      const auto r = quad::integrate(f, std::min(a, b), std::max(a, b), 1e-3 * opt.tail_tol, 30);
      acc += r.value;
      sums.push_back(acc);
    }
    const std::size_t half = sums.size() / 2, three_q = 3 * sums.size() / 4;
    const double e1 = detail::wynn_epsilon({sums.begin(), sums.begin() + static_cast<std::ptrdiff_t>(half)});
    const double e2 = detail::wynn_epsilon({sums.begin(), sums.begin() + static_cast<std::ptrdiff_t>(three_q)});
    const double e3 = detail::wynn_epsilon(sums);
    const double spread = std::max(std::abs(e3 - e2), std::abs(e3 - e1));
    if (!std::isfinite(e3) || spread > opt.tail_tol * std::max(1.0, std::abs(e3)))
      throw NonConvergentTail("accelerated tail did not stabilise (spread " + std::to_string(spread) + ")");
    return e3;
  };

  double right_extra = right_mass;
  if (opt.tail == TailMode::accelerate) {
    if (left_inf && right_inf) throw NonConvergentTail("acceleration supports one infinite end at a time");
  }

  detail::Panels p = detail::build_panels(f, lo, hi, 0.0, tol, opt);
  const double covered = p.v.back();
  if (opt.tail == TailMode::accelerate && right_inf) right_extra = accelerate(lo, +1) - covered;
  if (opt.tail == TailMode::accelerate && left_inf) left_mass = accelerate(hi, -1) - covered;
  for (double& v : p.v) v += left_mass;

  if (left_mass != 0.0 || left_inf) {
    const double slope = left_mass / opt.tail_step;
    p.x.insert(p.x.begin(), lo - opt.tail_step);
    p.v.insert(p.v.begin(), 0.0);
    p.dl.insert(p.dl.begin(), 0.0);
    p.dr.insert(p.dr.begin(), slope);
    p.dl[1] = slope;
  }
  if (right_extra != 0.0 || right_inf) {
    const double slope = right_extra / opt.tail_step;
    p.dr.back() = slope;
    p.x.push_back(hi + opt.tail_step);
    p.v.push_back(p.v.back() + right_extra);
    p.dl.push_back(slope);
    p.dr.push_back(0.0);
  }
  return Primitive::cubic(std::move(p.x), std::move(p.v), std::move(p.dl), std::move(p.dr));
}

inline Integrand integrand_from_pointwise(std::function<double(double)> f, const Interval& support, double tol,
                                          const BuildOptions& opt = {}, std::string label = "pointwise") {
  Integrand out;
  out.primitive = build_primitive_from_pointwise(f, support, tol, opt);
  out.pointwise = [f, support](double y) { return support.contains(y) ? f(y) : 0.0; };
  out.label = std::move(label);
  out.l1 = (support.is_compact()) ? L1Status::yes : L1Status::unknown;
  return out;
}

}  // namespace alexnorm
