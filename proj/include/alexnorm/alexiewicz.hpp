#pragma once

#include "alexnorm/primitive.hpp"
#include "alexnorm/variation.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <optional>
#include <vector>

namespace alexnorm {

/// One row of a convergence table: the shift (or other ladder parameter),
/// the measured gap, optional bounds and the verdict.
struct GapReport {
  double x = 0.0;
  double gap = 0.0;
  std::optional<double> bound_lower;
  std::optional<double> bound_upper;
  bool passed = true;
  bool informational = false;  // outside the range where a verdict is claimed
};

inline bool within_bounds(double gap, std::optional<double> lower, std::optional<double> upper, double tol) {
  if (lower && gap < *lower - tol) return false;
  if (upper && gap > *upper + tol) return false;
  return true;
}

/// Rows ordered by |x| descending, plus the convergence verdict: gaps
/// nonincreasing down the ladder and the last one below the threshold.
struct SweepReport {
  std::vector<GapReport> rows;
  bool monotone = true;
  bool converged = false;
  double final_gap = 0.0;

  bool all_rows_passed() const {
    return std::all_of(rows.begin(), rows.end(), [](const GapReport& r) { return r.passed || r.informational; });
  }
};

struct SweepOptions {
  double tol = 1e-9;          // slack for bound comparisons and monotonicity
  double threshold = 1e-2;    // final gap must fall below this
};

/// With `by_abs` the rows are ordered by |x| descending first; otherwise the
/// given ladder order is kept.
inline SweepReport summarize_sweep(std::vector<GapReport> rows, const SweepOptions& opt, bool by_abs = true) {
  if (by_abs)
    std::stable_sort(rows.begin(), rows.end(), [](const GapReport& a, const GapReport& b) { return std::abs(a.x) > std::abs(b.x); });
  SweepReport rep;
  rep.rows = std::move(rows);
  for (std::size_t i = 1; i < rep.rows.size(); ++i)
    if (rep.rows[i].gap > rep.rows[i - 1].gap + opt.tol) rep.monotone = false;
  rep.final_gap = rep.rows.empty() ? 0.0 : rep.rows.back().gap;
  rep.converged = rep.monotone && rep.final_gap < opt.threshold;
  return rep;
}

// ---------------------------------------------------------------------------
// Norms

/// Extrema of a primitive over the extended line, limits included.
inline search::Extrema primitive_extrema(const Primitive& F) {
  const auto nodes = F.search_nodes();
  search::Extrema ex = search::find_extrema([&F](double y) { return F(y); }, nodes, F.samples_per_cell(),
                                            F.kind() == Primitive::Kind::linear_table ? 0 : 8);
  ex.offer(-std::numeric_limits<double>::infinity(), F.limit_neg());
  ex.offer(std::numeric_limits<double>::infinity(), F.limit_pos());
  return ex;
}

/// ||f|| = sup over intervals of |int_I f| = max F - min F over the extended
/// line. Exact for piecewise-linear primitives.
inline double alexiewicz_norm(const Integrand& f) { return primitive_extrema(f.primitive).oscillation(); }

/// The equivalent norm sup_x |int_{-inf}^x f|.
inline double alexiewicz_norm_halfline(const Integrand& f) {
  const auto ex = primitive_extrema(f.primitive);
  const double base = f.primitive.limit_neg();
  return std::max(std::abs(ex.max - base), std::abs(ex.min - base));
}

/// tau_x f(y) = f(y - x).
inline Integrand translate(const Integrand& f, double x) {
  Integrand g = f;
  g.primitive = f.primitive.shifted(x);
  if (f.pointwise) g.pointwise = [p = f.pointwise, x](double y) { return p(y - x); };
  if (f.steps) g.steps = f.steps->shifted(x);
  return g;
}

namespace detail {

inline std::vector<double> shifted_union(const std::vector<double>& nodes, double x) {
  std::vector<double> out = nodes;
  out.reserve(2 * nodes.size());
  for (double y : nodes) out.push_back(y + x);
  return search::merge_nodes(std::move(out));
}

}  // namespace detail

/// Extrema of H(y) = F(y - x) - F(y) over the extended line (H(+-inf) = 0),
/// sampled on the merged breakpoints of F and its shift.
inline search::Extrema translation_difference_extrema(const Integrand& f, double x) {
  const Primitive& F = f.primitive;
  search::Extrema ex;
  ex.offer(0.0, 0.0);
  if (x == 0.0) return ex;
  const auto nodes = detail::shifted_union(F.search_nodes(), x);
  const bool linear = F.kind() == Primitive::Kind::linear_table;
  ex.merge(search::find_extrema([&F, x](double y) { return F(y - x) - F(y); }, nodes, F.samples_per_cell(),
                                linear ? 0 : 8));
  return ex;
}

/// ||tau_x f - f|| as the oscillation of y -> F(y - x) - F(y).
inline double translation_gap(const Integrand& f, double x) { return translation_difference_extrema(f, x).oscillation(); }

/// Gap per shift, with the triangle bound 2 sup_b |F(b - x) - F(b)| as the
/// upper bound.
inline SweepReport gap_sweep(const Integrand& f, const std::vector<double>& xs, const SweepOptions& opt = {}) {
  if (xs.empty()) throw std::invalid_argument("gap_sweep: empty ladder");
  std::vector<GapReport> rows;
  for (double x : xs) {
    const auto ex = translation_difference_extrema(f, x);
    GapReport r;
    r.x = x;
    r.gap = ex.oscillation();
    r.bound_upper = 2.0 * ex.sup_abs();
    r.passed = within_bounds(r.gap, r.bound_lower, r.bound_upper, opt.tol);
    rows.push_back(r);
  }
  return summarize_sweep(std::move(rows), opt);
}

// ---------------------------------------------------------------------------
// Slow decay construction

/// Target decay psi on (0,1] and its envelopes: psi1 the running supremum,
/// psi2 the step function on the 1/n mesh, psi3 the piecewise-linear
/// interpolant sitting one mesh level above psi2. Suprema are grid suprema.
class DecaySpec {
public:
  DecaySpec(std::function<double(double)> psi, int n_max, int samples_per_cell = 16)
      : psi_(std::move(psi)), n_max_(n_max), samples_(samples_per_cell) {
    if (n_max_ < 2) throw InvalidSpec("n_max must be >= 2");
    if (!psi_) throw InvalidSpec("psi missing");
    // deep part (0, 1/(n_max+1)] on a geometric ladder
    double deep = 0.0, smallest = 0.0;
    for (double t = 1.0 / (n_max_ + 1); t > 1e-300; t *= 0.5) {
      for (double frac : {1.0, 0.85, 0.7, 0.6}) {
        const double v = checked(t * frac);
        deep = std::max(deep, v);
      }
      smallest = checked(t * 0.5);
    }
    mesh_.assign(static_cast<std::size_t>(n_max_) + 2, 0.0);
    mesh_[static_cast<std::size_t>(n_max_) + 1] = std::max(deep, checked(1.0 / (n_max_ + 1)));
    for (int n = n_max_; n >= 1; --n)
      mesh_[static_cast<std::size_t>(n)] = std::max(mesh_[static_cast<std::size_t>(n) + 1], cell_sup(n, 1.0 / n));
    deep_sup_ = deep;
    if (!(smallest <= 1e-2 * mesh_[1])) throw InvalidSpec("psi does not tend to 0 at 0+");
  }

  int n_max() const { return n_max_; }
  double psi(double x) const { return psi_(x); }

  /// psi1(1/n).
  double psi1_mesh(int n) const {
    if (n >= 1 && n <= n_max_ + 1) return mesh_[static_cast<std::size_t>(n)];
    return psi1(1.0 / n);
  }

  double psi1(double x) const {
    if (!(x > 0.0 && x <= 1.0)) throw std::domain_error("psi1: x outside (0,1]");
    const int n = cell_of(x);
    if (n > n_max_) {
      double s = 0.0;
      for (double t = x; t > 1e-300; t *= 0.5)
        for (double frac : {1.0, 0.85, 0.7, 0.6}) s = std::max(s, psi_(t * frac));
      return s;
    }
    return std::max(mesh_[static_cast<std::size_t>(n) + 1], cell_sup(n, x));
  }

  /// psi1(1/n) on (1/(n+1), 1/n].
  double psi2(double x) const { return psi1_mesh(cell_of(x)); }

  double psi3(double x) const {
    if (!(x > 0.0 && x <= 1.0)) throw std::domain_error("psi3: x outside (0,1]");
    if (x > 0.5) return psi1_mesh(1);
    int n = cell_of(x);
    if (x == 1.0 / n && n > 2) {
      // a mesh point belongs to both adjacent pieces; use the exact node value
      return psi1_mesh(n - 1);
    }
    if (n < 2) n = 2;
    const double lo = psi1_mesh(n), hi = psi1_mesh(n - 1);
    return (hi - lo) * n * (n + 1.0) * (x - 1.0 / (n + 1)) + lo;
  }

  /// Index n with x in (1/(n+1), 1/n].
  static int cell_of(double x) {
    int n = static_cast<int>(std::floor(1.0 / x));
    if (n < 1) n = 1;
    while (n > 1 && 1.0 / n < x) --n;
    while (1.0 / (n + 1) >= x) ++n;
    return n;
  }

private:
  double checked(double t) const {
    const double v = psi_(t);
    if (!std::isfinite(v) || !(v > 0.0)) throw InvalidSpec("psi must be finite and positive on (0,1]");
    return v;
  }

  // sup of psi over samples in (1/(n+1), upto]
  double cell_sup(int n, double upto) const {
    const double lo = 1.0 / (n + 1);
    double s = checked(upto);
    for (int k = 1; k < samples_; ++k) s = std::max(s, checked(lo + (upto - lo) * k / samples_));
    return s;
  }

  std::function<double(double)> psi_;
  int n_max_;
  int samples_;
  std::vector<double> mesh_;
  double deep_sup_ = 0.0;
};

/// f = psi3' on (0,1], 0 elsewhere, with primitive equal to psi3 on
/// [1/(n_max+1), 1] and closed linearly to 0 at 0.
inline Integrand slow_decay_construct(const DecaySpec& spec) {
  const int N = spec.n_max();
  std::vector<double> x{0.0}, v{0.0};
  for (int n = N + 1; n >= 2; --n) {
    x.push_back(1.0 / n);
    v.push_back(spec.psi1_mesh(n - 1));
  }
  x.push_back(1.0);
  v.push_back(spec.psi1_mesh(1));

  std::vector<double> levels{0.0};
  for (std::size_t i = 0; i + 1 < x.size(); ++i) levels.push_back((v[i + 1] - v[i]) / (x[i + 1] - x[i]));
  levels.push_back(0.0);

  Integrand f;
  f.primitive = Primitive::linear(x, v);
  f.steps = Steps(x, std::move(levels));
  f.pointwise = [s = *f.steps](double y) { return s(y); };
  f.l1 = L1Status::yes;
  f.label = "slow_decay";
  return f;
}

/// Gap per x against the lower bound psi(x). Rows outside
/// [1/n_max, 1/2] are informational.
inline std::vector<GapReport> verify_slow_decay(const Integrand& f, const DecaySpec& spec, const std::vector<double>& xs,
                                                double tol = 1e-12) {
  std::vector<GapReport> rows;
  for (double x : xs) {
    if (!(x > 0.0 && x <= 1.0)) throw std::domain_error("verify_slow_decay: x outside (0,1]");
    GapReport r;
    r.x = x;
    r.gap = translation_gap(f, x);
    r.bound_lower = spec.psi(x);
    r.passed = r.gap >= *r.bound_lower - tol;
    r.informational = x > 0.5 || x < 1.0 / spec.n_max();
    rows.push_back(r);
  }
  std::stable_sort(rows.begin(), rows.end(), [](const GapReport& a, const GapReport& b) { return std::abs(a.x) > std::abs(b.x); });
  return rows;
}

// ---------------------------------------------------------------------------
// Smooth bump and the oscillation bound

/// height * exp(-1/(1-u^2)), u = (y-center)/half_width, on |u| < 1.
struct SmoothBump {
  double center = 0.0;
  double half_width = 1.0;
  double height = 1.0;

  Interval support() const { return {center - half_width, center + half_width}; }

  double operator()(double y) const {
    const double u = (y - center) / half_width;
    if (!(std::abs(u) < 1.0)) return 0.0;
    return height * std::exp(-1.0 / (1.0 - u * u));
  }

  double derivative(double y) const {
    const double u = (y - center) / half_width;
    if (!(std::abs(u) < 1.0)) return 0.0;
    const double q = 1.0 - u * u;
    return height * std::exp(-1.0 / q) * (-2.0 * u) / (q * q) / half_width;
  }

  /// max f - min f; the minimum 0 is attained off the support.
  double oscillation() const { return std::abs(height) * std::exp(-1.0); }

  /// ||f'||_inf from the closed-form derivative.
  double derivative_sup() const {
    if (height == 0.0) return 0.0;
    const Interval s = support();
    const auto nodes = search::refine_nodes(s.lo(), s.hi(), 512, {});
    const auto ex = search::find_extrema([this](double y) { return derivative(y); }, nodes, 1, 4);
    return ex.sup_abs();
  }

  Integrand integrand(double tol = 1e-13) const {
    const SmoothBump b = *this;
    BuildOptions opt;
    opt.initial_panels = 32;
    Integrand f;
    f.primitive = build_primitive_from_pointwise([b](double y) { return b(y); }, support(), tol, opt);
    f.pointwise = [b](double y) { return b(y); };
    f.l1 = L1Status::yes;
    f.label = "bump";
    return f;
  }
};

/// Gap of a bump against osc f |x| -+ 2 ||f'|| x^2 (lower bound clamped at 0).
inline std::vector<GapReport> osc_lower_bound_check(const SmoothBump& bump, const std::vector<double>& xs,
                                                    double tol = 1e-9) {
  const Integrand f = bump.integrand();
  const double osc = bump.oscillation(), d = bump.derivative_sup();
  std::vector<GapReport> rows;
  for (double x : xs) {
    GapReport r;
    r.x = x;
    r.gap = translation_gap(f, x);
    r.bound_lower = std::max(0.0, osc * std::abs(x) - 2.0 * d * x * x);
    r.bound_upper = osc * std::abs(x) + 2.0 * d * x * x;
    r.passed = within_bounds(r.gap, r.bound_lower, r.bound_upper, tol);
    rows.push_back(r);
  }
  std::stable_sort(rows.begin(), rows.end(), [](const GapReport& a, const GapReport& b) { return std::abs(a.x) > std::abs(b.x); });
  return rows;
}

// ---------------------------------------------------------------------------
// Gaps of the primitive itself

namespace detail {

// p - x = s + err exactly
inline std::pair<double, double> two_diff(double p, double x) {
  const double s = p - x;
  const double bb = s - p;
  return {s, (p - (s - bb)) + (-x - bb)};
}

// int_{t-x}^{t} F, correcting the rounding of t - x to first order
inline double window_integral(const Primitive& F, double t, double x) {
  const auto [a, e] = two_diff(t, x);
  return F.integrate(a, t) - e * F(a);
}

// int_{t-x}^{t} F as a function of t; its oscillation is ||tau_x F - F||.
inline search::Extrema window_average_extrema(const Primitive& F, double x) {
  search::Extrema ex;
  ex.offer(-std::numeric_limits<double>::infinity(), x * F.limit_neg());
  ex.offer(std::numeric_limits<double>::infinity(), x * F.limit_pos());
  const auto nodes = shifted_union(F.search_nodes(F.is_table() ? 4096 : 1024), x);
  const int samples = F.kind() == Primitive::Kind::closed_form ? 2 : 4;
  ex.merge(search::find_extrema([&F, x](double t) { return window_integral(F, t, x); }, nodes, samples, 8));
  return ex;
}

}  // namespace detail

/// ||tau_x F - F||: the primitive of y -> F(y-x) - F(y) is
/// t -> int_{-x}^0 F - int_{t-x}^t F, so the norm is the oscillation of the
/// moving-window integral of F, whose limits are x F(+-inf).
inline double primitive_gap_norm(const Integrand& f, double x) {
  const Primitive& F = f.primitive;
  if (!std::isfinite(F.limit_neg()) || !std::isfinite(F.limit_pos()))
    throw NonConvergentTail("primitive has no finite limits at +-inf");
  if (x == 0.0) return 0.0;
  return detail::window_average_extrema(F, x).oscillation();
}

/// ||tau_x F - F||_1 = int |F(y-x) - F(y)| dy, split at the sign changes of
/// the difference. On each piece int_p^q (F(y-x) - F(y)) dy telescopes to a
/// difference of two window integrals of length x.
inline double primitive_gap_l1(const Integrand& f, double x) {
  if (!f.absolutely_integrable()) throw NotAbsolutelyIntegrable("'" + f.label + "' is not absolutely integrable");
  if (x == 0.0) return 0.0;
  const Primitive& F = f.primitive;
  const auto nodes = detail::shifted_union(F.search_nodes(F.is_table() ? 4096 : 2048), x);
  auto K = [&F, x](double y) { return F(y - x) - F(y); };
  const int samples = F.kind() == Primitive::Kind::linear_table ? 1 : 8;
  double total = 0.0;
  for (std::size_t i = 0; i + 1 < nodes.size(); ++i) {
    const auto pts = search::split_at_roots(K, nodes[i], nodes[i + 1], samples);
    for (std::size_t j = 0; j + 1 < pts.size(); ++j) {
      const double p = pts[j], q = pts[j + 1];
      total += std::abs(detail::window_integral(F, p, x) - detail::window_integral(F, q, x));
    }
  }
  return total;
}

// ---------------------------------------------------------------------------
// sin(y)/y witness

inline double sinc(double y) {
  if (std::abs(y) < 1e-4) return 1.0 - y * y / 6.0;
  return std::sin(y) / y;
}

/// F(y) = sin(y)/y as the primitive of f = F'.
inline Integrand sinc_primitive_integrand() {
  Primitive::ClosedForm cf;
  cf.F = sinc;
  cf.limit_neg = 0.0;
  cf.limit_pos = 0.0;
  cf.window = Interval(-64.0, 64.0);
  cf.constant_outside = false;
  cf.derivative = [](double y) {
    if (std::abs(y) < 1e-4) return -y / 3.0;
    return (y * std::cos(y) - std::sin(y)) / (y * y);
  };
  Integrand f;
  f.primitive = Primitive::closed_form(std::move(cf));
  f.pointwise = f.primitive.closed()->derivative;
  f.l1 = L1Status::no;
  f.label = "sinc_primitive";
  return f;
}

enum class DivergenceCertificate { divergent, not_divergent, inconclusive };

struct HkNotL1Report {
  double x = 0.0;
  double tail_coefficient_sin = 0.0;  // cos(x) - 1
  double tail_coefficient_cos = 0.0;  // -sin(x)
  bool abs_integral_diverges = false;
  bool alexiewicz_finite = false;
  double alexiewicz_value = 0.0;
  double log_slope = 0.0;
  double r_squared = 0.0;
  DivergenceCertificate certificate = DivergenceCertificate::inconclusive;
  std::vector<double> partial_integrals;  // int_0^{2 pi k} |tau_x F - F|, k = 1..periods
};

/// For F(y) = sin(y)/y: the leading asymptotic coefficients of
/// tau_x F - F, a log-growth fit of its partial absolute integrals (slope > 0
/// with R^2 >= min_r_squared certifies divergence), and finiteness of the
/// Alexiewicz norm.
inline HkNotL1Report hk_not_l1_witness(double x, int periods = 200, double min_r_squared = 0.999) {
  if (x == 0.0) throw std::invalid_argument("hk_not_l1_witness: x must be nonzero");
  HkNotL1Report rep;
  rep.x = x;
  rep.tail_coefficient_sin = std::cos(x) - 1.0;
  rep.tail_coefficient_cos = -std::sin(x);

  auto K = [x](double y) { return sinc(y - x) - sinc(y); };
  auto absK = [&K](double y) { return std::abs(K(y)); };
  const double pi = std::numbers::pi;
  double acc = 0.0;
  for (int j = 0; j < 2 * periods; ++j) {
    const auto pts = search::split_at_roots(K, j * pi, (j + 1) * pi, 8);
    acc += quad::integrate_pieces(absK, pts, 1e-11, 30).value;
    if (j % 2 == 1) rep.partial_integrals.push_back(acc);
  }

  // least squares P_k = a + b log k
  const std::size_t n = rep.partial_integrals.size();
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t k = 0; k < n; ++k) {
    const double lx = std::log(static_cast<double>(k + 1)), py = rep.partial_integrals[k];
    sx += lx; sy += py; sxx += lx * lx; sxy += lx * py;
  }
  const double dn = static_cast<double>(n);
  const double slope = (dn * sxy - sx * sy) / (dn * sxx - sx * sx);
  const double icpt = (sy - slope * sx) / dn;
  double ss_res = 0, ss_tot = 0;
  const double mean = sy / dn;
  for (std::size_t k = 0; k < n; ++k) {
    const double fit = icpt + slope * std::log(static_cast<double>(k + 1));
    ss_res += (rep.partial_integrals[k] - fit) * (rep.partial_integrals[k] - fit);
    ss_tot += (rep.partial_integrals[k] - mean) * (rep.partial_integrals[k] - mean);
  }
  rep.log_slope = slope;
  rep.r_squared = ss_tot > 0 ? 1.0 - ss_res / ss_tot : 0.0;

  const double coeff = std::hypot(rep.tail_coefficient_sin, rep.tail_coefficient_cos);
  if (coeff < 1e-12) {
    rep.certificate = DivergenceCertificate::inconclusive;
  } else if (slope > 0.0 && rep.r_squared >= min_r_squared) {
    rep.certificate = DivergenceCertificate::divergent;
  } else {
    rep.certificate = DivergenceCertificate::not_divergent;
  }
  rep.abs_integral_diverges = rep.certificate == DivergenceCertificate::divergent;

  rep.alexiewicz_value = primitive_gap_norm(sinc_primitive_integrand(), x);
  rep.alexiewicz_finite = std::isfinite(rep.alexiewicz_value);
  return rep;
}

}  // namespace alexnorm
