#pragma once

#include "alexnorm/weights.hpp"

#include <cmath>
#include <numbers>
#include <vector>

namespace alexnorm {

// ---------------------------------------------------------------------------
// Unit disc

/// A 2 pi-periodic integrand given by its restriction to [-pi, pi).
class PeriodicIntegrand {
public:
  explicit PeriodicIntegrand(Integrand base) : base_(std::move(base)) {
    if (!base_.pointwise) throw std::invalid_argument("periodic integrand '" + base_.label + "' needs a pointwise evaluator");
    if (!std::isfinite(increment())) throw std::invalid_argument("periodic integrand: infinite increment over a period");
    constexpr double pi = std::numbers::pi;
    std::vector<double> k;
    if (base_.steps) k = base_.steps->edges;
    else if (base_.primitive.kind() != Primitive::Kind::cubic_table) k = base_.primitive.breakpoints();
    for (double t : k)
      if (t > -pi && t < pi) kinks_.push_back(t);
    const double left = base_.pointwise(-pi), right = base_.pointwise(std::nextafter(pi, 0.0));
    if (std::abs(left - right) > 1e-12 * std::max(1.0, std::abs(left))) kinks_.insert(kinks_.begin(), -pi);
    kinks_ = search::merge_nodes(std::move(kinks_));
  }

  static double wrap(double phi) {
    constexpr double pi = std::numbers::pi;
    double t = phi - 2 * pi * std::floor((phi + pi) / (2 * pi));
    if (t >= pi) t -= 2 * pi;
    if (t < -pi) t = -pi;
    return t;
  }

  double operator()(double phi) const { return base_.pointwise(wrap(phi)); }
  const Integrand& base() const { return base_; }
  /// Points in [-pi, pi) where the periodic extension may jump or kink.
  const std::vector<double>& kinks() const { return kinks_; }
  bool smooth() const { return kinks_.empty(); }

  /// int over one period.
  double increment() const { return base_.primitive(std::numbers::pi) - base_.primitive(-std::numbers::pi); }
  /// F(theta) - F(-pi) for theta in [-pi, pi].
  double primitive(double theta) const { return base_.primitive(theta) - base_.primitive(-std::numbers::pi); }

private:
  Integrand base_;
  std::vector<double> kinks_;
};

/// (1 - r^2) / (2 pi (1 - 2 r cos t + r^2)), written to stay accurate as r -> 1.
inline double disc_kernel(double r, double t) {
  const double s = std::sin(0.5 * t);
  return (1.0 - r) * (1.0 + r) / (2.0 * std::numbers::pi * ((1.0 - r) * (1.0 - r) + 4.0 * r * s * s));
}

inline void check_radius(double r) {
  if (!(r < 1.0)) throw KernelSingularity("disc kernel needs r < 1");
  if (!(r >= 0.0)) throw std::invalid_argument("disc kernel needs r >= 0");
}

inline double disc_kernel_mass(double r, double tol = 1e-14) {
  check_radius(r);
  return quad::periodic_trapezoid([r](double t) { return disc_kernel(r, t); }, -std::numbers::pi, 2 * std::numbers::pi, tol).value;
}

/// u_r(theta) = int_{-pi}^{pi} f(phi) P_r(phi - theta) dphi. Smooth periodic
/// data with a wide kernel use the periodic trapezoid rule; otherwise adaptive
/// Gauss-Kronrod on the period centred at theta, split at the kinks and around
/// the peak.
inline double poisson_disc(const PeriodicIntegrand& f, double r, double theta, double tol = 1e-12) {
  check_radius(r);
  constexpr double pi = std::numbers::pi;
  if (r == 0.0) return f.increment() / (2 * pi);
  auto g = [&f, r, theta](double phi) { return f(phi) * disc_kernel(r, phi - theta); };
  if (f.smooth() && r <= 0.95) return quad::periodic_trapezoid(g, -pi, 2 * pi, tol).value;

  const double lo = theta - pi, hi = theta + pi;
  std::vector<double> nodes{lo, hi, theta};
  for (double w = 1.0 - r; w < pi; w *= 4.0) {
    nodes.push_back(theta - w);
    nodes.push_back(theta + w);
  }
  for (double k : f.kinks())
    for (int m = -1; m <= 1; ++m) {
      const double t = k + 2 * pi * m;
      if (t > lo && t < hi) nodes.push_back(t);
    }
  std::erase_if(nodes, [lo, hi](double t) { return t < lo || t > hi; });
  return quad::integrate_pieces(g, search::merge_nodes(std::move(nodes)), tol, 40).value;
}

/// ||u_r - f|| on [-pi, pi] for each r: the oscillation of
/// U(theta) - (F(theta) - F(-pi)) with U the quadrature-built primitive of u_r.
inline SweepReport disc_boundary_convergence(const PeriodicIntegrand& f, const std::vector<double>& rs, const SweepOptions& opt = {},
                                             double build_tol = 1e-10) {
  if (rs.empty()) throw std::invalid_argument("disc_boundary_convergence: empty ladder");
  constexpr double pi = std::numbers::pi;
  std::vector<GapReport> rows;
  for (double r : rs) {
    check_radius(r);
    BuildOptions bo;
    bo.kinks = f.kinks();
    bo.initial_panels = 64;
    const Primitive U = build_primitive_from_pointwise([&f, r](double t) { return poisson_disc(f, r, t, 1e-13); }, {-pi, pi}, build_tol, bo);
    auto D = [&](double t) { return U(t) - f.primitive(t); };
    std::vector<double> nodes = U.breakpoints();
    nodes.insert(nodes.end(), f.kinks().begin(), f.kinks().end());
    nodes = search::merge_nodes(std::move(nodes));
    auto ex = search::find_extrema(D, nodes, 4, 16);
    ex.offer(-pi, 0.0);
    GapReport row;
    row.x = r;
    row.gap = ex.oscillation();
    row.passed = std::isfinite(row.gap);
    rows.push_back(row);
  }
  return summarize_sweep(std::move(rows), opt, false);
}

// ---------------------------------------------------------------------------
// Upper half-plane

struct HalfPlanePoint {
  double x = 0.0;
  double y = 1.0;

  HalfPlanePoint(double x_, double y_) : x(x_), y(y_) {
    if (!(y > 0.0) || !std::isfinite(x) || !std::isfinite(y)) throw std::invalid_argument("half-plane point needs y > 0");
  }
};

/// Phi_y(s) = y/(pi (s^2 + y^2)).
inline double halfplane_kernel(double s, double y) { return y / (std::numbers::pi * (s * s + y * y)); }

inline double halfplane_kernel_derivative(double s, double y) {
  const double q = s * s + y * y;
  return -2.0 * y * s / (std::numbers::pi * q * q);
}

/// int Phi_y over the line, by quadrature around the peak.
inline double halfplane_kernel_mass(double y, double tol = 1e-13) {
  std::vector<double> nodes{-std::numeric_limits<double>::infinity(), 0.0, std::numeric_limits<double>::infinity()};
  for (double w = y; w < 1e6 * y; w *= 8.0) {
    nodes.push_back(w);
    nodes.push_back(-w);
  }
  std::sort(nodes.begin(), nodes.end());
  return quad::integrate_pieces([y](double s) { return halfplane_kernel(s, y); }, nodes, tol, 40).value;
}

/// Phi_y(x - t) and Psi_z(t) = Phi_y(x - t)/w(t) with its derivative away
/// from the jumps of w.
struct KernelPair {
  HalfPlanePoint z;
  Weight w;

  double Phi(double s) const { return halfplane_kernel(s, z.y); }
  double Psi(double t) const { return halfplane_kernel(z.x - t, z.y) / w(t); }
  double Psi_prime(double t) const {
    const double wt = w(t);
    return -halfplane_kernel_derivative(z.x - t, z.y) / wt - halfplane_kernel(z.x - t, z.y) * w.derivative(t) / (wt * wt);
  }
  /// Psi(j) - Psi(j-) at a jump of w.
  double Psi_jump(double j) const { return Psi(j) - Psi(std::nextafter(j, -std::numeric_limits<double>::infinity())); }

  /// Psi at +-inf from a geometric probe; nullopt when it does not settle.
  std::optional<double> Psi_limit(int dir) const {
    const double T = 1e8 * std::max({1.0, std::abs(z.x), z.y});
    const double a = Psi(dir * T), b = Psi(dir * 4 * T), c = Psi(dir * 16 * T);
    if (!std::isfinite(a) || !std::isfinite(b) || !std::isfinite(c)) return std::nullopt;
    const double spread = std::max(std::abs(c - b), std::abs(c - a));
    if (spread > 1e-6 * std::max(1.0, std::abs(c))) return std::nullopt;
    return (4.0 * c - b) / 3.0;
  }
};

/// u_y(x) for boundary data f against a weight w, by parts:
/// u = [G Psi] - int G dPsi with G the primitive of f w. When G is constant
/// outside a window the boundary terms close there exactly; otherwise the
/// integral runs over |t - x| <= max(50 y, 50), the tails are integrated
/// on mapped half-lines and checked against |G| times the tail variation of
/// Psi, and the limits of Psi enter the boundary terms.
class HalfPlaneIntegral {
public:
  HalfPlaneIntegral(Signal f, Weight w, double tol = 1e-11)
      : f_(std::move(f)), w_(std::move(w)), G_(weighted_product(f_, w_)), tol_(tol) {}

  const Integrand& product() const { return G_; }
  const Weight& weight() const { return w_; }

  double operator()(HalfPlanePoint z) const {
    const KernelPair k{z, w_};
    const Primitive& G = G_.primitive;
    constexpr double inf = std::numeric_limits<double>::infinity();

    const Interval win = G.window();
    const bool closed = G.constant_outside();
    double a = win.lo(), b = win.hi();
    if (!closed) {
      const double L = std::max(50.0 * z.y, 50.0);
      a = std::min(a, z.x - L);
      b = std::max(b, z.x + L);
    }

    std::vector<double> nodes{a, b};
    for (double t : f_.kinks) nodes.push_back(t);
    for (double j : w_.jumps()) nodes.push_back(j);
    if (z.x > a && z.x < b) nodes.push_back(z.x);
    for (double d = z.y; d < (b - a); d *= 4.0) {
      nodes.push_back(z.x - d);
      nodes.push_back(z.x + d);
    }
    std::erase_if(nodes, [a, b](double t) { return t < a || t > b; });
    nodes = search::merge_nodes(std::move(nodes));

    auto integrand = [&k, &G](double t) { return G(t) * k.Psi_prime(t); };
    double inner = quad::integrate_pieces(integrand, nodes, tol_, 40).value;
    for (double j : w_.jumps())
      if (j > a && j <= b) inner += G(j) * k.Psi_jump(j);

    if (closed) return G.limit_pos() * k.Psi(b) - G.limit_neg() * k.Psi(a) - inner;

    double u = -inner;
    auto tail = [&](int dir) {
      const double edge = dir > 0 ? b : a;
      const double lim_G = dir > 0 ? G.limit_pos() : G.limit_neg();
      const auto lim_Psi = k.Psi_limit(dir);
      if (!lim_Psi) {
        if (lim_G == 0.0 && G(edge) == 0.0) return 0.0;
        throw TailBoundFailure("kernel ratio has no finite limit at " + std::string(dir > 0 ? "+inf" : "-inf"));
      }
      const auto r = dir > 0 ? quad::integrate(integrand, b, inf, 0.1 * tol_, 40) : quad::integrate(integrand, -inf, a, 0.1 * tol_, 40);
      double jumps = 0.0;
      for (double j : w_.jumps())
        if (dir > 0 ? j > b : j <= a) jumps += G(j) * k.Psi_jump(j);
      const double sup_G = std::max(std::abs(G(edge)), std::abs(lim_G));
      const double bound = sup_G * std::abs(*lim_Psi - k.Psi(edge)) * (1.0 + 1e-6) + 10 * tol_;
      if (!std::isfinite(r.value) || std::abs(r.value) > bound + std::abs(jumps) + r.error)
        throw TailBoundFailure("tail integral exceeds its variation bound");
      return dir * lim_G * *lim_Psi - (r.value + jumps);
    };
    u += tail(+1);
    u += tail(-1);
    return u;
  }

private:
  Signal f_;
  Weight w_;
  Integrand G_;
  double tol_;
};

inline double poisson_halfplane(const Signal& f, const Weight& w, HalfPlanePoint z) { return HalfPlaneIntegral(f, w)(z); }

inline double poisson_halfplane(const Integrand& f, const Weight& w, HalfPlanePoint z) {
  return poisson_halfplane(as_signal(f), w, z);
}

struct HalfPlaneOptions {
  Interval I{-20.0, 20.0};  // where ||(u_y - f) w|| is measured
  double build_tol = 1e-9;
  double majorant_tol = 1e-7;
  std::size_t majorant_cells = 256;  // search grid of each weighted gap inside the majorant
};

/// Weighted boundary gap ||(u_y - f) w|| on I for each y, with the majorant
/// int Phi_y(s) ||(tau_s f - f) w|| ds. Rows keep the ladder order.
inline SweepReport halfplane_weighted_convergence(const Signal& f, const Weight& w, const std::vector<double>& ys,
                                                  const SweepOptions& opt = {}, const HalfPlaneOptions& hp = {}) {
  if (ys.empty()) throw std::invalid_argument("halfplane_weighted_convergence: empty ladder");
  if (!hp.I.is_compact()) throw std::invalid_argument("halfplane_weighted_convergence: I must be compact");
  const HalfPlaneIntegral u(f, w);
  const Integrand& G = u.product();

  std::vector<double> kinks;
  for (double t : f.kinks)
    if (t > hp.I.lo() && t < hp.I.hi()) kinks.push_back(t);
  for (double j : w.jumps())
    if (j > hp.I.lo() && j < hp.I.hi()) kinks.push_back(j);
  kinks = search::merge_nodes(std::move(kinks));

  std::vector<GapReport> rows;
  for (double y : ys) {
    if (!(y > 0.0)) throw std::invalid_argument("halfplane_weighted_convergence: y must be positive");
    auto h = [&](double t) { return (u(HalfPlanePoint(t, y)) - f(t)) * w(t); };
    BuildOptions bo;
    bo.kinks = kinks;
    bo.initial_panels = 64;
    const Primitive P = build_primitive_from_pointwise(h, hp.I, hp.build_tol, bo);
    auto ex = search::find_extrema([&P](double t) { return P(t); }, P.breakpoints(), 4, 16);
    ex.offer(hp.I.lo(), 0.0);

    auto integrand = [&](double s) { return halfplane_kernel(s, y) * weighted_gap(f, w, s, G, nullptr, hp.majorant_cells).gap; };
    std::vector<double> nodes{-std::numeric_limits<double>::infinity(), 0.0, std::numeric_limits<double>::infinity()};
    for (double d = y; d < 1e4 * std::max(1.0, y); d *= 4.0) {
      nodes.push_back(d);
      nodes.push_back(-d);
    }
    std::sort(nodes.begin(), nodes.end());
    const double majorant = quad::integrate_pieces(integrand, nodes, hp.majorant_tol, 30).value;

    GapReport row;
    row.x = y;
    row.gap = ex.oscillation();
    row.bound_upper = majorant;
    row.passed = within_bounds(row.gap, row.bound_lower, row.bound_upper, opt.tol);
    rows.push_back(row);
  }
  return summarize_sweep(std::move(rows), opt, false);
}

struct KernelAudit {
  double V_Psi = 0.0;
  double V_invPsi = 0.0;
  double delta_Psi = 0.0;
  double delta_invPsi = 0.0;
  bool bounded = false;
};

/// Variations of Psi_z and 1/Psi_z on a window, with the change under two
/// more refinement levels.
inline KernelAudit kernel_bv_audit(const Weight& w, HalfPlanePoint z, const Interval& window, int levels = 16) {
  if (!window.is_compact()) throw std::invalid_argument("kernel_bv_audit: window must be compact");
  KernelAudit a;
  if (!(window.length() > 0.0)) {
    a.bounded = true;
    return a;
  }
  const KernelPair k{z, w};
  std::vector<double> jumps = w.jumps();
  std::sort(jumps.begin(), jumps.end());
  auto psi = [&k](double t) { return k.Psi(t); };
  auto inv = [&k](double t) { return 1.0 / k.Psi(t); };
  a.V_Psi = Weight::jump_aware_variation(psi, jumps, window, levels);
  a.V_invPsi = Weight::jump_aware_variation(inv, jumps, window, levels);
  a.delta_Psi = std::abs(Weight::jump_aware_variation(psi, jumps, window, levels + 2) - a.V_Psi);
  a.delta_invPsi = std::abs(Weight::jump_aware_variation(inv, jumps, window, levels + 2) - a.V_invPsi);
  a.bounded = std::isfinite(a.V_Psi) && std::isfinite(a.V_invPsi) && a.delta_Psi <= 1e-3 * std::max(1.0, a.V_Psi) &&
              a.delta_invPsi <= 1e-3 * std::max(1.0, a.V_invPsi);
  return a;
}

}  // namespace alexnorm
