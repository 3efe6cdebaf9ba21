#pragma once

#include "alexnorm/poisson.hpp"
#include "alexnorm/spec_io.hpp"
#include "alexnorm/variation.hpp"

#include <atomic>
#include <cstdio>
#include <random>
#include <thread>
#include <variant>

namespace alexnorm::scenario {

using spec::json;

enum class Kind {
  norm,
  gap_sweep,
  decay,
  osc_bound,
  primitive_gap,
  weight_audit,
  weighted_sweep,
  lemma_check,
  poisson_disc,
  poisson_halfplane
};

inline const std::vector<std::pair<std::string, Kind>>& kind_names() {
  static const std::vector<std::pair<std::string, Kind>> k{
      {"norm", Kind::norm},
      {"gap_sweep", Kind::gap_sweep},
      {"decay", Kind::decay},
      {"osc_bound", Kind::osc_bound},
      {"primitive_gap", Kind::primitive_gap},
      {"weight_audit", Kind::weight_audit},
      {"weighted_sweep", Kind::weighted_sweep},
      {"lemma_check", Kind::lemma_check},
      {"poisson_disc", Kind::poisson_disc},
      {"poisson_halfplane", Kind::poisson_halfplane},
  };
  return k;
}

inline std::string to_string(Kind k) {
  for (const auto& [name, kind] : kind_names())
    if (kind == k) return name;
  return "?";
}

struct NormParams {
  std::optional<double> expected;
  std::size_t brute_pairs = 0;
  int isometry_trials = 0;
  double shift_range = 4.0;
};

struct GapSweepParams {
  bool gap_equals_abs_x = false;
};

struct DecayParams {
  std::string psi = "sqrt";
  double exponent = 0.5;
  int n_max = 256;
};

struct OscBoundParams {
  SmoothBump bump;
};

struct PrimitiveGapParams {
  std::optional<double> witness_x;
  int periods = 200;
  double min_r_squared = 0.999;
};

struct WeightAuditParams {
  std::vector<Interval> intervals{Interval(-1.0, 1.0)};
  double eps = 0.1;
  int levels = 16;
  Interval variation_interval{-50.0, 50.0};
  std::optional<double> reference_c;  // variation of g_x compared against 2|x|sqrt(x^2 + c)
  std::vector<double> reference_xs;   // shifts where the comparison applies; empty means all
  double reference_rel_tol = 0.01;
};

struct LemmaParams {
  std::string family = "sinusoid";
  int count = 20;
  double M = 8.0;
  Interval E{0.0, 4.0 * std::numbers::pi};
  std::optional<std::string> expect_error;
};

struct PointCheck {
  double a = 0.0;  // r or x
  double b = 0.0;  // theta or y
  double expected = 0.0;
};

struct DiscParams {
  std::vector<double> mass_radii;
  std::vector<PointCheck> points;
};

struct HalfPlaneParams {
  Interval I{-20.0, 20.0};
  std::vector<PointCheck> points;
};

using Params = std::variant<NormParams, GapSweepParams, DecayParams, OscBoundParams, PrimitiveGapParams, WeightAuditParams,
                            std::monostate, LemmaParams, DiscParams, HalfPlaneParams>;

struct Thresholds {
  double tol = 1e-9;
  double final_gap = 1e-2;
};

struct Scenario {
  std::string name;
  Kind kind = Kind::norm;
  std::optional<spec::FunctionSpec> function;
  std::optional<Weight> weight;
  std::vector<double> ladder;
  Thresholds thresholds;
  std::string output_path;
  Params params;
};

struct Manifest {
  std::vector<Scenario> scenarios;
  std::uint64_t seed = 0;
  std::string versions;
  std::string timestamp;
};

namespace detail {

inline std::vector<PointCheck> point_checks(const spec::Node& p, const char* first, const char* second) {
  std::vector<PointCheck> out;
  if (!p.has("points")) return out;
  const spec::Node pts = p.at("points");
  if (!pts.raw().is_array()) pts.fail("expected an array");
  for (std::size_t i = 0; i < pts.raw().size(); ++i) {
    const spec::Node q = pts.at(i);
    out.push_back({q.number(first), q.number(second), q.number("expected")});
  }
  return out;
}

inline Params parse_params(Kind kind, const spec::Node& p) {
  switch (kind) {
    case Kind::norm: {
      NormParams o;
      if (p.has("expected")) o.expected = p.number("expected");
      const long pairs = p.integer("brute_pairs", 0);
      if (pairs < 0 || pairs > 100'000'000) p.fail("brute_pairs", "must be in [0, 1e8]");
      o.brute_pairs = static_cast<std::size_t>(pairs);
      o.isometry_trials = static_cast<int>(p.integer("isometry_trials", 0));
      if (o.isometry_trials < 0) p.fail("isometry_trials", "must be >= 0");
      o.shift_range = p.number("shift_range", 4.0);
      return o;
    }
    case Kind::gap_sweep: return GapSweepParams{p.flag("gap_equals_abs_x", false)};
    case Kind::decay: {
      DecayParams o;
      o.psi = p.text("psi", "sqrt");
      if (o.psi != "sqrt" && o.psi != "power" && o.psi != "inverse_log") p.fail("psi", "expected sqrt, power or inverse_log");
      o.exponent = p.number("exponent", 0.5);
      if (!(o.exponent > 0.0 && o.exponent < 1.0)) p.fail("exponent", "must lie in (0, 1)");
      o.n_max = static_cast<int>(p.integer("n_max", 256));
      if (o.n_max < 2 || o.n_max > 1 << 16) p.fail("n_max", "must lie in [2, 65536]");
      return o;
    }
    case Kind::osc_bound: {
      OscBoundParams o;
      o.bump = {p.number("center", 0.0), p.number("half_width", 1.0), p.number("height", 1.0)};
      if (!(o.bump.half_width > 0.0)) p.fail("half_width", "must be positive");
      return o;
    }
    case Kind::primitive_gap: {
      PrimitiveGapParams o;
      if (p.has("witness_x")) {
        o.witness_x = p.number("witness_x");
        if (*o.witness_x == 0.0) p.fail("witness_x", "must be nonzero");
      }
      o.periods = static_cast<int>(p.integer("periods", 200));
      if (o.periods < 4) p.fail("periods", "must be >= 4");
      o.min_r_squared = p.number("min_r_squared", 0.999);
      return o;
    }
    case Kind::weight_audit: {
      WeightAuditParams o;
      if (p.has("intervals")) {
        const spec::Node iv = p.at("intervals");
        if (!iv.raw().is_array() || iv.raw().empty()) iv.fail("expected a nonempty array of [lo, hi]");
        o.intervals.clear();
        for (std::size_t i = 0; i < iv.raw().size(); ++i) {
          const spec::Node e = iv.at(i);
          if (!e.raw().is_array() || e.raw().size() != 2 || !e.raw()[0].is_number() || !e.raw()[1].is_number())
            e.fail("expected [lo, hi]");
          const double lo = e.raw()[0].get<double>(), hi = e.raw()[1].get<double>();
          if (!(lo < hi)) e.fail("expected lo < hi");
          o.intervals.emplace_back(lo, hi);
        }
      }
      o.eps = p.number("eps", 0.1);
      if (!(o.eps > 0.0)) p.fail("eps", "must be positive");
      o.levels = static_cast<int>(p.integer("levels", 16));
      if (o.levels < 1 || o.levels > 24) p.fail("levels", "must lie in [1, 24]");
      if (p.has("variation_interval")) o.variation_interval = p.interval("variation_interval");
      if (p.has("reference_c")) o.reference_c = p.number("reference_c");
      if (p.has("reference_xs")) o.reference_xs = p.numbers("reference_xs");
      o.reference_rel_tol = p.number("reference_rel_tol", 0.01);
      return o;
    }
    case Kind::weighted_sweep: return std::monostate{};
    case Kind::lemma_check: {
      LemmaParams o;
      o.family = p.text("family", "sinusoid");
      if (o.family != "sinusoid" && o.family != "constants" && o.family != "spikes")
        p.fail("family", "expected sinusoid, constants or spikes");
      o.count = static_cast<int>(p.integer("count", 20));
      if (o.count < 1 || o.count > 10000) p.fail("count", "must lie in [1, 10000]");
      o.M = p.number("M", o.family == "constants" ? 0.0 : 8.0);
      if (p.has("E")) o.E = p.interval("E");
      if (p.has("expect_error")) o.expect_error = p.text("expect_error");
      return o;
    }
    case Kind::poisson_disc: {
      DiscParams o;
      if (p.has("mass_radii")) o.mass_radii = p.numbers("mass_radii");
      o.points = point_checks(p, "r", "theta");
      return o;
    }
    case Kind::poisson_halfplane: {
      HalfPlaneParams o;
      if (p.has("interval")) o.I = p.interval("interval");
      o.points = point_checks(p, "x", "y");
      return o;
    }
  }
  p.fail("unreachable");
}

inline bool needs_function(Kind k) { return k != Kind::decay && k != Kind::osc_bound && k != Kind::lemma_check && k != Kind::weight_audit; }
inline bool needs_weight(Kind k) { return k == Kind::weight_audit || k == Kind::weighted_sweep || k == Kind::poisson_halfplane; }

inline bool needs_ladder(Kind k, const Params& p) {
  switch (k) {
    case Kind::gap_sweep:
    case Kind::osc_bound:
    case Kind::primitive_gap:
    case Kind::weight_audit:
    case Kind::weighted_sweep: return true;
    case Kind::poisson_disc: return std::get<DiscParams>(p).points.empty();
    case Kind::poisson_halfplane: return std::get<HalfPlaneParams>(p).points.empty();
    default: return false;
  }
}

}  // namespace detail

inline Scenario parse_scenario(const spec::Node& n) {
  if (!n.raw().is_object()) n.fail("expected an object");
  Scenario s;
  s.name = n.text("name");
  if (s.name.empty()) n.fail("name", "must be nonempty");
  const std::string kind = n.text("kind");
  const auto& kinds = kind_names();
  const auto it = std::find_if(kinds.begin(), kinds.end(), [&](const auto& p) { return p.first == kind; });
  if (it == kinds.end()) n.at("kind").fail("unknown scenario kind '" + kind + "'");
  s.kind = it->second;

  const json empty = json::object();
  s.params = detail::parse_params(s.kind, n.has("params") ? n.at("params") : spec::Node(empty, n.path() + ".params", n.base()));

  if (n.has("function")) s.function = spec::parse_function(n.at("function"));
  else if (detail::needs_function(s.kind)) n.fail("function", "missing");
  if (n.has("weight")) s.weight = spec::parse_weight(n.at("weight"));
  else if (detail::needs_weight(s.kind)) n.fail("weight", "missing");

  if (n.has("ladder")) s.ladder = n.numbers("ladder");
  if (s.ladder.empty() && detail::needs_ladder(s.kind, s.params)) n.fail("ladder", "must be nonempty");

  if (n.has("thresholds")) {
    const spec::Node t = n.at("thresholds");
    s.thresholds.tol = t.number("tol", s.thresholds.tol);
    s.thresholds.final_gap = t.number("final_gap", s.thresholds.final_gap);
    if (!(s.thresholds.tol > 0.0)) t.fail("tol", "must be positive");
  }
  s.output_path = n.text("output_path", s.name + ".csv");
  const std::filesystem::path out(s.output_path);
  if (out.is_absolute() || s.output_path.find("..") != std::string::npos) n.fail("output_path", "must be a relative path inside the output directory");
  return s;
}

inline Manifest parse_manifest(const json& j, const std::filesystem::path& base = {}, const std::string& origin = "manifest") {
  const spec::Node n(j, origin, base);
  if (!j.is_object()) n.fail("expected an object");
  Manifest m;
  if (n.has("seed")) {
    const spec::Node s = n.at("seed");
    if (!s.raw().is_number_unsigned()) s.fail("expected a nonnegative integer");
    m.seed = s.raw().get<std::uint64_t>();
  }
  m.versions = n.text("versions", "");
  m.timestamp = n.text("timestamp", "");
  const spec::Node list = n.at("scenarios");
  if (!list.raw().is_array()) list.fail("expected an array");
  std::vector<std::string> seen;
  for (std::size_t i = 0; i < list.raw().size(); ++i) {
    Scenario s = parse_scenario(list.at(i));
    for (const auto& o : m.scenarios) {
      if (o.name == s.name) list.at(i).fail("name", "duplicate scenario name '" + s.name + "'");
      if (o.output_path == s.output_path) list.at(i).fail("output_path", "shared with scenario '" + o.name + "'");
    }
    m.scenarios.push_back(std::move(s));
  }
  return m;
}

inline Manifest load_manifest(const std::filesystem::path& p) {
  const json j = spec::load_file(p);
  return parse_manifest(j, p.parent_path(), p.string());
}

// ---------------------------------------------------------------------------
// Tables

/// 17 significant digits, enough to round-trip a double.
inline std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}
inline std::string fmt(std::optional<double> v) { return v ? fmt(*v) : std::string(); }
inline std::string fmt(bool b) { return b ? "true" : "false"; }

struct Table {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  std::string csv() const {
    std::string out;
    auto line = [&out](const std::vector<std::string>& cells) {
      for (std::size_t i = 0; i < cells.size(); ++i) {
        if (i) out += ',';
        out += cells[i];
      }
      out += '\n';
    };
    line(header);
    for (const auto& r : rows) line(r);
    return out;
  }
};

inline Table gap_table(const std::vector<GapReport>& rows) {
  Table t{{"x", "gap", "bound_lower", "bound_upper", "passed"}, {}};
  for (const auto& r : rows) t.rows.push_back({fmt(r.x), fmt(r.gap), fmt(r.bound_lower), fmt(r.bound_upper), fmt(r.passed)});
  return t;
}

inline Table convergence_table(const SweepReport& s) {
  Table t{{"param", "gap", "majorant", "passed"}, {}};
  for (const auto& r : s.rows) t.rows.push_back({fmt(r.x), fmt(r.gap), fmt(r.bound_upper), fmt(r.passed)});
  return t;
}

// ---------------------------------------------------------------------------
// Execution

struct Outcome {
  std::string name;
  Kind kind = Kind::norm;
  std::string output;
  bool passed = false;
  std::optional<std::string> error;
  json headline = json::object();
  Table table;
};

struct Context {
  std::uint64_t seed = 0;
};

namespace detail {

inline const Integrand& integrand_of(const Scenario& s) {
  if (!s.function->integrand) throw InvalidSpec("'" + s.function->label + "' has no primitive with finite limits");
  return *s.function->integrand;
}

inline std::uint64_t name_hash(const std::string& s) {
  std::uint64_t h = 1469598103934665603ull;
  for (unsigned char c : s) h = (h ^ c) * 1099511628211ull;
  return h;
}

// sup over node pairs of |F(b) - F(a)|, nodes = breakpoints, a uniform grid
// over the window widened by 1, and the two limits
inline double brute_pair_norm(const Integrand& f, std::size_t pairs) {
  const Primitive& F = f.primitive;
  const Interval win = F.window();
  std::size_t n = 2;
  while (n * (n - 1) / 2 < pairs) ++n;
  std::vector<double> v{F.limit_neg(), F.limit_pos()};
  for (double y : F.breakpoints()) v.push_back(F(y));
  const double lo = win.lo() - 1.0, hi = win.hi() + 1.0;
  for (std::size_t k = 0; k < n; ++k) v.push_back(F(lo + (hi - lo) * static_cast<double>(k) / static_cast<double>(n - 1)));
  double best = 0.0;
  for (std::size_t i = 0; i < v.size(); ++i)
    for (std::size_t j = i + 1; j < v.size(); ++j) best = std::max(best, std::abs(v[j] - v[i]));
  return best;
}

inline void run_norm(const Scenario& s, const NormParams& p, const Context& ctx, Outcome& o) {
  const Integrand& f = integrand_of(s);
  const double tol = s.thresholds.tol;
  o.table.header = {"quantity", "x", "value", "reference", "passed"};
  const double norm = alexiewicz_norm(f);
  bool ok = true;
  const bool n_ok = !p.expected || std::abs(norm - *p.expected) <= tol;
  o.table.rows.push_back({"norm", "", fmt(norm), fmt(p.expected), fmt(n_ok)});
  ok = ok && n_ok;
  o.headline["norm"] = norm;
  if (p.brute_pairs > 0) {
    const double b = brute_pair_norm(f, p.brute_pairs);
    const bool b_ok = std::abs(b - norm) <= tol;
    o.table.rows.push_back({"brute_force", "", fmt(b), fmt(norm), fmt(b_ok)});
    ok = ok && b_ok;
    o.headline["brute_force"] = b;
  }
  if (p.isometry_trials > 0) {
    std::seed_seq seq{ctx.seed, name_hash(s.name)};
    std::mt19937_64 rng(seq);
    std::vector<std::string> names;
    for (const auto& n : builtin::function_names())
      if (n != "step_signal") names.push_back(n);
    std::uniform_int_distribution<std::size_t> pick(0, names.size() - 1);
    std::uniform_real_distribution<double> shift(-p.shift_range, p.shift_range);
    double worst = 0.0;
    for (int t = 0; t < p.isometry_trials; ++t) {
      const std::string& name = names[pick(rng)];
      const double x = shift(rng);
      const Integrand g = builtin::function_by_name(name);
      const double ref = alexiewicz_norm(g), val = alexiewicz_norm(translate(g, x));
      const bool i_ok = std::abs(val - ref) <= std::max(tol, 1e-12);
      worst = std::max(worst, std::abs(val - ref));
      o.table.rows.push_back({"isometry:" + name, fmt(x), fmt(val), fmt(ref), fmt(i_ok)});
      ok = ok && i_ok;
    }
    o.headline["isometry_max_error"] = worst;
  }
  o.passed = ok;
}

inline void run_gap_sweep(const Scenario& s, const GapSweepParams& p, Outcome& o) {
  const Integrand& f = integrand_of(s);
  SweepReport rep = gap_sweep(f, s.ladder, {s.thresholds.tol, s.thresholds.final_gap});
  if (p.gap_equals_abs_x)
    for (auto& r : rep.rows) {
      r.bound_lower = r.bound_upper = std::abs(r.x);
      r.passed = r.passed && within_bounds(r.gap, r.bound_lower, r.bound_upper, s.thresholds.tol);
    }
  o.table = gap_table(rep.rows);
  o.passed = rep.converged && rep.all_rows_passed();
  o.headline["final_gap"] = rep.final_gap;
  o.headline["monotone"] = rep.monotone;
}

inline std::function<double(double)> psi_of(const DecayParams& p) {
  if (p.psi == "sqrt") return [](double x) { return std::sqrt(x); };
  if (p.psi == "power") return [e = p.exponent](double x) { return std::pow(x, e); };
  return [](double x) { return 1.0 / (1.0 + std::log(1.0 / x)); };
}

inline void run_decay(const Scenario& s, const DecayParams& p, Outcome& o) {
  const DecaySpec spec(psi_of(p), p.n_max);
  const Integrand f = slow_decay_construct(spec);
  std::vector<double> xs = s.ladder;
  if (xs.empty())
    for (int n = 2; n <= p.n_max; ++n) xs.push_back(1.0 / n);
  const auto rows = verify_slow_decay(f, spec, xs, s.thresholds.tol);
  o.table = gap_table(rows);
  double margin = std::numeric_limits<double>::infinity();
  bool ok = true;
  for (const auto& r : rows) {
    if (r.informational) continue;
    ok = ok && r.passed;
    margin = std::min(margin, r.gap - *r.bound_lower);
  }
  o.passed = ok;
  o.headline["min_margin"] = margin;
}

inline void run_osc_bound(const Scenario& s, const OscBoundParams& p, Outcome& o) {
  const auto rows = osc_lower_bound_check(p.bump, s.ladder, s.thresholds.tol);
  o.table = gap_table(rows);
  o.passed = std::all_of(rows.begin(), rows.end(), [](const GapReport& r) { return r.passed; });
  double worst = 0.0;
  for (const auto& r : rows) worst = std::max(worst, std::abs(r.gap / r.x - p.bump.oscillation()));
  o.headline["osc"] = p.bump.oscillation();
  o.headline["derivative_sup"] = p.bump.derivative_sup();
  o.headline["max_quotient_error"] = worst;
}

inline void run_primitive_gap(const Scenario& s, const PrimitiveGapParams& p, Outcome& o) {
  const Integrand& f = integrand_of(s);
  const double tol = s.thresholds.tol;
  const double norm = alexiewicz_norm(f);
  const bool l1 = f.absolutely_integrable();
  const double one = l1 ? one_norm(f) : 0.0;
  std::vector<double> xs = s.ladder;
  std::stable_sort(xs.begin(), xs.end(), [](double a, double b) { return std::abs(a) > std::abs(b); });
  o.table.header = {"x", "norm_gap", "norm_bound", "l1_gap", "l1_bound", "passed"};
  bool ok = true;
  for (double x : xs) {
    const double g = primitive_gap_norm(f, x), gb = norm * std::abs(x);
    bool row = g <= gb + tol;
    std::optional<double> l, lb;
    if (l1) {
      l = primitive_gap_l1(f, x);
      lb = one * std::abs(x);
      row = row && *l <= *lb + tol;
    }
    ok = ok && row;
    o.table.rows.push_back({fmt(x), fmt(g), fmt(gb), fmt(l), fmt(lb), fmt(row)});
  }
  o.headline["norm"] = norm;
  if (l1) o.headline["l1_norm"] = one;
  if (p.witness_x) {
    const auto w = hk_not_l1_witness(*p.witness_x, p.periods, p.min_r_squared);
    o.headline["witness_r_squared"] = w.r_squared;
    o.headline["witness_log_slope"] = w.log_slope;
    o.headline["witness_alexiewicz"] = w.alexiewicz_value;
    const bool div = w.certificate == DivergenceCertificate::divergent;
    o.headline["witness_divergent"] = div;
    ok = ok && div && w.alexiewicz_finite && w.r_squared >= p.min_r_squared;
  }
  o.passed = ok;
}

inline void run_weight_audit(const Scenario& s, const WeightAuditParams& p, Outcome& o) {
  const Weight& w = *s.weight;
  const double tol = s.thresholds.tol;
  const auto rc = ratio_conditions_check(w, s.ladder, p.intervals, p.eps);
  o.table.header = {"x", "sup_ratio", "variation", "reference", "measure_fraction", "bound_lhs", "bound_rhs", "passed"};
  bool ok = rc.passed();
  std::vector<double> xs = s.ladder;
  std::stable_sort(xs.begin(), xs.end(), [](double a, double b) { return std::abs(a) > std::abs(b); });
  double worst_ref = 0.0;
  for (double x : xs) {
    const RatioFunction g = weight_ratio(w, x);
    const double var = g.variation(p.variation_interval, p.levels);
    const auto vb = variation_bound_check(w, x, p.intervals.front(), p.levels, tol);
    std::optional<double> ref;
    bool row = vb.passed;
    const bool compared = p.reference_c && (p.reference_xs.empty() ||
                                            std::find(p.reference_xs.begin(), p.reference_xs.end(), x) != p.reference_xs.end());
    if (compared) {
      ref = 2.0 * std::abs(x) * std::sqrt(x * x + *p.reference_c);
      const double rel = std::abs(var - *ref) / std::max(*ref, 1e-300);
      worst_ref = std::max(worst_ref, rel);
      row = row && rel <= p.reference_rel_tol;
    }
    double fraction = 0.0;
    for (std::size_t k = 0; k < rc.fractions.size(); ++k)
      if (rc.fractions[k].x == x) fraction = std::max(fraction, rc.fractions[k].fraction);
    ok = ok && row;
    o.table.rows.push_back({fmt(x), fmt(g.bound_estimate(p.intervals.front())), fmt(var), fmt(ref), fmt(fraction), fmt(vb.lhs),
                            fmt(vb.rhs), fmt(row)});
  }
  o.headline["uniform_bound"] = rc.uniform_bound.passed;
  o.headline["uniform_variation"] = rc.uniform_variation.passed;
  o.headline["measure"] = rc.measure.passed;
  if (p.reference_c) o.headline["reference_max_rel_error"] = worst_ref;
  o.passed = ok;
}

inline void run_weighted_sweep(const Scenario& s, Outcome& o) {
  const SweepOptions opt{s.thresholds.tol, s.thresholds.final_gap};
  const SweepReport rep = s.function->integrand ? weighted_gap_sweep(*s.function->integrand, *s.weight, s.ladder, opt)
                                                : weighted_gap_sweep(s.function->signal, *s.weight, s.ladder, opt);
  o.table = gap_table(rep.rows);
  o.passed = rep.converged && rep.all_rows_passed();
  o.headline["final_gap"] = rep.final_gap;
  o.headline["monotone"] = rep.monotone;
}

inline std::vector<RealFunction> lemma_family(const LemmaParams& p) {
  std::vector<RealFunction> out;
  for (int n = 1; n <= p.count; ++n) {
    RealFunction g;
    if (p.family == "sinusoid") {
      g.eval = [n](double y) { return 1.0 + std::sin(y) / n; };
    } else if (p.family == "constants") {
      g.eval = [n](double) { return 1.0 + 1.0 / (double(n) * n); };
    } else {
      const double edge = 1.0 / n;
      g.eval = [n, edge](double y) { return (y >= 0.0 && y < edge) ? double(n) : 0.0; };
      g.kinks = {0.0, edge};
    }
    out.push_back(std::move(g));
  }
  return out;
}

inline void run_lemma(const Scenario& s, const LemmaParams& p, Outcome& o) {
  RealFunction one;
  one.eval = [](double) { return 1.0; };
  o.table.header = {"quantity", "value"};
  try {
    const auto rep = uniform_bound_lemma_check(lemma_family(p), p.E, one, p.M, 4096, s.thresholds.tol);
    o.table.rows = {{"bound", fmt(rep.bound)},
                    {"max_abs", fmt(rep.max_abs)},
                    {"max_variation", fmt(rep.max_variation)},
                    {"final_measure_fraction", fmt(rep.final_measure_fraction)},
                    {"witnessed", fmt(rep.witnessed)}};
    o.headline["bound"] = rep.bound;
    o.headline["max_abs"] = rep.max_abs;
    o.passed = rep.witnessed && !p.expect_error;
  } catch (const HypothesisViolated& e) {
    if (p.expect_error != "HypothesisViolated") throw;
    o.table.rows = {{"expected_error", "HypothesisViolated"}};
    o.headline["raised"] = "HypothesisViolated";
    o.passed = true;
  }
}

inline PeriodicIntegrand periodic_of(const Scenario& s) {
  const auto& fs = *s.function;
  if (fs.integrand) return PeriodicIntegrand(*fs.integrand);
  if (fs.signal.steps && fs.signal.steps->edges.empty())
    return PeriodicIntegrand(indicator(-std::numbers::pi, std::numbers::pi, fs.signal.steps->levels.front()));
  throw InvalidSpec("periodic data '" + fs.label + "' needs a primitive on [-pi, pi]");
}

inline void run_disc(const Scenario& s, const DiscParams& p, Outcome& o) {
  const PeriodicIntegrand f = periodic_of(s);
  bool ok = true;
  double worst_mass = 0.0;
  for (double r : p.mass_radii) worst_mass = std::max(worst_mass, std::abs(disc_kernel_mass(r) - 1.0));
  if (!p.mass_radii.empty()) {
    o.headline["mass_max_error"] = worst_mass;
    ok = worst_mass <= 1e-10;
  }
  if (!p.points.empty()) {
    o.table.header = {"r", "theta", "value", "expected", "passed"};
    for (const auto& q : p.points) {
      const double v = poisson_disc(f, q.a, q.b);
      const bool row = std::abs(v - q.expected) <= s.thresholds.tol;
      ok = ok && row;
      o.table.rows.push_back({fmt(q.a), fmt(q.b), fmt(v), fmt(q.expected), fmt(row)});
    }
    o.passed = ok;
    return;
  }
  const SweepReport rep = disc_boundary_convergence(f, s.ladder, {s.thresholds.tol, s.thresholds.final_gap});
  o.table = convergence_table(rep);
  o.headline["final_gap"] = rep.final_gap;
  o.headline["monotone"] = rep.monotone;
  o.passed = ok && rep.converged;
}

inline void run_halfplane(const Scenario& s, const HalfPlaneParams& p, Outcome& o) {
  const Weight& w = *s.weight;
  if (!p.points.empty()) {
    const HalfPlaneIntegral u(s.function->signal, w);
    o.table.header = {"x", "y", "value", "expected", "passed"};
    bool ok = true;
    for (const auto& q : p.points) {
      const double v = u(HalfPlanePoint(q.a, q.b));
      const bool row = std::abs(v - q.expected) <= s.thresholds.tol;
      ok = ok && row;
      o.table.rows.push_back({fmt(q.a), fmt(q.b), fmt(v), fmt(q.expected), fmt(row)});
    }
    o.passed = ok;
    return;
  }
  HalfPlaneOptions hp;
  hp.I = p.I;
  const SweepReport rep = halfplane_weighted_convergence(s.function->signal, w, s.ladder, {s.thresholds.tol, s.thresholds.final_gap}, hp);
  o.table = convergence_table(rep);
  o.headline["final_gap"] = rep.final_gap;
  o.headline["monotone"] = rep.monotone;
  o.headline["below_majorant"] = rep.all_rows_passed();
  o.passed = rep.converged && rep.all_rows_passed();
}

}  // namespace detail

/// Runs one scenario. Domain errors become an errored outcome (never a
/// plain failure); the table is left empty then.
inline Outcome run_scenario(const Scenario& s, const Context& ctx = {}) {
  Outcome o;
  o.name = s.name;
  o.kind = s.kind;
  o.output = s.output_path;
  try {
    switch (s.kind) {
      case Kind::norm: detail::run_norm(s, std::get<NormParams>(s.params), ctx, o); break;
      case Kind::gap_sweep: detail::run_gap_sweep(s, std::get<GapSweepParams>(s.params), o); break;
      case Kind::decay: detail::run_decay(s, std::get<DecayParams>(s.params), o); break;
      case Kind::osc_bound: detail::run_osc_bound(s, std::get<OscBoundParams>(s.params), o); break;
      case Kind::primitive_gap: detail::run_primitive_gap(s, std::get<PrimitiveGapParams>(s.params), o); break;
      case Kind::weight_audit: detail::run_weight_audit(s, std::get<WeightAuditParams>(s.params), o); break;
      case Kind::weighted_sweep: detail::run_weighted_sweep(s, o); break;
      case Kind::lemma_check: detail::run_lemma(s, std::get<LemmaParams>(s.params), o); break;
      case Kind::poisson_disc: detail::run_disc(s, std::get<DiscParams>(s.params), o); break;
      case Kind::poisson_halfplane: detail::run_halfplane(s, std::get<HalfPlaneParams>(s.params), o); break;
    }
  } catch (const std::exception& e) {
    o.passed = false;
    o.error = ScenarioFailure(s.name + ": " + e.what()).what();
    o.table = {};
    o.headline = json::object();
  }
  return o;
}

struct RunOptions {
  std::filesystem::path out_dir = "out";
  unsigned jobs = 1;
  std::optional<double> tol;
};

struct RunReport {
  std::vector<Outcome> outcomes;
  bool all_passed() const {
    return std::all_of(outcomes.begin(), outcomes.end(), [](const Outcome& o) { return o.passed && !o.error; });
  }
};

inline void write_text(const std::filesystem::path& p, const std::string& text) {
  if (p.has_parent_path()) std::filesystem::create_directories(p.parent_path());
  std::ofstream out(p, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + p.string());
  out << text;
}

inline json summary_json(const Manifest& m, const RunReport& r) {
  json j;
  j["seed"] = m.seed;
  j["versions"] = m.versions;
  j["timestamp"] = m.timestamp;
  j["passed"] = r.all_passed();
  j["scenarios"] = json::array();
  for (const auto& o : r.outcomes) {
    json e;
    e["scenario"] = o.name;
    e["kind"] = to_string(o.kind);
    e["output"] = o.output;
    e["passed"] = o.passed;
    e["status"] = o.error ? "error" : (o.passed ? "passed" : "failed");
    if (o.error) e["error"] = *o.error;
    e["headline_numbers"] = o.headline;
    j["scenarios"].push_back(std::move(e));
  }
  return j;
}

/// Runs every scenario on up to `jobs` threads, writes one CSV per scenario
/// (errored scenarios write none) and then summary.json. An empty manifest
/// writes nothing.
inline RunReport run(Manifest m, const RunOptions& opt) {
  if (opt.tol) {
    if (!(*opt.tol > 0.0)) throw SpecParseError("--tol: must be positive");
    for (auto& s : m.scenarios) s.thresholds.tol = *opt.tol;
  }
  RunReport rep;
  rep.outcomes.resize(m.scenarios.size());
  if (m.scenarios.empty()) return rep;

  const Context ctx{m.seed};
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < m.scenarios.size(); i = next++) {
      Outcome& o = rep.outcomes[i];
      o = run_scenario(m.scenarios[i], ctx);
      if (o.error) continue;
      try {
        write_text(opt.out_dir / o.output, o.table.csv());
      } catch (const std::exception& e) {
        o.passed = false;
        o.error = ScenarioFailure(o.name + ": " + e.what()).what();
      }
    }
  };
  const unsigned jobs = std::max(1u, std::min<unsigned>(opt.jobs, static_cast<unsigned>(m.scenarios.size())));
  std::vector<std::thread> pool;
  for (unsigned t = 1; t < jobs; ++t) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();

  write_text(opt.out_dir / "summary.json", summary_json(m, rep).dump(2) + "\n");
  return rep;
}

}  // namespace alexnorm::scenario
