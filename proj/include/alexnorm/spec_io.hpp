#pragma once

#include "alexnorm/builtins.hpp"
#include "alexnorm/weights.hpp"

#include "json.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <sstream>

namespace alexnorm::spec {

using json = nlohmann::json;

/// Parsed function spec. `integrand` is empty for signals whose primitive has
/// no finite limits (f = 1, the Heaviside step).
struct FunctionSpec {
  Signal signal;
  std::optional<Integrand> integrand;
  std::string label;
};

struct Builtin {
  std::string name;
  std::string category;  // function, signal or weight
  std::string summary;
};

inline const std::vector<Builtin>& builtin_table() {
  static const std::vector<Builtin> table{
      {"bump", "function", "exp(-1/(1-y^2)) on (-1,1); closed-form derivative, osc = 1/e"},
      {"constant", "weight", "w = c (param value, default 1)"},
      {"cosine", "function", "cos y on [-pi,pi], zero outside; F = sin"},
      {"exponential", "weight", "w = e^y"},
      {"gaussian", "function", "exp(-y^2); F = (sqrt(pi)/2)(1 + erf y)"},
      {"indicator_01", "function", "chi_[0,1]; norm 1, gap(x) = |x|"},
      {"ramp", "function", "y on [0,1]; F = y^2/2 there"},
      {"reciprocal_quadratic", "weight", "w = 1/(y^2+1)"},
      {"sinc_primitive", "function", "derivative of sin(y)/y; not absolutely integrable"},
      {"step_signal", "signal", "chi_[0,inf); no primitive with finite limits"},
      {"step_weight", "weight", "below for y < threshold, above otherwise (defaults 1, 2, 0)"},
  };
  return table;
}

/// Sorted names of every builtin function and weight.
inline std::vector<std::string> registry_list() {
  std::vector<std::string> out;
  for (const auto& b : builtin_table()) out.push_back(b.name);
  std::sort(out.begin(), out.end());
  return out;
}

inline std::optional<Builtin> describe(const std::string& name) {
  for (const auto& b : builtin_table())
    if (b.name == name) return b;
  return std::nullopt;
}

/// Field access with path-qualified diagnostics.
class Node {
public:
  Node(const json& j, std::string path, std::filesystem::path base = {}) : j_(&j), path_(std::move(path)), base_(std::move(base)) {}

  const json& raw() const { return *j_; }
  const std::string& path() const { return path_; }
  const std::filesystem::path& base() const { return base_; }

  [[noreturn]] void fail(const std::string& msg) const { throw SpecParseError(path_ + ": " + msg); }
  [[noreturn]] void fail(const std::string& key, const std::string& msg) const { throw SpecParseError(join(key) + ": " + msg); }

  bool has(const std::string& key) const { return j_->is_object() && j_->contains(key); }

  Node at(const std::string& key) const {
    if (!j_->is_object()) fail("expected an object");
    if (!j_->contains(key)) fail(key, "missing");
    return {(*j_)[key], join(key), base_};
  }

  Node at(std::size_t i) const { return {(*j_)[i], path_ + "[" + std::to_string(i) + "]", base_}; }

  double number(const std::string& key) const {
    const Node n = at(key);
    if (!n.raw().is_number()) n.fail("expected a number");
    const double v = n.raw().get<double>();
    if (!std::isfinite(v)) n.fail("must be finite");
    return v;
  }
  double number(const std::string& key, double fallback) const { return has(key) ? number(key) : fallback; }

  long integer(const std::string& key, long fallback) const {
    if (!has(key)) return fallback;
    const Node n = at(key);
    if (!n.raw().is_number_integer()) n.fail("expected an integer");
    return n.raw().get<long>();
  }

  std::string text(const std::string& key) const {
    const Node n = at(key);
    if (!n.raw().is_string()) n.fail("expected a string");
    return n.raw().get<std::string>();
  }
  std::string text(const std::string& key, const std::string& fallback) const { return has(key) ? text(key) : fallback; }

  bool flag(const std::string& key, bool fallback) const {
    if (!has(key)) return fallback;
    const Node n = at(key);
    if (!n.raw().is_boolean()) n.fail("expected true or false");
    return n.raw().get<bool>();
  }

  std::vector<double> numbers(const std::string& key) const {
    const Node n = at(key);
    if (!n.raw().is_array()) n.fail("expected an array of numbers");
    std::vector<double> out;
    for (std::size_t i = 0; i < n.raw().size(); ++i) {
      const Node e = n.at(i);
      if (!e.raw().is_number()) e.fail("expected a number");
      out.push_back(e.raw().get<double>());
      if (!std::isfinite(out.back())) e.fail("must be finite");
    }
    return out;
  }

  Interval interval(const std::string& key) const {
    const auto v = numbers(key);
    if (v.size() != 2 || !(v[0] <= v[1])) at(key).fail("expected [lo, hi] with lo <= hi");
    return {v[0], v[1]};
  }

private:
  std::string join(const std::string& key) const { return path_.empty() ? key : path_ + "." + key; }

  const json* j_;
  std::string path_;
  std::filesystem::path base_;
};

/// Parses JSON text, turning syntax errors into SpecParseError with a line number.
inline json parse_text(const std::string& text, const std::string& origin) {
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    const std::size_t upto = std::min<std::size_t>(e.byte, text.size());
    const long line = 1 + std::count(text.begin(), text.begin() + static_cast<std::ptrdiff_t>(upto), '\n');
    throw SpecParseError(origin + ":" + std::to_string(line) + ": " + e.what());
  }
}

inline json load_file(const std::filesystem::path& p) {
  std::ifstream in(p);
  if (!in) throw SpecParseError(p.string() + ": cannot open");
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_text(ss.str(), p.string());
}

namespace detail {

inline Integrand from_primitive(Primitive P, std::string label) {
  Integrand f;
  f.pointwise = [P](double y) { return P.derivative(y); };
  f.primitive = std::move(P);
  f.label = std::move(label);
  return f;
}

inline FunctionSpec of(Integrand f) {
  FunctionSpec s{as_signal(f), f, f.label};
  return s;
}

inline FunctionSpec builtin_function(const Node& n, const std::string& name) {
  if (name == "step_signal") {
    FunctionSpec s{builtin::step_signal(), std::nullopt, name};
    return s;
  }
  const auto names = builtin::function_names();
  if (std::find(names.begin(), names.end(), name) == names.end()) n.fail("unknown builtin '" + name + "'");
  return of(builtin::function_by_name(name));
}

inline FunctionSpec table_function(const Node& n) {
  const auto x = n.numbers("breakpoints");
  const auto v = n.numbers("values");
  if (x.size() < 2) n.fail("breakpoints", "need at least two");
  if (v.size() != x.size()) n.fail("values", "length must match breakpoints");
  for (std::size_t i = 1; i < x.size(); ++i)
    if (!(x[i] > x[i - 1])) n.fail("breakpoints", "must be strictly increasing");
  if (n.has("limit_neg") && std::abs(n.number("limit_neg") - v.front()) > 1e-12)
    n.fail("limit_neg", "must equal the first value (F is constant outside the table)");
  if (n.has("limit_pos") && std::abs(n.number("limit_pos") - v.back()) > 1e-12)
    n.fail("limit_pos", "must equal the last value (F is constant outside the table)");
  const std::string label = n.text("label", "table");
  if (n.has("derivatives")) {
    const auto d = n.numbers("derivatives");
    if (d.size() != x.size()) n.fail("derivatives", "length must match breakpoints");
    auto dl = d, dr = d;
    dl.front() = 0.0;
    dr.back() = 0.0;
    return of(from_primitive(Primitive::cubic(x, v, dl, dr), label));
  }
  return of(from_primitive(Primitive::linear(x, v), label));
}

}  // namespace detail

/// Function spec: a builtin name, a path to a spec file, or an object with
/// kind builtin | indicator | closed_form | table | constant | steps.
inline FunctionSpec parse_function(const Node& n) {
  const json& j = n.raw();
  if (j.is_string()) {
    const std::string s = j.get<std::string>();
    if (s.ends_with(".json")) {
      const auto p = n.base() / s;
      const json file = load_file(p);
      return parse_function(Node(file, p.string(), p.parent_path()));
    }
    return detail::builtin_function(n, s);
  }
  if (!j.is_object()) n.fail("expected a builtin name or an object");
  const std::string kind = n.text("kind");
  if (kind == "builtin") return detail::builtin_function(n.at("name"), n.text("name"));
  if (kind == "indicator") {
    const double a = n.number("a", 0.0), b = n.number("b", 1.0), h = n.number("height", 1.0);
    if (!(a < b)) n.fail("b", "must exceed a");
    Integrand f = indicator(a, b, h);
    if (n.has("label")) f.label = n.text("label");
    return detail::of(f);
  }
  if (kind == "closed_form") {
    const std::string name = n.text("name");
    if (name == "bump") {
      const SmoothBump b{n.number("center", 0.0), n.number("half_width", 1.0), n.number("height", 1.0)};
      if (!(b.half_width > 0.0)) n.fail("half_width", "must be positive");
      return detail::of(b.integrand());
    }
    if (name == "gaussian" || name == "sinc_primitive" || name == "cosine" || name == "ramp")
      return detail::of(builtin::function_by_name(name));
    n.at("name").fail("unknown closed form '" + name + "'");
  }
  if (kind == "table") return detail::table_function(n);
  if (kind == "constant") {
    const double c = n.number("value", 1.0);
    FunctionSpec s{signal_from_steps(Steps({}, {c}), "constant"), std::nullopt, "constant"};
    if (c == 0.0) s.integrand = indicator(0.0, 1.0, 0.0);
    return s;
  }
  if (kind == "steps") {
    const auto edges = n.numbers("edges");
    const auto levels = n.numbers("levels");
    if (levels.size() != edges.size() + 1) n.fail("levels", "need one more level than edges");
    for (std::size_t i = 1; i < edges.size(); ++i)
      if (!(edges[i] > edges[i - 1])) n.fail("edges", "must be strictly increasing");
    const Steps s(edges, levels);
    const std::string label = n.text("label", "steps");
    if (levels.front() == 0.0 && levels.back() == 0.0) return detail::of(from_steps(s, label));
    FunctionSpec out{signal_from_steps(s, label), std::nullopt, label};
    return out;
  }
  n.at("kind").fail("unknown function kind '" + kind + "'");
}

namespace detail {

inline Weight named_weight(const Node& n, const std::string& name) {
  try {
    if (name == "reciprocal_quadratic") return weight::reciprocal_quadratic();
    if (name == "exponential") return weight::exponential();
    if (name == "step_weight" || name == "step")
      return weight::step(n.number("below", 1.0), n.number("above", 2.0), n.number("threshold", 0.0));
    if (name == "constant") return weight::constant(n.number("value", 1.0));
  } catch (const DegenerateWeight& e) {
    n.fail(e.what());
  }
  n.at("name").fail("unknown weight '" + name + "'");
}

}  // namespace detail

/// Weight spec: a builtin name, a path to a spec file, or an object with
/// kind builtin | closed_form | table. A closed_form weight names one of the
/// parametric families.
inline Weight parse_weight(const Node& n) {
  const json& j = n.raw();
  if (j.is_string()) {
    const std::string s = j.get<std::string>();
    if (s.ends_with(".json")) {
      const auto p = n.base() / s;
      const json file = load_file(p);
      return parse_weight(Node(file, p.string(), p.parent_path()));
    }
    const auto names = weight::names();
    if (std::find(names.begin(), names.end(), s) == names.end()) n.fail("unknown builtin weight '" + s + "'");
    return weight::by_name(s);
  }
  if (!j.is_object()) n.fail("expected a builtin name or an object");
  const std::string kind = n.text("kind");
  if (kind == "builtin" || kind == "closed_form") return detail::named_weight(n, n.text("name"));
  if (kind == "table") {
    const auto x = n.numbers("breakpoints");
    const auto v = n.numbers("values");
    if (x.empty() || v.size() != x.size()) n.fail("values", "length must match breakpoints");
    try {
      return weight::table(x, v, n.flag("linear", true));
    } catch (const Error& e) {
      n.fail(e.what());
    } catch (const std::invalid_argument& e) {
      n.fail(e.what());
    }
  }
  n.at("kind").fail("unknown weight kind '" + kind + "'");
}

}  // namespace alexnorm::spec
