#pragma once

#include <boost/math/tools/minima.hpp>
#include <boost/math/tools/roots.hpp>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <span>
#include <vector>

namespace alexnorm::search {

struct Extrema {
  double min = std::numeric_limits<double>::infinity();
  double max = -std::numeric_limits<double>::infinity();
  double argmin = 0.0;
  double argmax = 0.0;

  double oscillation() const { return max - min; }
  double sup_abs() const { return std::max(std::abs(max), std::abs(min)); }

  void offer(double y, double v) {
    if (!std::isfinite(v)) return;
    if (v < min) { min = v; argmin = y; }
    if (v > max) { max = v; argmax = y; }
  }
  void merge(const Extrema& o) {
    if (o.min < min) { min = o.min; argmin = o.argmin; }
    if (o.max > max) { max = o.max; argmax = o.argmax; }
  }
};

/// Sorted, de-duplicated copy of finite values.
inline std::vector<double> merge_nodes(std::vector<double> v) {
  std::erase_if(v, [](double y) { return !std::isfinite(y); });
  std::sort(v.begin(), v.end());
  v.erase(std::unique(v.begin(), v.end()), v.end());
  return v;
}

/// Nodes of [lo, hi] refined so that no cell is longer than (hi-lo)/cells,
/// keeping every kink that falls inside.
inline std::vector<double> refine_nodes(double lo, double hi, std::size_t cells, std::span<const double> kinks) {
  std::vector<double> out;
  out.reserve(cells + kinks.size() + 2);
  for (std::size_t k = 0; k <= cells; ++k)
    out.push_back(lo + (hi - lo) * static_cast<double>(k) / static_cast<double>(cells));
  out.back() = hi;
  for (double k : kinks)
    if (k >= lo && k <= hi) out.push_back(k);
  return merge_nodes(std::move(out));
}

/// Geometric ladder of points running away from `anchor` in direction `dir`
/// (+1 or -1): anchor + dir*scale*2^k for k = 0..count-1.
inline std::vector<double> geometric_tail(double anchor, int dir, double scale, int count) {
  std::vector<double> out;
  double step = scale;
  for (int k = 0; k < count; ++k, step *= 2.0) out.push_back(anchor + dir * step);
  return out;
}

namespace detail {

inline double brent_arg(const std::function<double(double)>& g, double a, double b) {
  constexpr int bits = std::numeric_limits<double>::digits / 2 + 2;
  std::uintmax_t iters = 200;
  return boost::math::tools::brent_find_minima(g, a, b, bits, iters).first;
}

}  // namespace detail

/// Global extrema of f over sorted finite nodes. Each cell between nodes gets
/// `samples_per_piece` equispaced samples; the best `polish` local maxima and
/// minima among the samples are then refined by Brent's method inside their
/// neighbouring cells. Exact for functions that are monotone between nodes
/// (e.g. piecewise-linear with kinks in `nodes`).
inline Extrema find_extrema(const std::function<double(double)>& f, std::span<const double> nodes,
                            int samples_per_piece = 1, int polish = 8) {
  Extrema ex;
  if (nodes.empty()) return ex;
  std::vector<double> ys, vs;
  const int m = std::max(1, samples_per_piece);
  ys.reserve(nodes.size() * static_cast<std::size_t>(m));
  for (std::size_t i = 0; i + 1 < nodes.size(); ++i) {
    const double a = nodes[i], b = nodes[i + 1];
    for (int k = 0; k < m; ++k) ys.push_back(a + (b - a) * static_cast<double>(k) / m);
  }
  ys.push_back(nodes.back());
  vs.resize(ys.size());
  for (std::size_t i = 0; i < ys.size(); ++i) {
    vs[i] = f(ys[i]);
    ex.offer(ys[i], vs[i]);
  }
  if (polish <= 0 || ys.size() < 3) return ex;

  std::vector<std::size_t> maxima, minima;
  for (std::size_t i = 1; i + 1 < ys.size(); ++i) {
    if (vs[i] >= vs[i - 1] && vs[i] >= vs[i + 1] && (vs[i] > vs[i - 1] || vs[i] > vs[i + 1])) maxima.push_back(i);
    if (vs[i] <= vs[i - 1] && vs[i] <= vs[i + 1] && (vs[i] < vs[i - 1] || vs[i] < vs[i + 1])) minima.push_back(i);
  }
  auto top = [&](std::vector<std::size_t>& idx, bool largest) {
    const std::size_t keep = std::min<std::size_t>(idx.size(), static_cast<std::size_t>(polish));
    std::partial_sort(idx.begin(), idx.begin() + static_cast<std::ptrdiff_t>(keep), idx.end(),
                      [&](std::size_t p, std::size_t q) { return largest ? vs[p] > vs[q] : vs[p] < vs[q]; });
    idx.resize(keep);
  };
  top(maxima, true);
  top(minima, false);
  for (std::size_t i : maxima) {
    const double y = detail::brent_arg([&](double t) { return -f(t); }, ys[i - 1], ys[i + 1]);
    ex.offer(y, f(y));
  }
  for (std::size_t i : minima) {
    const double y = detail::brent_arg(f, ys[i - 1], ys[i + 1]);
    ex.offer(y, f(y));
  }
  return ex;
}

/// Splits [a, b] at the sign changes of f detected on `samples` equispaced
/// cells; returns a, the located roots, then b.
inline std::vector<double> split_at_roots(const std::function<double(double)>& f, double a, double b, int samples) {
  std::vector<double> out{a};
  double ya = a, fa = f(a);
  for (int k = 1; k <= samples; ++k) {
    const double yb = (k == samples) ? b : a + (b - a) * static_cast<double>(k) / samples;
    const double fb = f(yb);
    if ((fa < 0.0 && fb > 0.0) || (fa > 0.0 && fb < 0.0)) {
      std::uintmax_t iters = 100;
      auto tol = [](double l, double r) { return std::abs(r - l) <= 4 * std::numeric_limits<double>::epsilon() * std::max(1.0, std::abs(l)); };
      const auto [l, r] = boost::math::tools::toms748_solve(f, ya, yb, fa, fb, tol, iters);
      const double root = 0.5 * (l + r);
      if (root > out.back() && root < b) out.push_back(root);
    }
    ya = yb;
    fa = fb;
  }
  if (b > out.back()) out.push_back(b);
  return out;
}

}  // namespace alexnorm::search
