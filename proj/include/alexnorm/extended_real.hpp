#pragma once

#include <cmath>
#include <compare>
#include <limits>
#include <stdexcept>
#include <vector>

namespace alexnorm {

/// A point of the extended real line: a finite real, -inf or +inf.
/// NaN is rejected on construction so the order below is total.
class ExtendedReal {
public:
  constexpr ExtendedReal() = default;
  ExtendedReal(double v) : v_(v) {  // NOLINT: implicit from double is intended
    if (std::isnan(v)) throw std::invalid_argument("ExtendedReal: NaN");
  }

  static constexpr ExtendedReal neg_inf() { return ExtendedReal(Raw{-std::numeric_limits<double>::infinity()}); }
  static constexpr ExtendedReal pos_inf() { return ExtendedReal(Raw{std::numeric_limits<double>::infinity()}); }

  constexpr bool is_finite() const { return v_ > -kInf && v_ < kInf; }
  constexpr bool is_neg_inf() const { return v_ == -kInf; }
  constexpr bool is_pos_inf() const { return v_ == kInf; }
  constexpr double value() const { return v_; }

  friend constexpr auto operator<=>(ExtendedReal a, ExtendedReal b) {
    // never NaN, so the partial order is total
    return a.v_ < b.v_ ? std::strong_ordering::less
         : a.v_ > b.v_ ? std::strong_ordering::greater
                       : std::strong_ordering::equal;
  }
  friend constexpr bool operator==(ExtendedReal a, ExtendedReal b) { return a.v_ == b.v_; }

private:
  static constexpr double kInf = std::numeric_limits<double>::infinity();
  struct Raw { double v; };
  constexpr explicit ExtendedReal(Raw r) : v_(r.v) {}
  double v_ = 0.0;
};

/// Closed interval [a, b] of the extended real line.
struct Interval {
  ExtendedReal a;
  ExtendedReal b;

  Interval() = default;
  Interval(ExtendedReal lo, ExtendedReal hi) : a(lo), b(hi) {
    if (hi < lo) throw std::invalid_argument("Interval: a > b");
  }
  static Interval whole_line() { return {ExtendedReal::neg_inf(), ExtendedReal::pos_inf()}; }

  bool is_compact() const { return a.is_finite() && b.is_finite(); }
  double lo() const { return a.value(); }
  double hi() const { return b.value(); }
  double length() const { return b.value() - a.value(); }
  bool contains(double y) const { return a.value() <= y && y <= b.value(); }
  Interval shifted(double x) const { return {a.value() + x, b.value() + x}; }
};

/// Strictly increasing finite points, at least two.
class Partition {
public:
  explicit Partition(std::vector<double> points) : points_(std::move(points)) {
    if (points_.size() < 2) throw std::invalid_argument("Partition: need >= 2 points");
    for (std::size_t i = 0; i < points_.size(); ++i) {
      if (!std::isfinite(points_[i])) throw std::invalid_argument("Partition: non-finite point");
      if (i > 0 && !(points_[i - 1] < points_[i]))
        throw std::invalid_argument("Partition: points must be strictly increasing");
    }
  }

  /// Uniform partition of a compact interval into `cells` cells.
  static Partition uniform(const Interval& I, std::size_t cells) {
    if (!I.is_compact() || cells == 0 || !(I.lo() < I.hi()))
      throw std::invalid_argument("Partition::uniform: need a nondegenerate compact interval");
    std::vector<double> p(cells + 1);
    for (std::size_t k = 0; k <= cells; ++k)
      p[k] = I.lo() + (I.hi() - I.lo()) * static_cast<double>(k) / static_cast<double>(cells);
    p.back() = I.hi();
    return Partition(std::move(p));
  }

  const std::vector<double>& points() const { return points_; }
  std::size_t size() const { return points_.size(); }
  Interval span() const { return {points_.front(), points_.back()}; }

private:
  std::vector<double> points_;
};

}  // namespace alexnorm
