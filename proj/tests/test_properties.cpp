#include "catch_amalgamated.hpp"

#include "alexnorm/builtins.hpp"
#include "alexnorm/poisson.hpp"
#include "alexnorm/variation.hpp"

#include <random>

using namespace alexnorm;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

namespace {

// Small deterministic generators; every property runs over `kTrials` draws.
constexpr int kTrials = 60;

struct Gen {
  std::mt19937_64 rng;
  explicit Gen(std::uint64_t seed) : rng(seed) {}

  double uniform(double a, double b) { return std::uniform_real_distribution<double>(a, b)(rng); }
  int integer(int a, int b) { return std::uniform_int_distribution<int>(a, b)(rng); }

  double shift() {
    const double x = uniform(-3.0, 3.0);
    return x == 0.0 ? 0.5 : x;
  }

  // compactly supported step function with 1-6 pieces
  Integrand steps() {
    const int k = integer(2, 7);
    std::vector<double> edges;
    while (static_cast<int>(edges.size()) < k) {
      edges.push_back(std::round(uniform(-5.0, 5.0) * 64.0) / 64.0);
      std::sort(edges.begin(), edges.end());
      edges.erase(std::unique(edges.begin(), edges.end()), edges.end());
    }
    std::vector<double> levels{0.0};
    for (int i = 1; i < k; ++i) levels.push_back(uniform(-2.0, 2.0));
    levels.push_back(0.0);
    return from_steps(Steps(edges, levels));
  }

  // random piecewise-linear primitive with 2-9 nodes
  Primitive table() {
    const int k = integer(2, 9);
    std::vector<double> x, v;
    double t = uniform(-4.0, 0.0);
    for (int i = 0; i < k; ++i) {
      x.push_back(t);
      v.push_back(uniform(-1.0, 1.0));
      t += uniform(0.1, 1.5);
    }
    return Primitive::linear(x, v);
  }

  // a + sum_k c_k sin(w_k y + p_k)
  RealFunction trig() {
    struct Term {
      double c, w, p;
    };
    std::vector<Term> terms;
    for (int i = integer(1, 4); i > 0; --i) terms.push_back({uniform(-1.0, 1.0), uniform(0.2, 6.0), uniform(0.0, 6.0)});
    RealFunction h;
    h.eval = [terms, a = uniform(-1.0, 1.0)](double y) {
      double s = a;
      for (const auto& t : terms) s += t.c * std::sin(t.w * y + t.p);
      return s;
    };
    return h;
  }

  Interval interval() {
    const double a = uniform(-5.0, 4.0);
    return {a, a + uniform(0.1, 5.0)};
  }
};

double steps_total_variation(const Integrand& f) {
  const auto& l = f.steps->levels;
  double v = 0.0;
  for (std::size_t i = 1; i < l.size(); ++i) v += std::abs(l[i] - l[i - 1]);
  return v;
}

}  // namespace

TEST_CASE("translation is an isometry") {
  Gen g(101);
  for (int t = 0; t < kTrials; ++t) {
    const Integrand f = g.steps();
    const double x = g.shift();
    CHECK_THAT(alexiewicz_norm(translate(f, x)), WithinAbs(alexiewicz_norm(f), 1e-12));
  }
  for (const auto& name : builtin::function_names()) {
    if (name == "step_signal") continue;
    const Integrand f = builtin::function_by_name(name);
    const double x = g.shift();
    CHECK_THAT(alexiewicz_norm(translate(f, x)), WithinAbs(alexiewicz_norm(f), 1e-12));
  }
}

TEST_CASE("translation gap is even in x and bounded by the variation") {
  Gen g(202);
  for (int t = 0; t < kTrials; ++t) {
    const Integrand f = g.steps();
    const double x = g.shift();
    const double gap = translation_gap(f, x);
    CHECK_THAT(translation_gap(f, -x), WithinAbs(gap, 1e-12));
    CHECK(gap <= 2.0 * alexiewicz_norm(f) + 1e-12);
    CHECK(gap <= std::abs(x) * steps_total_variation(f) + 1e-12);
  }
}

TEST_CASE("translation gap is subadditive in the shift") {
  Gen g(303);
  for (int t = 0; t < kTrials; ++t) {
    const Integrand f = g.steps();
    const double x = g.shift(), y = g.shift();
    CHECK(translation_gap(f, x + y) <= translation_gap(f, x) + translation_gap(f, y) + 1e-12);
  }
}

TEST_CASE("norm is a seminorm") {
  Gen g(404);
  for (int t = 0; t < kTrials; ++t) {
    const Integrand f = g.steps(), h = g.steps();
    const double c = g.uniform(-3.0, 3.0);
    CHECK_THAT(alexiewicz_norm(combine(f, c, h, 0.0)), WithinAbs(std::abs(c) * alexiewicz_norm(f), 1e-12));
    CHECK(alexiewicz_norm(combine(f, 1.0, h, 1.0)) <= alexiewicz_norm(f) + alexiewicz_norm(h) + 1e-12);
  }
}

TEST_CASE("integrals are additive") {
  Gen g(505);
  for (int t = 0; t < kTrials; ++t) {
    const Integrand f = g.steps();
    double a = g.uniform(-6.0, 6.0), b = g.uniform(-6.0, 6.0), c = g.uniform(-6.0, 6.0);
    CHECK_THAT(integral(f, {std::min(a, c), std::max(a, c)}),
               WithinAbs(integral(f, {std::min(a, c), std::max(a, c)}), 0.0));
    if (a > b) std::swap(a, b);
    if (b > c) std::swap(b, c);
    if (a > b) std::swap(a, b);
    CHECK_THAT(integral(f, {a, c}), WithinAbs(integral(f, {a, b}) + integral(f, {b, c}), 1e-14));
  }
}

TEST_CASE("primitive gap is bounded by norm times shift") {
  Gen g(606);
  for (int t = 0; t < 30; ++t) {
    const Integrand f = g.steps();
    const double x = g.shift();
    CHECK(primitive_gap_norm(f, x) <= alexiewicz_norm(f) * std::abs(x) + 1e-9);
    CHECK(primitive_gap_l1(f, x) <= one_norm(f) * std::abs(x) + 1e-9);
  }
}

TEST_CASE("oscillation never exceeds variation") {
  Gen g(707);
  for (int t = 0; t < kTrials; ++t) {
    const RealFunction h = g.trig();
    const Interval I = g.interval();
    const int levels = g.integer(2, 12);
    CHECK(oscillation(h, I, levels) <= variation(h, I, levels) + 1e-12);
  }
}

TEST_CASE("variation grows with the refinement level") {
  Gen g(808);
  for (int t = 0; t < 30; ++t) {
    const RealFunction h = g.trig();
    const Interval I = g.interval();
    double prev = 0.0;
    for (int levels = 1; levels <= 14; ++levels) {
      const double v = variation(h, I, levels);
      CHECK(v >= prev - 1e-12);
      prev = v;
    }
  }
}

TEST_CASE("variation of a linear table is exact") {
  Gen g(909);
  for (int t = 0; t < kTrials; ++t) {
    const Primitive F = g.table();
    const auto* tab = F.table();
    double exact = 0.0;
    for (std::size_t i = 1; i < tab->v.size(); ++i) exact += std::abs(tab->v[i] - tab->v[i - 1]);
    const Interval I(tab->x.front() - 1.0, tab->x.back() + 1.0);
    CHECK_THAT(variation(F, I, 3), WithinAbs(exact, 1e-12));
    for (std::size_t i = 0; i < tab->x.size(); ++i) CHECK(F(tab->x[i]) == tab->v[i]);
  }
}

TEST_CASE("ratio function is a cocycle") {
  Gen g(1010);
  for (const Weight& w : {weight::reciprocal_quadratic(), weight::exponential(), weight::step(1.0, 3.0, 0.2)}) {
    for (int t = 0; t < kTrials; ++t) {
      const double x = g.shift(), xp = g.shift(), y = g.uniform(-8.0, 8.0);
      const auto gx = weight_ratio(w, x), gxp = weight_ratio(w, xp), gsum = weight_ratio(w, x + xp);
      CHECK_THAT(gsum(y), WithinRel(gx(y + xp) * gxp(y), 1e-12));
      CHECK(weight_ratio(w, 0.0)(y) == 1.0);
    }
  }
}

TEST_CASE("disc mean value at the centre") {
  Gen g(1111);
  for (int t = 0; t < 20; ++t) {
    const double a = g.uniform(-3.0, 0.0), b = g.uniform(0.1, 3.0), h = g.uniform(-2.0, 2.0);
    const PeriodicIntegrand f(indicator(a, b, h));
    CHECK_THAT(poisson_disc(f, 0.0, g.uniform(-3.0, 3.0)), WithinAbs(h * (b - a) / (2 * std::numbers::pi), 1e-14));
    CHECK_THAT(disc_kernel_mass(g.uniform(0.0, 0.995)), WithinAbs(1.0, 1e-10));
  }
}

TEST_CASE("half-plane extension ignores the weight and is harmonic") {
  Gen g(1212);
  for (int t = 0; t < 15; ++t) {
    const Signal f = as_signal(g.steps());
    const HalfPlaneIntegral plain(f, weight::constant()), weighted(f, weight::reciprocal_quadratic());
    const double x = g.uniform(-6.0, 6.0), y = g.uniform(0.05, 3.0);
    const double u = plain(HalfPlanePoint(x, y));
    CHECK_THAT(weighted(HalfPlanePoint(x, y)), WithinAbs(u, 1e-8));
    const double h = 1e-2 * y;
    const double lap = (plain(HalfPlanePoint(x + h, y)) + plain(HalfPlanePoint(x - h, y)) + plain(HalfPlanePoint(x, y + h)) +
                        plain(HalfPlanePoint(x, y - h)) - 4 * u) /
                       (h * h);
    CHECK(std::abs(lap) < 1e-3 / (y * y));
  }
}
