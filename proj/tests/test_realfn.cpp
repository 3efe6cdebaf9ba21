#include "catch_amalgamated.hpp"

#include "alexnorm/variation.hpp"

#include <cmath>
#include <numbers>

using namespace alexnorm;
using Catch::Matchers::WithinAbs;

namespace {

const ExtendedReal ninf = ExtendedReal::neg_inf();
const ExtendedReal pinf = ExtendedReal::pos_inf();

// composite Simpson on [a,b] with n (even) cells
template <class F>
double simpson(F f, double a, double b, int n) {
  const double h = (b - a) / n;
  double s = f(a) + f(b);
  for (int k = 1; k < n; ++k) s += (k % 2 ? 4.0 : 2.0) * f(a + k * h);
  return s * h / 3.0;
}

}  // namespace

TEST_CASE("extended reals order and reject NaN") {
  CHECK(ninf < ExtendedReal(-1e308));
  CHECK(ExtendedReal(1e308) < pinf);
  CHECK(ninf.is_neg_inf());
  CHECK_FALSE(ExtendedReal(3.0).is_neg_inf());
  CHECK_THROWS(ExtendedReal(std::nan("")));
  CHECK_THROWS(Interval(1.0, 0.0));
  CHECK(Interval::whole_line().contains(1e300));
}

TEST_CASE("partition needs increasing points") {
  CHECK_THROWS(Partition({0.0}));
  CHECK_THROWS(Partition({0.0, 0.0}));
  const auto p = Partition::uniform({0.0, 1.0}, 4);
  REQUIRE(p.points().size() == 5);
  CHECK(p.points().back() == 1.0);
}

TEST_CASE("eval_primitive on the indicator primitive") {
  const Integrand f = indicator(0.0, 1.0);
  CHECK(eval_primitive(f.primitive, 0.5) == 0.5);
  CHECK(eval_primitive(f.primitive, pinf) == 1.0);
  CHECK(eval_primitive(f.primitive, ninf) == 0.0);
  CHECK(eval_primitive(f.primitive, -3.0) == 0.0);
  CHECK(eval_primitive(f.primitive, 7.0) == 1.0);
}

TEST_CASE("table values are exact at breakpoints") {
  const std::vector<double> x{-2.0, -0.5, 0.25, 3.0};
  const std::vector<double> v{1.0, -4.0, 0.125, 2.5};
  const auto F = Primitive::linear(x, v);
  for (std::size_t i = 0; i < x.size(); ++i) CHECK(F(x[i]) == v[i]);
  const auto C = Primitive::cubic(x, v, {0, 1, 2, 3}, {4, -1, 0.5, 0});
  for (std::size_t i = 0; i < x.size(); ++i) CHECK(C(x[i]) == v[i]);
  CHECK(F.limit_neg() == 1.0);
  CHECK(F.limit_pos() == 2.5);
}

TEST_CASE("integral is a difference of evaluations") {
  const Integrand f = indicator(0.0, 1.0);
  CHECK(integral(f, {0.0, 1.0}) == 1.0);
  CHECK(integral(f, Interval::whole_line()) == 1.0);
  CHECK(integral(f, {-1.0, 0.3}) + integral(f, {0.3, 2.0}) == integral(f, {-1.0, 2.0}));
}

TEST_CASE("integral of the sinc primitive over the line is zero") {
  Primitive::ClosedForm cf;
  cf.F = [](double y) { return y == 0.0 ? 1.0 : std::sin(y) / y; };
  cf.window = Interval(-64.0, 64.0);
  const auto F = Primitive::closed_form(cf);
  Integrand f;
  f.primitive = F;
  CHECK(integral(f, Interval::whole_line()) == 0.0);
  CHECK(std::abs(F(1e6)) < 2e-6);
  CHECK(std::abs(F(-1e6)) < 2e-6);
}

TEST_CASE("build_primitive_from_pointwise is exact for an indicator") {
  auto chi = [](double y) { return (y >= 0.0 && y < 1.0) ? 1.0 : 0.0; };
  BuildOptions opt;
  opt.kinks = {0.0, 1.0};
  const auto F = build_primitive_from_pointwise(chi, {-1.0, 2.0}, 1e-10, opt);
  CHECK_THAT(F(2.0), WithinAbs(1.0, 1e-10));
  for (double y = -1.0; y <= 2.0; y += 0.0625) CHECK_THAT(F(y), WithinAbs(std::clamp(y, 0.0, 1.0), 1e-10));
}

TEST_CASE("Gaussian primitive reaches sqrt(pi)") {
  auto g = [](double y) { return std::exp(-y * y); };
  const auto F = build_primitive_from_pointwise(g, {-8.0, 8.0}, 1e-10);
  const double oracle = simpson(g, -8.0, 8.0, 1'000'000);
  CHECK_THAT(oracle, WithinAbs(std::sqrt(std::numbers::pi), 1e-12));
  CHECK_THAT(F.limit_pos(), WithinAbs(oracle, 1e-9));
  // every subinterval agrees with an independent quadrature within 10 tol
  for (double a = -7.5; a < 7.5; a += 1.3) {
    const double b = a + 0.9;
    CHECK_THAT(F(b) - F(a), WithinAbs(simpson(g, a, b, 2000), 1e-9));
  }
}

TEST_CASE("cos(y)/y on [1, inf) needs tail acceleration") {
  auto f = [](double y) { return std::cos(y) / y; };
  const Interval half(1.0, pinf);
  CHECK_THROWS_AS(build_primitive_from_pointwise(f, half, 1e-10), NonConvergentTail);
  BuildOptions opt;
  opt.tail = TailMode::accelerate;
  const auto F = build_primitive_from_pointwise(f, half, 1e-10, opt);
  // int_1^inf cos(y)/y = -Ci(1)
  const double ci1 = 0.33740392290096816;
  CHECK_THAT(F.limit_pos() - F(1.0), WithinAbs(-ci1, 1e-7));
}

TEST_CASE("panel budget exhaustion raises ToleranceNotMet") {
  BuildOptions opt;
  opt.max_panels = 8;
  auto f = [](double y) { return std::sin(50.0 * y); };
  CHECK_THROWS_AS(build_primitive_from_pointwise(f, {0.0, 10.0}, 1e-12, opt), ToleranceNotMet);
}

TEST_CASE("variation of simple functions") {
  RealFunction id{[](double y) { return y; }};
  CHECK_THAT(variation(id, {0.0, 1.0}, 1), WithinAbs(1.0, 1e-15));
  CHECK_THAT(variation(id, {0.0, 1.0}, 12), WithinAbs(1.0, 1e-15));

  RealFunction s{[](double y) { return std::sin(y); }};
  CHECK_THAT(oscillation(s, {0.0, 2 * std::numbers::pi}, 4), WithinAbs(2.0, 1e-15));
  CHECK_THAT(variation(s, {0.0, 2 * std::numbers::pi}, 4), WithinAbs(4.0, 1e-12));

  RealFunction chi{[](double y) { return (y >= 0.0 && y < 1.0) ? 1.0 : 0.0; }, {0.0, 1.0}};
  CHECK(oscillation(chi, {-1.0, 2.0}, 3) == 1.0);
}

TEST_CASE("oscillation of a primitive over the extended line") {
  const Integrand f = indicator(0.0, 1.0);
  CHECK(oscillation(f.primitive, Interval::whole_line(), 4) == 1.0);
  CHECK(one_norm(f) == 1.0);
}

TEST_CASE("integrands compare by primitive") {
  Integrand a = indicator(0.0, 1.0);
  Integrand b = a;
  b.pointwise = [](double y) { return (y > 0.0 && y <= 1.0) ? 1.0 : 0.0; };  // differs on a null set
  CHECK(same_integrable(a, b));
  CHECK_FALSE(same_integrable(a, indicator(0.0, 1.5)));
  CHECK(derivative_matches(a, {0.25, 0.5, 1.5, -2.0}, 1e-9));
}
