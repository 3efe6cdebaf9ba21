#include "catch_amalgamated.hpp"

#include "alexnorm/builtins.hpp"

#include <cmath>
#include <numbers>

using namespace alexnorm;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

namespace {

// sup over grid pairs a < b of |G(b) - G(a)|
template <class G>
double brute_pair_sup(G g, double lo, double hi, int n) {
  std::vector<double> v(static_cast<std::size_t>(n) + 1);
  for (int k = 0; k <= n; ++k) v[static_cast<std::size_t>(k)] = g(lo + (hi - lo) * k / n);
  double best = 0.0;
  for (std::size_t i = 0; i < v.size(); ++i)
    for (std::size_t j = i + 1; j < v.size(); ++j) best = std::max(best, std::abs(v[j] - v[i]));
  return best;
}

Integrand up_down() { return combine(indicator(0.0, 1.0), 1.0, indicator(1.0, 2.0), -1.0); }

}  // namespace

TEST_CASE("norm of chi_[0,1] and a signed pair") {
  const Integrand chi = builtin::indicator_01();
  CHECK_THAT(alexiewicz_norm(chi), WithinAbs(1.0, 1e-12));
  CHECK_THAT(brute_pair_sup([&](double y) { return chi.primitive(y); }, -1.0, 2.0, 600), WithinAbs(1.0, 1e-12));

  const Integrand ud = up_down();
  CHECK_THAT(alexiewicz_norm(ud), WithinAbs(1.0, 1e-12));
  CHECK_THAT(brute_pair_sup([&](double y) { return ud.primitive(y); }, -1.0, 3.0, 800), WithinAbs(1.0, 1e-12));
  CHECK_THAT(alexiewicz_norm_halfline(ud), WithinAbs(1.0, 1e-12));

  CHECK(alexiewicz_norm(indicator(0.0, 1.0, 0.0)) == 0.0);
}

TEST_CASE("half-line norm is equivalent") {
  for (const char* name : {"indicator_01", "ramp", "sinc_primitive", "gaussian", "cosine"}) {
    const Integrand f = builtin::function_by_name(name);
    const double full = alexiewicz_norm(f), half = alexiewicz_norm_halfline(f);
    CHECK(half <= full + 1e-12);
    CHECK(full <= 2.0 * half + 1e-12);
  }
  // F - F(-inf) of the cosine is sin on [-pi,pi]: half-line norm 1, full norm 2
  CHECK_THAT(alexiewicz_norm(builtin::cosine()), WithinAbs(2.0, 1e-12));
  CHECK_THAT(alexiewicz_norm_halfline(builtin::cosine()), WithinAbs(1.0, 1e-12));
}

TEST_CASE("translate shifts the primitive") {
  const Integrand chi = builtin::indicator_01();
  const Integrand moved = translate(chi, 1.0);
  CHECK(same_integrable(moved, indicator(1.0, 2.0)));
  CHECK(moved.pointwise(1.5) == 1.0);
  CHECK(moved.pointwise(0.5) == 0.0);
  CHECK(same_integrable(translate(chi, 0.0), chi));
  CHECK(alexiewicz_norm(translate(up_down(), -0.37)) == alexiewicz_norm(up_down()));
}

TEST_CASE("translation gap of the indicator") {
  const Integrand chi = builtin::indicator_01();
  const double x = 0.25;
  const double oracle = brute_pair_sup([&](double y) { return chi.primitive(y - x) - chi.primitive(y); }, -1.0, 2.0, 1200);
  CHECK_THAT(oracle, WithinAbs(0.25, 1e-12));
  CHECK_THAT(translation_gap(chi, x), WithinAbs(oracle, 1e-12));
  CHECK(translation_gap(chi, 0.0) == 0.0);
  for (double s : {0.1, 0.3, 0.77, 1.5}) CHECK_THAT(translation_gap(chi, s), WithinAbs(translation_gap(chi, -s), 1e-15));
}

TEST_CASE("gap sweep of the indicator halves") {
  const auto rep = gap_sweep(builtin::indicator_01(), {0.0625, 0.5, 0.125, 0.25});
  REQUIRE(rep.rows.size() == 4);
  const double want[] = {0.5, 0.25, 0.125, 0.0625};
  for (std::size_t i = 0; i < 4; ++i) {
    CHECK(rep.rows[i].x == want[i]);
    CHECK_THAT(rep.rows[i].gap, WithinAbs(want[i], 1e-15));
    CHECK(rep.rows[i].passed);
  }
  CHECK(rep.monotone);
  CHECK_FALSE(rep.converged);  // 0.0625 is above the default threshold
  CHECK(gap_sweep(builtin::indicator_01(), {0.5, 0.001}).converged);
  CHECK_THROWS(gap_sweep(builtin::indicator_01(), {}));

  const auto zero = gap_sweep(indicator(0.0, 1.0, 0.0), {0.5, 0.1});
  for (const auto& r : zero.rows) CHECK(r.gap == 0.0);
}

TEST_CASE("gap sweep of the sinc primitive derivative tends to zero") {
  const auto rep = gap_sweep(builtin::sinc_primitive(), {0.5, 0.25, 0.125, 0.0625, 0.03125});
  CHECK(rep.monotone);
  CHECK(rep.all_rows_passed());
  CHECK(rep.final_gap < 0.05);
  // H(y) = sinc(y-x) - sinc(y) is close to -x sinc'(y) for small x
  const double x = 1e-3;
  const auto ex = search::find_extrema([](double y) { return (y * std::cos(y) - std::sin(y)) / (y * y); },
                                       search::refine_nodes(0.1, 20.0, 4000, {}), 1, 8);
  const double osc_deriv = 2.0 * ex.sup_abs();  // sinc' is odd
  CHECK_THAT(translation_gap(builtin::sinc_primitive(), x) / x, WithinRel(osc_deriv, 1e-2));
}

TEST_CASE("slow decay envelopes for sqrt") {
  const DecaySpec spec([](double x) { return std::sqrt(x); }, 256);
  for (double x = 0.001; x <= 1.0; x += 0.00731) {
    const double p = spec.psi(x);
    CHECK(spec.psi1(x) >= p);
    CHECK(spec.psi2(x) >= spec.psi1(x) - 1e-15);
    CHECK(spec.psi3(x) >= p - 1e-15);
  }
  double prev = 0.0;
  for (int k = 1; k <= 1000; ++k) {
    const double v = spec.psi3(k / 1000.0);
    CHECK(v >= prev - 1e-15);
    prev = v;
  }
  CHECK(DecaySpec::cell_of(0.5) == 2);
  CHECK(DecaySpec::cell_of(0.4) == 2);
  CHECK(DecaySpec::cell_of(1.0) == 1);
  CHECK(DecaySpec::cell_of(1.0 / 7.0) == 7);
}

TEST_CASE("slow decay construction dominates psi") {
  const DecaySpec spec([](double x) { return std::sqrt(x); }, 256);
  const Integrand f = slow_decay_construct(spec);
  REQUIRE(f.steps);
  for (double lv : f.steps->levels) CHECK(lv >= 0.0);
  for (int n = 2; n <= 256; ++n) {
    const double x = 1.0 / n;
    CHECK_THAT(f.primitive(x), WithinAbs(spec.psi3(x), 1e-14));
    CHECK(translation_gap(f, x) >= std::sqrt(x) - 1e-12);
  }
  const auto rows = verify_slow_decay(f, spec, {1.0 / 64, 0.25, 1.0 / 16, 1.0});
  REQUIRE(rows.size() == 4);
  CHECK(rows[0].x == 1.0);
  CHECK(rows[0].informational);
  for (std::size_t i = 1; i < rows.size(); ++i) {
    CHECK(rows[i].passed);
    CHECK_FALSE(rows[i].informational);
  }
}

TEST_CASE("larger construction dominates a smaller target") {
  const DecaySpec big([](double x) { return x; }, 64);
  const DecaySpec small([](double x) { return x / 2; }, 64);
  const Integrand f = slow_decay_construct(big);
  for (const auto& r : verify_slow_decay(f, small, {0.5, 0.25, 0.1, 1.0 / 32})) CHECK(r.passed);
}

TEST_CASE("slow decay rejects bad targets") {
  CHECK_THROWS_AS(DecaySpec([](double) { return 1.0; }, 64), InvalidSpec);
  CHECK_THROWS_AS(DecaySpec([](double x) { return x - 0.5; }, 64), InvalidSpec);
  CHECK_THROWS_AS(DecaySpec([](double x) { return std::sqrt(x); }, 1), InvalidSpec);
}

TEST_CASE("bump constants and oscillation bound") {
  const SmoothBump b;
  CHECK_THAT(b.oscillation(), WithinAbs(std::exp(-1.0), 1e-16));
  CHECK(b(1.0) == 0.0);
  CHECK(b.derivative(-1.0) == 0.0);
  // independent estimate of ||f'|| by fine sampling of a difference quotient
  double dmax = 0.0;
  for (int k = 1; k < 200000; ++k) {
    const double y = -1.0 + 2.0 * k / 200000.0, h = 1e-6;
    dmax = std::max(dmax, std::abs((b(y + h) - b(y - h)) / (2 * h)));
  }
  CHECK_THAT(b.derivative_sup(), WithinRel(dmax, 1e-6));

  for (const auto& r : osc_lower_bound_check(b, {0.1, 0.01, 0.001})) {
    CHECK(r.passed);
    CHECK(std::abs(r.gap / r.x - b.oscillation()) <= 2.0 * b.derivative_sup() * r.x + 1e-6);
  }
  const auto flat = osc_lower_bound_check(SmoothBump{0.0, 1.0, 0.0}, {0.1});
  CHECK(flat[0].gap == 0.0);
  CHECK(*flat[0].bound_upper == 0.0);
  const auto wide = osc_lower_bound_check(SmoothBump{0.0, 0.05, 1.0}, {0.5});
  CHECK(*wide[0].bound_lower == 0.0);
  CHECK(wide[0].passed);
}

TEST_CASE("primitive gap norm of the indicator") {
  const Integrand chi = builtin::indicator_01();
  // t -> int_{t-x}^t F has increments int (F(y-x) - F(y)); brute force over a grid
  const double x = 0.5;
  auto A = [&](double t) { return chi.primitive.integrate(t - x, t); };
  const double oracle = brute_pair_sup(A, -1.0, 3.0, 800);
  CHECK_THAT(primitive_gap_norm(chi, x), WithinAbs(oracle, 1e-12));
  CHECK(primitive_gap_norm(chi, x) <= 0.5 + 1e-12);
  CHECK(primitive_gap_norm(chi, x) > 0.0);
  CHECK(primitive_gap_norm(chi, 0.0) == 0.0);
}

TEST_CASE("primitive gap L1 of the indicator") {
  const Integrand chi = builtin::indicator_01();
  CHECK_THAT(primitive_gap_l1(chi, 0.5), WithinAbs(0.5, 1e-14));
  CHECK_THAT(primitive_gap_l1(chi, 2.0), WithinAbs(2.0, 1e-14));
  CHECK_THAT(primitive_gap_l1(chi, -0.3), WithinAbs(0.3, 1e-14));
  CHECK(primitive_gap_l1(chi, 0.0) == 0.0);
  CHECK_THROWS_AS(primitive_gap_l1(builtin::sinc_primitive(), 1.0), NotAbsolutelyIntegrable);
  // ramp: ||tau_x F - F||_1 = x * int f = x/2 for every x
  CHECK_THAT(primitive_gap_l1(builtin::ramp(), 0.3), WithinAbs(0.15, 1e-12));
}

TEST_CASE("sinc witness") {
  const auto w = hk_not_l1_witness(std::numbers::pi);
  CHECK_THAT(w.tail_coefficient_sin, WithinAbs(-2.0, 1e-15));
  CHECK_THAT(w.tail_coefficient_cos, WithinAbs(0.0, 1e-15));
  CHECK(w.certificate == DivergenceCertificate::divergent);
  CHECK(w.abs_integral_diverges);
  CHECK(w.r_squared >= 0.999);
  CHECK(w.log_slope > 0.0);
  CHECK(w.alexiewicz_finite);
  CHECK(w.alexiewicz_value <= alexiewicz_norm(builtin::sinc_primitive()) * std::numbers::pi + 1e-9);

  const auto z = hk_not_l1_witness(2 * std::numbers::pi, 20);
  CHECK(std::abs(z.tail_coefficient_sin) < 1e-15);
  CHECK(std::abs(z.tail_coefficient_cos) < 1e-15);
  CHECK(z.certificate == DivergenceCertificate::inconclusive);
  CHECK_FALSE(z.abs_integral_diverges);

  const auto s = hk_not_l1_witness(0.1, 20);
  CHECK_THAT(s.tail_coefficient_sin, WithinAbs(-0.0049958, 1e-7));
  CHECK_THAT(s.tail_coefficient_cos, WithinAbs(-0.0998334, 1e-7));
}
