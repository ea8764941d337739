#include <cmath>
#include <functional>
#include <limits>

#include "doctest.h"

#include "mongeampere/errors.hpp"
#include "mongeampere/radial.hpp"
#include "mongeampere/sandwich.hpp"
#include "mongeampere/sub_super.hpp"

using namespace mongeampere;

namespace {

// Composite Simpson on [a, b]; independent of the library quadrature.
double simpson(const std::function<double(double)>& f, double a, double b, int n = 20000) {
  const double h = (b - a) / n;
  double s = f(a) + f(b);
  for (int i = 1; i < n; ++i) s += f(a + i * h) * (i % 2 ? 4.0 : 2.0);
  return s * h / 3.0;
}

// w_c for f = 1: int_0^r sqrt(s^2 + 2c) ds.
double w_unit(double c, double r) {
  if (c == 0.0) return 0.5 * r * r;
  const double a = 2.0 * c;
  return 0.5 * (r * std::sqrt(r * r + a) + a * std::asinh(r / std::sqrt(a)));
}

SourceMeasure angular_tail() {
  MeasureSpec spec;
  spec.rho = 0.25;
  spec.compact_density = [](Vec2) { return 1.0; };
  spec.near_density = [](Vec2) { return 1.0; };
  spec.tail.beta = 4.0;
  spec.tail.radius = 1.0;
  spec.tail.amplitude = [](double t) { return 1.0 + 0.5 * std::cos(t); };
  spec.tail.angular = true;
  spec.radial = false;
  return SourceMeasure(spec);
}

}  // namespace

TEST_CASE("radialize keeps radial densities and brackets angular ones") {
  const RadialProfile unit = radialize(measures::lebesgue(), RadializeMode::Lower, 64);
  for (double r : {0.0, 0.3, 1.0, 7.0, 1e3}) CHECK(unit.density(r) == doctest::Approx(1.0));

  const SourceMeasure m = measures::radial_tail(1.0, 4.0, 1.0, 1.0);
  const RadialProfile lower = radialize(m, RadializeMode::Lower, 64);
  CHECK(lower.density(0.5) == 0.0);
  CHECK(lower.density(2.0) == doctest::Approx(1.0 + std::pow(2.0, -4.0)));
  CHECK(lower.tail().b == 1.0);
  CHECK(lower.tail().beta == 4.0);

  const SourceMeasure a = angular_tail();
  CHECK(radialize(a, RadializeMode::Lower, 64).tail().b == doctest::Approx(0.5).epsilon(1e-4));
  CHECK(radialize(a, RadializeMode::Upper, 64).tail().b == doctest::Approx(1.5).epsilon(1e-4));
  // Dense angular sampling as the reference for an interior radius.
  double lo = 1e9, hi = -1e9;
  for (int k = 0; k < 4096; ++k) {
    const double t = 2.0 * kPi * k / 4096;
    const double f = a.exterior_density({3.0 * std::cos(t), 3.0 * std::sin(t)});
    lo = std::min(lo, f);
    hi = std::max(hi, f);
  }
  CHECK(radialize(a, RadializeMode::Lower, 64).density(3.0) == doctest::Approx(lo).epsilon(1e-6));
  CHECK(radialize(a, RadializeMode::Upper, 64).density(3.0) == doctest::Approx(hi).epsilon(1e-6));
}

TEST_CASE("slow tails are rejected unless explicitly allowed") {
  CHECK_THROWS_AS(measures::radial_tail(1.0, 2.0, 1.0), Error);
  try {
    measures::radial_tail(1.0, 1.5, 1.0);
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::RejectedMeasure);
  }
  const SourceMeasure slow = measures::slow_tail_counterexample();
  CHECK(slow.allows_slow_tail());
  CHECK_THROWS_AS(compute_d(slow), Error);
}

TEST_CASE("w_c closed forms") {
  const RadialProfile one = RadialProfile::unit();
  const ValueSlope a = w_c(one, 0.0, 2.0);
  CHECK(a.value == doctest::Approx(2.0).epsilon(1e-12));
  CHECK(a.slope == doctest::Approx(2.0).epsilon(1e-12));
  const ValueSlope b = w_c(one, 0.5, 1.0);
  CHECK(b.value == doctest::Approx((std::sqrt(2.0) + std::log(1.0 + std::sqrt(2.0))) / 2.0).epsilon(1e-10));
  CHECK(b.value == doctest::Approx(1.147793).epsilon(1e-6));
  CHECK(b.slope == doctest::Approx(std::sqrt(2.0)).epsilon(1e-12));
  for (double c : {0.01, 0.25, 3.0})
    for (double r : {0.1, 1.0, 20.0}) CHECK(w_c(one, c, r).value == doctest::Approx(w_unit(c, r)).epsilon(1e-10));
}

TEST_CASE("w_c is strictly increasing in c") {
  const RadialProfile p = radialize(measures::radial_tail(1.0, 4.0, 1.0), RadializeMode::Lower, 128);
  for (double r : {0.5, 2.0, 50.0}) {
    double prev = -1.0;
    for (double c : {0.0, 0.1, 0.5, 1.0, 4.0}) {
      const double v = w_c(p, c, r).value;
      CHECK(v > prev);
      prev = v;
    }
  }
}

TEST_CASE("slow tail: excess grows like (ln r)^2 / 2") {
  const SourceMeasure m = measures::slow_tail_counterexample();
  const RadialPotential w = w_c_potential(radialize(m, RadializeMode::Lower, 256), 0.0);
  const double r = 1e4;
  const double ratio = w.excess(r) / std::pow(std::log(r), 2);
  CHECK(std::abs(ratio - 0.5) <= 0.05);
  // Independent check of the slope excess at one radius: sqrt(1 + int_0^s 2t(f - 1)/s^2) s - s.
  auto f = [&](double t) { return m.density({t, 0.0}); };
  const double s = 50.0;
  const double inner = simpson([&](double t) { return 2.0 * t * (f(t) - 1.0); }, 0.0, 2.0) +
                       simpson([&](double t) { return 2.0 / t; }, 2.0, s);
  CHECK(w.slope_excess(s) == doctest::Approx(std::sqrt(s * s + inner) - s).epsilon(1e-6));
}

TEST_CASE("compute_d") {
  CHECK(compute_d(measures::lebesgue()) == doctest::Approx(0.0));
  CHECK(compute_d(measures::lebesgue_with_atoms({{{0.0, 0.0}, 2.0 * kPi * 0.3}}, 0.5)) ==
        doctest::Approx(0.3).epsilon(1e-10));
  const SourceMeasure tail = measures::radial_tail(1.0, 4.0, 1.0);
  CHECK(compute_d(tail) == doctest::Approx(0.5).epsilon(1e-10));
  // Direct evaluation at R = 1e4: (1/2pi)(nu(B_R) - pi R^2) = int_1^R r^-3 dr.
  const double R = 1e4;
  const double direct = simpson([](double r) { return std::pow(r, -3.0); }, 1.0, 10.0, 200000) +
                        (0.5 * std::pow(10.0, -2.0) - 0.5 * std::pow(R, -2.0));
  CHECK(std::abs(compute_d(tail) - direct) <= std::pow(R, -2.0) / 2.0 + 1e-8);
}

TEST_CASE("cbar by both formulas") {
  // Omega = B_1 with density 1 and an atom pi at the origin.
  LogCoefficients lc = log_coefficients(measures::lebesgue_with_atoms({{{0.0, 0.0}, kPi}}, 1.0));
  // nu(Omega) = pi + pi and f = f_lower outside, so cbar = 2 pi / 2 pi.
  CHECK(lc.cbar == doctest::Approx(1.0).epsilon(1e-10));
  CHECK(std::abs(lc.cbar - lc.cbar_via_d) <= 1e-8);

  lc = log_coefficients(measures::radial_tail(1.0, 4.0, 1.0));
  CHECK(lc.cbar == doctest::Approx(0.0).epsilon(1e-10));

  // Atom 2 pi on B_1 with density 1: (2 pi + pi) / 2 pi.
  lc = log_coefficients(measures::lebesgue_with_atoms({{{0.0, 0.0}, 2.0 * kPi}}, 1.0));
  CHECK(lc.cbar == doctest::Approx(1.5).epsilon(1e-10));
  CHECK(std::abs(lc.cbar - lc.cbar_via_d) <= 1e-8);

  lc = log_coefficients(angular_tail());
  CHECK(std::abs(lc.cbar - lc.cbar_via_d) <= 1e-8);
  CHECK(lc.cbar > 0.0);
}

TEST_CASE("expansion gap is bounded and settles") {
  const SourceMeasure m = measures::radial_tail(1.0, 4.0, 1.0, 0.5);
  const RadialProfile lower = radialize(m, RadializeMode::Lower, 256);
  const double c = 0.25, k = d_lower(lower) + c;
  const RadialPotential w = w_c_potential(lower, c);
  double previous = std::numeric_limits<double>::quiet_NaN(), bound = 0.0;
  for (double r = 10.0; r <= 1e6; r *= 10.0) {
    const double gap = w.excess(r) - k * std::log(r);
    bound = std::max(bound, std::abs(gap));
    if (r >= 1e4) CHECK(std::abs(gap - previous) < 1e-3);
    previous = gap;
  }
  CHECK(bound < 10.0);
}

TEST_CASE("Jorgens family and orbifold dimension") {
  CHECK(jorgens_solution(2, 0.0, 3.0) == doctest::Approx(4.5));
  CHECK(jorgens_solution(3, 0.0, 3.0) == doctest::Approx(4.5));
  CHECK(jorgens_solution(2, 1.0, 1.0) == doctest::Approx((std::sqrt(2.0) + std::asinh(1.0)) / 2.0).epsilon(1e-10));
  CHECK(jorgens_slope(3, 2.0, 1.5) == doctest::Approx(std::cbrt(2.0 + 1.5 * 1.5 * 1.5)));
  CHECK(orbifold_dim(3, 1) == 0);
  CHECK(orbifold_dim(3, 2) == 2);
  CHECK(orbifold_dim(3, 5) == 13);
  CHECK(orbifold_dim(4, 3) == 2 + 3);
  CHECK_THROWS_AS(orbifold_dim(2, 3), Error);
}

TEST_CASE("sub and super barriers for f = 1") {
  for (int n : {2, 3}) {
    const SourceMeasure one = measures::lebesgue(n);
    const SubSuperPair first = build_sub_super(n, one, 1.0);
    CHECK(first.under_slope_inner() == 0.0);
    CHECK(first.under_slope_outer() > first.under_slope_inner());
    CHECK(first.c0() >= first.c1());

    // v1 bound chosen so that c0 = c1 and K = 1.
    const SubSuperPair p = build_sub_super(n, one, 1.0, -first.c1());
    CHECK(p.K() == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(p.under_slope_outer() == doctest::Approx(1.0));
    for (double r : {1.0, 1.5, 3.0, 40.0})
      if (n == 2) CHECK(p.u_under(r) == doctest::Approx(0.5 * r * r - 0.5).epsilon(1e-9));
    CHECK(p.beta_minus() == doctest::Approx(0.5).epsilon(1e-9));
    for (double r : {1.0, 2.0, 10.0, 1e3}) {
      CHECK(p.u_under(r) + p.beta_minus() <= 0.5 * r * r + 1e-9);
      CHECK(p.u_over(r) + p.beta_plus() >= 0.5 * r * r - 1e-9);
    }
  }
  // In the plane the super barrier trails r^2/2 by (1/2) ln r, so beta_plus is infinite.
  const SubSuperPair p2 = build_sub_super(2, measures::lebesgue(2), 1.0);
  CHECK(std::isinf(p2.beta_plus()));
  const double r = 1e3;
  CHECK(p2.over_excess(r) == doctest::Approx(simpson([](double s) { return std::sqrt(s * s - 1.0) - s; }, 1.0, r,
                                                     400000)).epsilon(1e-4));
  const SubSuperPair p3 = build_sub_super(3, measures::lebesgue(3), 1.0);
  CHECK(std::isfinite(p3.beta_plus()));
  CHECK(p3.bounded());
}

TEST_CASE("three-dimensional radial sandwich") {
  const std::vector<double> schedule{8.0, 32.0, 128.0};
  const SourceMeasure one = measures::lebesgue(3);
  const SubSuperPair q = build_sub_super(3, one, 1.0);
  const SandwichReport flat = radial_sandwich_check(3, one, q, schedule);
  for (const SandwichRecord& r : flat.records) {
    CHECK(r.lower_margin >= -1e-9);
    CHECK(r.upper_margin >= -1e-9);
  }
  const SourceMeasure tail = measures::radial_tail(1.0, 4.0, 1.0, 0.0, 3);
  const SubSuperPair p = build_sub_super(3, tail, 1.0);
  CHECK(radial_sandwich_check(3, tail, p, schedule).min_margin() >= 0.0);

  // beta = 2 in three dimensions: u - r^2/2 grows like a multiple of ln r,
  // so the growth from r0 is a power one in ln(r / r0).
  const RadialDirichlet u(measures::slow_tail_counterexample(3), 1e6);
  const double r0 = 10.0;
  std::vector<double> x, y;
  for (double r : {1e2, 1e3, 1e4, 1e5}) {
    x.push_back(std::log(std::log(r / r0)));
    y.push_back(std::log(u.excess(r) - u.excess(r0)));
  }
  const double slope = (y.back() - y.front()) / (x.back() - x.front());
  CHECK(std::abs(slope - 1.0) <= 0.1);
}
