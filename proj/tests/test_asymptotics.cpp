#include <cmath>
#include <sstream>
#include <vector>

#include "doctest.h"

#include "mongeampere/asymptotics.hpp"
#include "mongeampere/errors.hpp"
#include "mongeampere/measure.hpp"
#include "mongeampere/radial.hpp"

using namespace mongeampere;

namespace {

using Source = AnnulusSamples::Source;

std::vector<double> ladder(double from, double to, int per_decade) {
  std::vector<double> r;
  const int steps = static_cast<int>(std::lround(std::log10(to / from) * per_decade));
  for (int k = 0; k <= steps; ++k) r.push_back(from * std::pow(10.0, static_cast<double>(k) / per_decade));
  return r;
}

// w_c - r^2/2 for density 1 and an atom of mass 2 pi c, without cancellation.
double w_atom_excess(double c, double r) {
  const double a = 2.0 * c;
  return 0.5 * r * a / (std::sqrt(r * r + a) + r) + 0.5 * a * std::asinh(r / std::sqrt(a));
}

PlaneFunction model_of(const Eigen::Matrix2d& A, double d, std::array<double, 3> ell) {
  return [=](Vec2 x) {
    const double q = A(0, 0) * x.x * x.x + 2.0 * A(0, 1) * x.x * x.y + A(1, 1) * x.y * x.y;
    return 0.5 * q + 0.5 * d * std::log(q) + ell[0] * x.x + ell[1] * x.y + ell[2];
  };
}

}  // namespace

TEST_CASE("flux of model functions") {
  CHECK(std::abs(flux_D([](Vec2 x) { return 0.5 * norm2(x); }, 10.0, 256, 0.1)) <= 1e-8);
  const auto u = [](Vec2 x) { return 0.5 * norm2(x) + 0.3 * std::log(norm(x)); };
  CHECK(flux_D(u, 50.0, 256, 0.5) == doctest::Approx(0.3).epsilon(1e-4));
  CHECK(flux_D_excess([](Vec2 x) { return 0.3 * std::log(norm(x)); }, 50.0, 256, 0.5) ==
        doctest::Approx(0.3).epsilon(1e-4));

  // Adding a linear function leaves the flux unchanged.
  const auto tilted = [&](Vec2 x) { return u(x) + 3.0 * x.x - 2.0 * x.y + 1.0; };
  CHECK(std::abs(flux_D(tilted, 10.0, 256, 0.1) - flux_D(u, 10.0, 256, 0.1)) <= 1e-6);
}

TEST_CASE("flux of the one-atom radial solution converges to c") {
  std::vector<double> err;
  for (double R : {20.0, 40.0, 80.0}) {
    const double D = flux_D_excess([](Vec2 x) { return w_atom_excess(0.25, norm(x)); }, R, 256, 1e-2 * R);
    err.push_back(std::abs(D - 0.25));
  }
  for (std::size_t k = 1; k < err.size(); ++k) CHECK(err[k] <= 0.5 * err[k - 1]);
  CHECK(err.back() <= 1e-6);
}

TEST_CASE("synthetic fit recovers the model") {
  const Eigen::Matrix2d A = Eigen::Vector2d(2.0, 0.5).asDiagonal();
  const AsymptoticFit fit =
      fit_expansion(sample_annuli(model_of(A, 0.3, {1.0, 0.0, -2.0}), {20.0, 40.0, 80.0}, 256, Source::ClosedForm));
  CHECK((fit.A - A).cwiseAbs().maxCoeff() <= 1e-6);
  CHECK(fit.d == doctest::Approx(0.3).epsilon(1e-6));
  CHECK(fit.ell[0] == doctest::Approx(1.0).epsilon(1e-6));
  CHECK(std::abs(fit.ell[1]) <= 1e-6);
  CHECK(fit.ell[2] == doctest::Approx(-2.0).epsilon(1e-6));
  CHECK(fit.det_A() == doctest::Approx(1.0).epsilon(1e-6));
  CHECK(fit.decay.floor_limited);

  const AsymptoticFit q =
      fit_expansion(sample_annuli([](Vec2 x) { return 0.5 * norm2(x); }, {20.0, 40.0, 80.0}, 128, Source::ClosedForm));
  CHECK((q.A - Eigen::Matrix2d::Identity()).cwiseAbs().maxCoeff() <= 1e-9);
  CHECK(std::abs(q.d) <= 1e-9);
  for (double l : q.ell) CHECK(std::abs(l) <= 1e-7);
}

TEST_CASE("fit is idempotent") {
  Eigen::Matrix2d A;
  A << 1.3, 0.2, 0.2, 0.8;
  A /= std::sqrt(A.determinant());
  const AsymptoticFit first =
      fit_expansion(sample_annuli(model_of(A, 0.7, {0.5, -0.25, 1.0}), {16.0, 32.0, 64.0, 128.0}, 128, Source::ClosedForm));
  const AsymptoticFit second = fit_expansion(
      sample_annuli([&](Vec2 x) { return first.model(x); }, {16.0, 32.0, 64.0, 128.0}, 128, Source::ClosedForm));
  CHECK((second.A - first.A).cwiseAbs().maxCoeff() <= 1e-10);
  CHECK(std::abs(second.d - first.d) <= 1e-10);
  for (int k = 0; k < 3; ++k) CHECK(std::abs(second.ell[k] - first.ell[k]) <= 1e-10);
}

TEST_CASE("radial data give a scalar A") {
  const SourceMeasure tail = measures::radial_tail(1.0, 4.0, 1.0);
  const RadialPotential w = w_c_potential(radialize(tail, RadializeMode::Lower, 256), cbar(tail));
  const AsymptoticFit fit = fit_expansion(
      sample_annuli([&](Vec2 x) { return w.excess(norm(x)); }, ladder(1e2, 1e4, 4), 256, Source::ClosedForm, true));
  CHECK(std::abs(fit.A(0, 1)) <= 1e-3);
  CHECK(std::abs(fit.A(0, 0) - fit.A(1, 1)) <= 1e-3);
  CHECK(fit.det_A() == doctest::Approx(1.0).epsilon(1e-3));
  CHECK(fit.d == doctest::Approx(compute_d(tail)).epsilon(1e-3));
  CHECK(fit.decay.sigma_hat >= 1.5);
  CHECK_FALSE(fit.decay.failure);
}

TEST_CASE("slow tail sets the failure flag") {
  const SourceMeasure m = measures::slow_tail_counterexample();
  const RadialPotential w = w_c_potential(radialize(m, RadializeMode::Lower, 256), 0.0);
  const AsymptoticFit fit = fit_expansion(
      sample_annuli([&](Vec2 x) { return w.excess(norm(x)); }, ladder(1e2, 1e6, 2), 256, Source::ClosedForm, true));
  CHECK(fit.decay.failure);
  CHECK(fit.decay.log_drift > 0.1);
}

TEST_CASE("fit errors") {
  const auto q = [](Vec2 x) { return 0.5 * norm2(x); };
  CHECK_THROWS_AS(fit_expansion(sample_annuli(q, {20.0, 40.0}, 128, Source::ClosedForm)), Error);
  CHECK_THROWS_AS(fit_expansion(sample_annuli(q, {20.0, 21.0, 22.0}, 128, Source::ClosedForm)), Error);

  // Every sample on one ray: the angular part of the design has no rank.
  AnnulusSamples s;
  for (double r : {20.0, 40.0, 80.0}) {
    AnnulusSamples::Annulus a;
    a.radius = r;
    for (int k = 0; k < 64; ++k) {
      a.points.push_back({r, 0.0});
      a.values.push_back(0.5 * r * r);
    }
    s.annuli.push_back(a);
  }
  try {
    fit_expansion(s);
    FAIL("expected a degenerate fit");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::Degenerate);
  }

  const AsymptoticFit fit;
  CHECK_THROWS_AS(residual_decay(sample_annuli(q, {20.0, 40.0}, 128, Source::ClosedForm), fit), Error);
}

TEST_CASE("fit text round trip") {
  AsymptoticFit fit;
  fit.A << 1.25, 0.1, 0.1, 0.8;
  fit.d = 0.3125;
  fit.ell = {1.0 / 3.0, -2.5, 7.0};
  fit.decay.sigma_hat = 1.75;
  std::stringstream ss;
  fit.write(ss);
  const AsymptoticFit back = AsymptoticFit::read(ss);
  CHECK(back.A == fit.A);
  CHECK(back.d == fit.d);
  CHECK(back.ell == fit.ell);
  CHECK(back.decay.sigma_hat == fit.decay.sigma_hat);

  std::stringstream bad("a11 1\nd nope\n");
  CHECK_THROWS_AS(AsymptoticFit::read(bad), Error);
}
