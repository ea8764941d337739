#include <cmath>
#include <memory>
#include <sstream>
#include <string>

#include "doctest.h"

#include "mongeampere/aleksandrov.hpp"
#include "mongeampere/errors.hpp"
#include "mongeampere/exhaustion.hpp"
#include "mongeampere/measure.hpp"
#include "mongeampere/radial.hpp"

using namespace mongeampere;

namespace {

GridFunction sample(double R, double h, const std::function<double(Vec2)>& u) {
  auto grid = std::make_shared<const GridDisk>(R, h, default_stencil_width(h));
  GridFunction g{grid, {}};
  for (std::size_t i = 0; i < grid->size(); ++i) g.values.push_back(u(grid->node(i)));
  return g;
}

double w_atom(double c, double r) {
  const double a = 2.0 * c;
  return 0.5 * (r * std::sqrt(r * r + a) + a * std::asinh(r / std::sqrt(a)));
}

}  // namespace

TEST_CASE("boundary values") {
  CHECK(boundary_value(2, std::exp(1.0), 1.0) == doctest::Approx(std::exp(2.0) / 2.0 + 1.0).epsilon(1e-15));
  CHECK(boundary_value(2, 10.0, 0.0) == 50.0);
  CHECK(boundary_value(3, 10.0, 7.0) == 50.0);
  CHECK(boundary_data(2, 4.0, 0.5)({3.0, 1.0}) == doctest::Approx(8.0 + 0.5 * std::log(4.0)));
  CHECK_THROWS_AS(boundary_value(2, 1.0, 0.0), Error);
}

TEST_CASE("normalize removes the supporting plane") {
  const double h = 1.0 / 16.0;
  const GridFunction u = sample(1.0, h, [](Vec2 x) { return 0.5 * norm2(x) + 3.0 * x.x + 7.0; });
  const Normalization n = normalize(u);
  // The discrete subdifferential at 0 is the square (3, 0) + [-h/2, h/2]^2.
  CHECK(n.p.x == doctest::Approx(3.0 - h / 2).epsilon(1e-12));
  CHECK(std::abs(n.p.y) <= 1e-12);
  CHECK(n.u0 == doctest::Approx(7.0));
  for (std::size_t i = 0; i < u.grid->size(); ++i) {
    const Vec2 x = u.grid->node(i);
    CHECK(n.u.values[i] == doctest::Approx(0.5 * norm2(x) + 0.5 * h * x.x).epsilon(1e-12));
    CHECK(n.u.values[i] >= -1e-12);
  }

  const GridFunction w = sample(2.0, h, [](Vec2 x) { return w_atom(0.25, norm(x)) + 5.0; });
  const Normalization m = normalize(w);
  CHECK(norm(m.p) <= 1e-12);
  for (std::size_t i = 0; i < w.grid->size(); ++i)
    CHECK(m.u.values[i] == doctest::Approx(w_atom(0.25, norm(w.grid->node(i)))).epsilon(1e-12));

  const GridFunction flat = sample(1.0, h, [](Vec2 x) { return std::max(x.x, 0.0); });
  CHECK_THROWS_AS(normalize(flat), Error);
}

TEST_CASE("claim level") {
  const RadialPotential w = w_c_potential(radialize(measures::lebesgue(), RadializeMode::Lower, 64), 0.0);
  // w = r^2/2 for Lebesgue with c = 0.
  CHECK(claim_level(w, 10.0, 0.0) == doctest::Approx(0.0).scale(1.0).epsilon(1e-9));
  CHECK(claim_level(w, 10.0, 1.0) == doctest::Approx(std::log(10.0)).epsilon(1e-9));
}

TEST_CASE("report csv columns") {
  ExhaustionReport r;
  r.records.push_back({8.0, 0.125, 1.0, 0.5, 0.5, 0.0, {}, 0.0, std::nan(""), 10, 1e-10});
  std::ostringstream os;
  r.write_csv(os);
  const std::string s = os.str();
  CHECK(s.substr(0, s.find('\n')) == "R,h,u_R0,lambda,claim_margin,sandwich_margin,pR_norm,cauchy_gap");
  CHECK(s.find(",nan\n") != std::string::npos);
}

TEST_CASE("Lebesgue exhaustion is exact") {
  ExhaustionOptions opts;
  opts.window = 2.0;
  opts.window_h = 0.25;  // window nodes are nodes of every scheduled grid
  opts.nodes_per_radius = 32;
  opts.deterministic = true;
  const ExhaustionResult r = run_exhaustion(measures::lebesgue(), {4.0, 8.0}, opts);
  CHECK(r.report.converged);
  CHECK(r.report.d == 0.0);
  for (const ExhaustionRecord& rec : r.report.records) {
    CHECK(rec.claim_margin >= -1e-6);
    CHECK(rec.sandwich_margin >= -1e-6);
  }
  for (std::size_t i = 0; i < r.limit.grid->size(); ++i) {
    const Vec2 x = r.limit.grid->node(i);
    // Plane of slope p = (-h/2, -h/2) from the least-norm corner of the cell.
    CHECK(r.limit.values[i] + dot(r.last.p, x) == doctest::Approx(0.5 * norm2(x)).epsilon(1e-8).scale(1.0));
  }
}

TEST_CASE("exhaustion preconditions") {
  const SourceMeasure m = measures::lebesgue_with_atoms({{{0.0, 0.0}, 1.0}}, 1.0);
  ExhaustionOptions opts;
  opts.window = 2.0;
  CHECK_THROWS_AS(run_exhaustion(m, {}, opts), Error);
  CHECK_THROWS_AS(run_exhaustion(m, {8.0, 8.0}, opts), Error);
  CHECK_THROWS_AS(run_exhaustion(m, {3.0, 8.0}, opts), Error);  // first radius below twice the window
  opts.window = 1.5;
  CHECK_THROWS_AS(run_exhaustion(m, {4.0, 8.0}, opts), Error);  // window < 2 rho
  CHECK_THROWS_AS(run_exhaustion(measures::radial_tail(1.0, 4.0, 1.0, 0.0, 3), {8.0, 16.0}), Error);
}

TEST_CASE("two atoms survive in the limit") {
  const SourceMeasure m = measures::lebesgue_with_atoms({{{-0.25, 0.0}, kPi}, {{0.25, 0.0}, kPi}}, 0.5);
  ExhaustionOptions opts;
  opts.window = 2.0;
  opts.nodes_per_radius = 32;
  opts.cauchy_tol = 1.0;
  const ExhaustionResult r = run_exhaustion(m, {4.0, 8.0}, opts);
  CHECK(r.report.d == doctest::Approx(1.0).epsilon(1e-9));

  std::vector<Vec2> nodes;
  std::vector<double> values;
  const GridFunction& u = r.last.u;
  for (std::size_t i = 0; i < u.grid->size(); ++i)
    if (norm(u.grid->node(i)) <= 1.0) {
      nodes.push_back(u.grid->node(i));
      values.push_back(u.values[i]);
    }
  const PLConvexFunction hull = lower_hull(nodes, values);
  const MAMeasureReport rep = ma_measure(hull, {}, 0.25 * kPi);
  REQUIRE(rep.atoms.size() == 2);
  for (const auto& [i, mass] : rep.atoms) {
    CHECK(std::abs(std::abs(hull.nodes()[i].x) - 0.25) <= 1e-12);
    CHECK(hull.nodes()[i].y == 0.0);
    CHECK(std::abs(mass - kPi) / kPi <= 0.05);
  }
}
