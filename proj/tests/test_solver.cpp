#include <cmath>
#include <memory>
#include <random>
#include <sstream>

#include "doctest.h"

#include "mongeampere/aleksandrov.hpp"
#include "mongeampere/errors.hpp"
#include "mongeampere/measure.hpp"
#include "mongeampere/polygon.hpp"
#include "mongeampere/solver.hpp"

using namespace mongeampere;

namespace {

std::shared_ptr<const GridDisk> make_grid(double R, double h, int W = 0) {
  return std::make_shared<const GridDisk>(R, h, W > 0 ? W : default_stencil_width(h));
}

DiscreteRHS rhs_from(const GridDisk& grid, const std::function<double(Vec2)>& f) {
  DiscreteRHS r;
  r.atom_mass.assign(grid.size(), 0.0);
  for (std::size_t i = 0; i < grid.size(); ++i) r.density.push_back(f(grid.node(i)));
  return r;
}

GridFunction sample(std::shared_ptr<const GridDisk> grid, const std::function<double(Vec2)>& u) {
  GridFunction g{grid, {}};
  for (std::size_t i = 0; i < grid->size(); ++i) g.values.push_back(u(grid->node(i)));
  return g;
}

// Closed-form radial solution with an atom of mass 2 pi c at the origin and density 1.
double w_atom(double c, double r) {
  const double a = 2.0 * c;
  return 0.5 * (r * std::sqrt(r * r + a) + a * std::asinh(r / std::sqrt(a)));
}

Vec2 rot90(Vec2 x) { return {-x.y, x.x}; }

}  // namespace

TEST_CASE("stencil directions and grid invariants") {
  for (int W : {2, 4, 8, 12}) {
    const auto dirs = stencil_directions(W);
    CHECK(dirs.size() == static_cast<std::size_t>(W));
    for (const auto& d : dirs) {
      CHECK(d[0] > 0);
      CHECK(d[1] >= 0);
      CHECK(std::gcd(d[0], d[1]) == 1);
    }
  }
  CHECK_THROWS_AS(stencil_directions(6), Error);
  CHECK(default_stencil_width(1.0 / 16.0) == 4);
  CHECK(default_stencil_width(1.0 / 32.0) == 8);

  const GridDisk g(1.0, 1.0 / 8.0, 4);
  for (std::size_t i = 0; i < g.size(); ++i) {
    CHECK(norm(g.node(i)) <= g.R() - g.h() + 1e-12);
    for (const GridDisk::Ray& r : g.rays(i)) {
      CHECK(r.arm > 0.0);
      if (r.neighbor < 0) CHECK(norm(r.end) == doctest::Approx(g.R()).epsilon(1e-12));
    }
  }
  CHECK(g.origin() >= 0);
  CHECK_THROWS_AS(GridDisk(1.0, 0.25, 4), Error);  // R / h < 8
}

TEST_CASE("discretize_measure") {
  const auto grid = make_grid(1.0, 1.0 / 16.0);
  const double h = grid->h();

  const DiscreteRHS flat = discretize_measure(measures::lebesgue(), *grid);
  for (double v : flat.density) CHECK(v == 1.0);

  const DiscreteRHS node = discretize_measure(measures::lebesgue_with_atoms({{{0.0, 0.0}, 2.0 * kPi}}, 0.5), *grid);
  CHECK(node.density[grid->origin()] == doctest::Approx(1.0 + 2.0 * kPi / (h * h)).epsilon(1e-14));
  CHECK(node.atom_mass[grid->origin()] == 2.0 * kPi);

  const DiscreteRHS centre = discretize_measure(measures::lebesgue_with_atoms({{{h / 2, h / 2}, 1.0}}, 0.5), *grid);
  double total = 0.0;
  for (auto [i, j] : {std::array{0, 0}, std::array{1, 0}, std::array{0, 1}, std::array{1, 1}}) {
    const std::size_t k = static_cast<std::size_t>(grid->index(i, j));
    CHECK(centre.atom_mass[k] == doctest::Approx(0.25).epsilon(1e-15));
  }
  for (double m : centre.atom_mass) total += m;
  CHECK(std::abs(total - 1.0) <= 1e-15);

  // Atom whose lattice cell has a corner outside the interior nodes.
  CHECK_THROWS_AS(discretize_measure(measures::lebesgue_with_atoms({{{0.95, 0.0}, 1.0}}, 0.99), *grid), Error);
}

TEST_CASE("ma_operator on quadratics and affine functions") {
  for (int W : {2, 4, 8, 12}) {
    const auto grid = make_grid(1.0, 1.0 / 16.0, W);
    const auto q = [](Vec2 x) { return 0.5 * norm2(x); };
    const GridFunction u = sample(grid, q);
    const DiscreteRHS one = rhs_from(*grid, [](Vec2) { return 1.0; });
    double worst = 0.0;
    for (std::size_t i = 0; i < grid->size(); ++i) worst = std::max(worst, std::abs(ma_operator(u, q, i, one)));
    CHECK(worst <= 1e-9);

    const auto a = [](Vec2 x) { return 2.0 * x.x - x.y + 3.0; };
    const GridFunction v = sample(grid, a);
    for (std::size_t i = 0; i < grid->size(); i += 7) CHECK(ma_operator(v, a, i, one) == doctest::Approx(-1.0).epsilon(1e-9));
  }
}

TEST_CASE("ma_operator consistency for exp(|x|^2/2)") {
  const auto u = [](Vec2 x) { return std::exp(0.5 * norm2(x)); };
  const auto f = [](Vec2 x) { return (1.0 + norm2(x)) * std::exp(norm2(x)); };
  std::vector<double> worst;
  const std::vector<std::pair<double, int>> ladder{{1.0 / 8, 2}, {1.0 / 16, 4}, {1.0 / 32, 8}, {1.0 / 64, 12}};
  for (auto [h, W] : ladder) {
    const auto grid = make_grid(1.0, h, W);
    const GridFunction gu = sample(grid, u);
    const DiscreteRHS rhs = rhs_from(*grid, f);
    double m = 0.0;
    for (std::size_t i = 0; i < grid->size(); ++i)
      if (norm(grid->node(i)) <= 0.5) m = std::max(m, std::abs(ma_operator(gu, u, i, rhs)));
    worst.push_back(m);
  }
  for (std::size_t k = 1; k < worst.size(); ++k) CHECK(worst[k] < worst[k - 1]);
}

TEST_CASE("solver reproduces aligned quadratics") {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> U(0.5, 2.0);
  const auto grid = make_grid(1.0, 1.0 / 16.0);
  const DiscreteRHS one = rhs_from(*grid, [](Vec2) { return 1.0; });
  for (int trial = 0; trial < 20; ++trial) {
    const double a = U(rng), b = U(rng) - 1.25, c = U(rng) - 1.25, k = U(rng);
    const auto q = [=](Vec2 x) { return 0.5 * (a * x.x * x.x + x.y * x.y / a) + b * x.x + c * x.y + k; };
    const SolveResult s = solve_dirichlet(grid, one, q);
    double err = 0.0;
    for (std::size_t i = 0; i < grid->size(); ++i) err = std::max(err, std::abs(s.u.values[i] - q(grid->node(i))));
    CHECK(err <= 1e-8);
  }
}

TEST_CASE("rotated quadratics are resolved only up to the stencil angle") {
  // Eigenvectors at 22.5 degrees to the axes: the min over stencil pairs
  // exceeds det, so the discrete solution is not the quadratic, but the
  // error shrinks as the stencil widens.
  const double t = kPi / 8.0, cs = std::cos(t), sn = std::sin(t);
  const auto q = [=](Vec2 x) {
    const double y1 = cs * x.x + sn * x.y, y2 = -sn * x.x + cs * x.y;
    return 0.5 * (2.0 * y1 * y1 + 0.5 * y2 * y2);
  };
  std::vector<double> err;
  for (int W : {2, 4, 8}) {
    const auto grid = make_grid(1.0, 1.0 / 16.0, W);
    const SolveResult s = solve_dirichlet(grid, rhs_from(*grid, [](Vec2) { return 1.0; }), q);
    double e = 0.0;
    for (std::size_t i = 0; i < grid->size(); ++i) e = std::max(e, std::abs(s.u.values[i] - q(grid->node(i))));
    err.push_back(e);
  }
  CHECK(err.front() > 1e-6);
  CHECK(err.back() < err.front());
}

TEST_CASE("manufactured exp solution converges") {
  const auto u = [](Vec2 x) { return std::exp(0.5 * norm2(x)); };
  const auto f = [](Vec2 x) { return (1.0 + norm2(x)) * std::exp(norm2(x)); };
  std::vector<double> hs{1.0 / 8, 1.0 / 16, 1.0 / 32, 1.0 / 64}, err;
  for (double h : hs) {
    const auto grid = make_grid(1.0, h);
    const SolveResult s = solve_dirichlet(grid, rhs_from(*grid, f), u);
    double e = 0.0;
    for (std::size_t i = 0; i < grid->size(); ++i) e = std::max(e, std::abs(s.u.values[i] - u(grid->node(i))));
    err.push_back(e);
  }
  for (std::size_t k = 1; k < err.size(); ++k) CHECK(err[k] < err[k - 1]);
  const double order = std::log2(err.front() / err.back()) / 3.0;
  CHECK(order >= 0.5);
}

TEST_CASE("one atom on B_2 matches the radial solution") {
  const double c = 0.25, R = 2.0, h = 1.0 / 32.0;
  const auto grid = make_grid(R, h);
  const SourceMeasure m = measures::lebesgue_with_atoms({{{0.0, 0.0}, 2.0 * kPi * c}}, 0.5);
  const DiscreteRHS rhs = discretize_measure(m, *grid);
  const double gR = w_atom(c, R);
  const SolveResult s = solve_dirichlet(grid, rhs, [=](Vec2) { return gR; });
  double err = 0.0;
  for (std::size_t i = 0; i < grid->size(); ++i)
    err = std::max(err, std::abs(s.u.values[i] - w_atom(c, norm(grid->node(i)))));
  CHECK(err / gR <= 0.02);
  CHECK(min_second_difference(s.u, [=](Vec2) { return gR; }) >= -1e-9);

  // Oracle mass of the solution against the lumped mass on [-a, a]^2.
  const PLConvexFunction hull = lower_hull(grid->nodes(), s.u.values);
  const double a = 0.5 + 0.5 * h;
  double lumped = 0.0;
  for (std::size_t i = 0; i < grid->size(); ++i) {
    const Vec2 x = grid->node(i);
    if (std::abs(x.x) < a && std::abs(x.y) < a) lumped += rhs.density[i] * h * h;
  }
  CHECK(std::abs(ma_mass(hull, axis_box(a)) - lumped) / lumped <= 0.05);
}

TEST_CASE("paraboloid mass consistency") {
  const double h = 1.0 / 32.0;
  const auto grid = make_grid(1.0, h);
  const auto f = [](Vec2 x) { return 1.0 + 0.5 * x.x; };
  const DiscreteRHS rhs = rhs_from(*grid, f);
  const SolveResult s = solve_dirichlet(grid, rhs, [](Vec2) { return 0.5; });
  const PLConvexFunction hull = lower_hull(grid->nodes(), s.u.values);
  const double a = 0.5 + 0.5 * h;
  double lumped = 0.0;
  for (std::size_t i = 0; i < grid->size(); ++i) {
    const Vec2 x = grid->node(i);
    if (std::abs(x.x) < a && std::abs(x.y) < a) lumped += rhs.density[i] * h * h;
  }
  CHECK(std::abs(ma_mass(hull, axis_box(a)) - lumped) / lumped <= 0.05);
}

TEST_CASE("quarter-turn equivariance") {
  const auto grid = make_grid(1.0, 1.0 / 16.0);
  const auto f = [](Vec2 x) { return 1.0 + 0.8 * std::exp(-4.0 * norm2(x - Vec2{0.3, 0.1})); };
  const auto g = [](Vec2 x) { return 0.5 + 0.1 * std::cos(std::atan2(x.y, x.x)); };
  const SolveResult s1 = solve_dirichlet(grid, rhs_from(*grid, f), g);
  // Problem rotated by 90 degrees: f2(x) = f(R^-1 x), g2(x) = g(R^-1 x).
  const auto back = [](Vec2 x) { return Vec2{x.y, -x.x}; };
  const SolveResult s2 = solve_dirichlet(grid, rhs_from(*grid, [&](Vec2 x) { return f(back(x)); }),
                                         [&](Vec2 x) { return g(back(x)); });
  double diff = 0.0;
  for (std::size_t i = 0; i < grid->size(); ++i) {
    const auto [a, b] = grid->lattice(i);
    const Vec2 r = rot90(Vec2{static_cast<double>(a), static_cast<double>(b)});
    const std::int64_t k = grid->index(static_cast<int>(r.x), static_cast<int>(r.y));
    REQUIRE(k >= 0);
    diff = std::max(diff, std::abs(s2.u.values[static_cast<std::size_t>(k)] - s1.u.values[i]));
  }
  CHECK(diff <= 1e-8);
}

TEST_CASE("grid functions round-trip exactly") {
  const auto grid = make_grid(1.0, 1.0 / 8.0);
  const GridFunction u = sample(grid, [](Vec2 x) { return std::exp(x.x) / 3.0 + std::sin(7.0 * x.y); });
  std::stringstream ss;
  u.write(ss);
  const GridFunction v = GridFunction::read(ss);
  CHECK(v.grid->R() == grid->R());
  CHECK(v.grid->h() == grid->h());
  CHECK(v.grid->W() == grid->W());
  REQUIRE(v.values.size() == u.values.size());
  for (std::size_t i = 0; i < u.values.size(); ++i) CHECK(v.values[i] == u.values[i]);

  std::stringstream bad("1 0.125 4 3\n0 0 1\n");
  CHECK_THROWS_AS(GridFunction::read(bad), Error);
}

TEST_CASE("solver errors") {
  const auto grid = make_grid(1.0, 1.0 / 16.0);
  const DiscreteRHS one = rhs_from(*grid, [](Vec2) { return 1.0; });
  SolverOptions opts;
  opts.max_sweeps = 3;
  try {
    solve_dirichlet(grid, one, [](Vec2 x) { return 1.0 + std::cos(3.0 * std::atan2(x.y, x.x)); }, opts);
    FAIL("expected non-convergence");
  } catch (const NonConvergenceError& e) {
    CHECK(e.kind() == ErrorKind::NonConvergence);
    CHECK(e.history().size() == 3);
  }
  DiscreteRHS neg = one;
  neg.density[5] = -1.0;
  CHECK_THROWS_AS(solve_dirichlet(grid, neg, [](Vec2) { return 0.5; }), Error);
}

TEST_CASE("comparison of ordered data") {
  const auto grid = make_grid(1.0, 1.0 / 16.0);
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> U(0.0, 1.0);
  for (int trial = 0; trial < 5; ++trial) {
    const double amp = U(rng), shift = 0.2 * U(rng);
    const Vec2 c{U(rng) - 0.5, U(rng) - 0.5};
    const auto f2 = [](Vec2 x) { return 1.0 + 0.3 * x.x * x.x; };
    const auto f1 = [&](Vec2 x) { return f2(x) + amp * std::exp(-8.0 * norm2(x - c)); };
    const SolveResult s1 = solve_dirichlet(grid, rhs_from(*grid, f1), [&](Vec2) { return 0.5 - shift; });
    const SolveResult s2 = solve_dirichlet(grid, rhs_from(*grid, f2), [](Vec2) { return 0.5; });
    for (std::size_t i = 0; i < grid->size(); ++i) CHECK(s1.u.values[i] <= s2.u.values[i] + 1e-8);
  }
}
