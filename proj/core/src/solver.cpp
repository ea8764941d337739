#include "mongeampere/solver.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "mongeampere/errors.hpp"
#include "mongeampere/polygon.hpp"

namespace mongeampere {

namespace {

// One direction of one node: D e = base + cf e[f] + cb e[b] - gamma e0 is
// the second difference of u = |x|^2/2 + e (the quadratic contributes
// exactly 1). Boundary arms point at the sentinel slot and live in base.
struct Arm2 {
  std::int32_t f, b;
  double cf, cb, gamma, base;
};

struct Stencil {
  std::size_t n = 0;
  std::size_t dirs = 0;  // 2W per node
  std::vector<Arm2> arms;
};

double excess_of(const BoundaryFunction& g, Vec2 y) { return g(y) - 0.5 * norm2(y); }

Stencil build_stencil(const GridDisk& grid, const BoundaryFunction& g) {
  Stencil s;
  s.n = grid.size();
  s.dirs = 2 * static_cast<std::size_t>(grid.W());
  s.arms.resize(s.n * s.dirs);
  const auto sentinel = static_cast<std::int32_t>(s.n);
  for (std::size_t i = 0; i < s.n; ++i) {
    const auto rays = grid.rays(i);
    for (std::size_t d = 0; d < s.dirs; ++d) {
      const GridDisk::Ray& fw = rays[2 * d];
      const GridDisk::Ray& bw = rays[2 * d + 1];
      const double a = fw.arm, b = bw.arm;
      Arm2 arm{sentinel, sentinel, 2.0 / (a * (a + b)), 2.0 / (b * (a + b)), 2.0 / (a * b), 1.0};
      if (fw.neighbor >= 0) arm.f = fw.neighbor; else arm.base += arm.cf * excess_of(g, fw.end);
      if (bw.neighbor >= 0) arm.b = bw.neighbor; else arm.base += arm.cb * excess_of(g, bw.end);
      s.arms[i * s.dirs + d] = arm;
    }
  }
  return s;
}

// Smallest root of (a1 - g1 u)(a2 - g2 u) = m with both factors >= 0.
inline double pair_root(double a1, double g1, double a2, double g2, double m) {
  if (m <= 0.0) return std::min(a1 / g1, a2 / g2);
  const double kappa = g2 / g1;
  const double delta = a2 - kappa * a1;
  const double disc = std::sqrt(delta * delta + 4.0 * kappa * m);
  const double X = delta >= 0.0 ? 2.0 * m / (delta + disc) : (disc - delta) / (2.0 * kappa);
  return (a1 - X) / g1;
}

struct Evaluated {
  double value;  // operator value (min over pairs of clamped products)
  double root;   // node value solving operator = m
};

inline Evaluated fd_node(const Stencil& s, const std::vector<double>& e, std::size_t i, double m) {
  const Arm2* arm = s.arms.data() + i * s.dirs;
  const double e0 = e[i];
  double value = std::numeric_limits<double>::infinity();
  double root = std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; k < s.dirs; k += 2) {
    const Arm2& p = arm[k];
    const Arm2& q = arm[k + 1];
    const double a1 = p.base + p.cf * e[p.f] + p.cb * e[p.b];
    const double a2 = q.base + q.cf * e[q.f] + q.cb * e[q.b];
    const double d1 = std::max(a1 - p.gamma * e0, 0.0);
    const double d2 = std::max(a2 - q.gamma * e0, 0.0);
    value = std::min(value, d1 * d2);
    root = std::min(root, pair_root(a1, p.gamma, a2, q.gamma, m));
  }
  return {value, root};
}

// Local subgradient polygon in shifted coordinates p' = p - x.
struct AreaNode {
  std::size_t node;
  std::vector<Vec2> offsets;      // y_r - x
  std::vector<std::int32_t> idx;  // neighbor, or -1 for a boundary end
  std::vector<double> fixed;      // boundary excess where idx = -1
  double target;                  // h^2 * density
};

double local_area(const AreaNode& a, const std::vector<double>& e, double e0) {
  double reach = 0.0;
  std::vector<double> off(a.offsets.size());
  for (std::size_t r = 0; r < a.offsets.size(); ++r) {
    const double er = a.idx[r] >= 0 ? e[a.idx[r]] : a.fixed[r];
    off[r] = 0.5 * norm2(a.offsets[r]) + er - e0;
    reach = std::max(reach, std::abs(off[r]) / norm(a.offsets[r]));
  }
  Polygon poly = axis_box(4.0 * reach + 1.0);
  for (std::size_t r = 0; r < a.offsets.size() && !poly.empty(); ++r)
    poly = clip_half_plane(poly, a.offsets[r], off[r]);
  return polygon_area(poly);
}

double solve_area(const AreaNode& a, const std::vector<double>& e, double start, double rel_tol) {
  double lo = start, hi = start;
  double step = std::max(1.0, std::abs(start)) * 1e-3;
  // area is nonincreasing in e0; bracket the target.
  while (local_area(a, e, hi) > a.target) {
    hi += step;
    step *= 2.0;
  }
  step = std::max(1.0, std::abs(start)) * 1e-3;
  while (local_area(a, e, lo) < a.target) {
    lo -= step;
    step *= 2.0;
  }
  const double tol = rel_tol * std::max(1.0, std::abs(start));
  while (hi - lo > tol) {
    const double mid = 0.5 * (lo + hi);
    if (mid == lo || mid == hi) break;
    if (local_area(a, e, mid) > a.target) lo = mid; else hi = mid;
  }
  return 0.5 * (lo + hi);
}

std::vector<AreaNode> area_nodes(const GridDisk& grid, const DiscreteRHS& rhs, const BoundaryFunction& g,
                                 int zone) {
  std::vector<AreaNode> out;
  const double h2 = grid.h() * grid.h();
  std::vector<std::array<int, 2>> carriers;
  for (std::size_t i = 0; i < grid.size(); ++i)
    if (rhs.atom_mass[i] > 0.0) carriers.push_back(grid.lattice(i));
  const auto in_zone = [&](std::size_t i) {
    const auto [a, b] = grid.lattice(i);
    for (const auto& [c, d] : carriers)
      if ((a - c) * (a - c) + (b - d) * (b - d) <= zone * zone) return true;
    return false;
  };
  for (std::size_t i = 0; i < grid.size(); ++i) {
    if (!in_zone(i)) continue;
    AreaNode a;
    a.node = i;
    a.target = h2 * rhs.density[i];
    for (const GridDisk::Ray& r : grid.rays(i)) {
      a.offsets.push_back(r.end - grid.node(i));
      a.idx.push_back(r.neighbor);
      a.fixed.push_back(r.neighbor >= 0 ? 0.0 : excess_of(g, r.end));
    }
    out.push_back(std::move(a));
  }
  return out;
}

void check_inputs(const GridDisk& grid, const DiscreteRHS& rhs) {
  if (rhs.density.size() != grid.size() || rhs.atom_mass.size() != grid.size())
    throw Error(ErrorKind::InvalidInput, "right-hand side does not match the grid");
  for (double v : rhs.density)
    if (!(v >= 0.0) || !std::isfinite(v)) throw Error(ErrorKind::InvalidInput, "right-hand side must be finite and >= 0");
}

std::vector<double> excess_values(const GridFunction& u) {
  std::vector<double> e(u.values.size() + 1, 0.0);
  for (std::size_t i = 0; i < u.values.size(); ++i) e[i] = u.values[i] - 0.5 * norm2(u.grid->node(i));
  return e;
}

}  // namespace

DiscreteRHS discretize_measure(const SourceMeasure& measure, const GridDisk& grid) {
  if (measure.dimension() != 2) throw Error(ErrorKind::Unsupported, "grid discretization is planar");
  const double h = grid.h();
  DiscreteRHS rhs;
  rhs.density.resize(grid.size());
  rhs.atom_mass.assign(grid.size(), 0.0);
  for (std::size_t i = 0; i < grid.size(); ++i) rhs.density[i] = measure.density(grid.node(i));
  for (const Atom& atom : measure.atoms()) {
    const double fx = atom.position.x / h, fy = atom.position.y / h;
    const int i0 = static_cast<int>(std::floor(fx)), j0 = static_cast<int>(std::floor(fy));
    const double tx = fx - i0, ty = fy - j0;
    const std::array<std::pair<std::array<int, 2>, double>, 4> parts{{{{i0, j0}, (1.0 - tx) * (1.0 - ty)},
                                                                       {{i0 + 1, j0}, tx * (1.0 - ty)},
                                                                       {{i0, j0 + 1}, (1.0 - tx) * ty},
                                                                       {{i0 + 1, j0 + 1}, tx * ty}}};
    for (const auto& [ij, w] : parts) {
      if (w == 0.0) continue;
      const std::int64_t k = grid.index(ij[0], ij[1]);
      if (k < 0) {
        std::ostringstream msg;
        msg << "atom at (" << atom.position.x << ", " << atom.position.y << ") is not covered by interior nodes";
        throw Error(ErrorKind::InvalidInput, msg.str());
      }
      rhs.atom_mass[k] += w * atom.mass;
      rhs.density[k] += w * atom.mass / (h * h);
    }
  }
  return rhs;
}

double ma_operator(const GridFunction& u, const BoundaryFunction& g, std::size_t node, const DiscreteRHS& rhs) {
  const GridDisk& grid = *u.grid;
  if (node >= grid.size()) throw Error(ErrorKind::InvalidInput, "node index out of range");
  const Stencil s = [&] {
    // Single-node stencil: reuse the full builder on the one node's rays.
    Stencil one;
    one.n = grid.size();
    one.dirs = 2 * static_cast<std::size_t>(grid.W());
    one.arms.resize(grid.size() * one.dirs);
    const auto rays = grid.rays(node);
    for (std::size_t d = 0; d < one.dirs; ++d) {
      const auto& fw = rays[2 * d];
      const auto& bw = rays[2 * d + 1];
      const double a = fw.arm, b = bw.arm;
      Arm2 arm{static_cast<std::int32_t>(one.n), static_cast<std::int32_t>(one.n), 2.0 / (a * (a + b)),
               2.0 / (b * (a + b)), 2.0 / (a * b), 1.0};
      if (fw.neighbor >= 0) arm.f = fw.neighbor; else arm.base += arm.cf * excess_of(g, fw.end);
      if (bw.neighbor >= 0) arm.b = bw.neighbor; else arm.base += arm.cb * excess_of(g, bw.end);
      one.arms[node * one.dirs + d] = arm;
    }
    return one;
  }();
  const std::vector<double> e = excess_values(u);
  return fd_node(s, e, node, rhs.density[node]).value - rhs.density[node];
}

double min_second_difference(const GridFunction& u, const BoundaryFunction& g) {
  const Stencil s = build_stencil(*u.grid, g);
  const std::vector<double> e = excess_values(u);
  double lo = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < s.n; ++i)
    for (std::size_t d = 0; d < s.dirs; ++d) {
      const Arm2& a = s.arms[i * s.dirs + d];
      lo = std::min(lo, a.base + a.cf * e[a.f] + a.cb * e[a.b] - a.gamma * e[i]);
    }
  return lo;
}

std::vector<double> scheme_residuals(const GridFunction& u, const BoundaryFunction& g, const DiscreteRHS& rhs,
                                     int zone) {
  const GridDisk& grid = *u.grid;
  check_inputs(grid, rhs);
  const Stencil s = build_stencil(grid, g);
  const std::vector<AreaNode> atoms = area_nodes(grid, rhs, g, zone);
  const std::vector<double> e = excess_values(u);
  std::vector<double> res(grid.size());
  for (std::size_t i = 0; i < grid.size(); ++i) res[i] = fd_node(s, e, i, rhs.density[i]).value - rhs.density[i];
  const double h2 = grid.h() * grid.h();
  for (const AreaNode& a : atoms) res[a.node] = (local_area(a, e, e[a.node]) - a.target) / h2;
  return res;
}

SolveResult solve_dirichlet(std::shared_ptr<const GridDisk> grid_ptr, const DiscreteRHS& rhs, const BoundaryFunction& g,
                            const SolverOptions& opts) {
  if (!grid_ptr) throw Error(ErrorKind::InvalidInput, "solver needs a grid");
  const GridDisk& grid = *grid_ptr;
  check_inputs(grid, rhs);
  const std::size_t n = grid.size();
  const double R = grid.R();
  const double h2 = grid.h() * grid.h();

  const Stencil s = build_stencil(grid, g);
  const std::vector<AreaNode> atoms = area_nodes(grid, rhs, g, opts.area_zone);
  std::vector<std::int32_t> atom_slot(n, -1);
  for (std::size_t k = 0; k < atoms.size(); ++k) atom_slot[atoms[k].node] = static_cast<std::int32_t>(k);

  // Plain Gauss-Seidel at atom nodes and at every node whose stencil reaches
  // one; over-relaxing next to a cone tip destabilizes the sweep.
  std::vector<char> relax(n, 1);
  for (const AreaNode& an : atoms) relax[an.node] = 0;
  for (std::size_t i = 0; i < n; ++i)
    for (const GridDisk::Ray& r : grid.rays(i))
      if (r.neighbor >= 0 && atom_slot[r.neighbor] >= 0) relax[i] = 0;

  // Quadratic a|x|^2/2 + b.x + c through g at the four axis points.
  double mean = 0.0;
  for (double v : rhs.density) mean += v;
  mean /= static_cast<double>(n);
  const double a = std::sqrt(std::max(mean, 1e-300));
  const double gE = g({R, 0.0}), gW = g({-R, 0.0}), gN = g({0.0, R}), gS = g({0.0, -R});
  const Vec2 b{(gE - gW) / (2.0 * R), (gN - gS) / (2.0 * R)};
  const double c = 0.25 * (gE + gW + gN + gS) - 0.5 * a * R * R;
  std::vector<double> e(n + 1, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    const Vec2 x = grid.node(i);
    e[i] = 0.5 * (a - 1.0) * norm2(x) + dot(b, x) + c;
  }

  const double tol = opts.tol > 0.0 ? opts.tol : 1e-9 * std::max(1.0, rhs.max());
  // SOR factor from the stencil reach; wide stencils tolerate less than the
  // five-point value, and 1.7 was the fastest stable choice in practice.
  int reach = 0;
  for (const auto& d : grid.directions()) reach = std::max(reach, std::max(d[0], d[1]));
  double omega = opts.omega > 0.0
                     ? opts.omega
                     : std::min(1.7, 2.0 / (1.0 + std::sin(kPi * reach * grid.h() / R)));
  SolveResult result;
  double best = std::numeric_limits<double>::infinity();
  std::vector<double> snapshot = e;
  double snapshot_residual = std::numeric_limits<double>::infinity();
  int stalled = 0;
  for (int sweep = 1; sweep <= opts.max_sweeps; ++sweep) {
    double worst = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      if (atom_slot[i] >= 0) {
        const AreaNode& an = atoms[atom_slot[i]];
        worst = std::max(worst, std::abs(local_area(an, e, e[i]) - an.target) / h2);
        e[i] = solve_area(an, e, e[i], opts.bisection_tol);
        continue;
      }
      const Evaluated ev = fd_node(s, e, i, rhs.density[i]);
      worst = std::max(worst, std::abs(ev.value - rhs.density[i]));
      e[i] += (relax[i] ? omega : 1.0) * (ev.root - e[i]);
    }
    if (opts.history_stride > 0 && (sweep - 1) % opts.history_stride == 0) result.history.push_back(worst);
    result.sweeps = sweep;
    result.residual = worst;
    if (worst < tol) break;
    if (worst < 0.9 * best) {
      best = worst;
      stalled = 0;
    } else if (++stalled >= 100 && omega > 1.0) {
      // The min over stencil pairs can lock SOR into a cycle; damp it out.
      omega = 1.0 + 0.5 * (omega - 1.0);
      stalled = 0;
    }
    if (worst < 0.5 * snapshot_residual) {
      snapshot = e;
      snapshot_residual = worst;
    } else if ((worst > 10.0 * best || !std::isfinite(worst)) && omega > 1.0) {
      // Over-relaxation ran away: return to the last good iterate and damp.
      e = snapshot;
      omega = 1.0 + 0.5 * (omega - 1.0);
      best = snapshot_residual;
      stalled = 0;
    }
  }
  if (!(result.residual < tol)) {
    std::ostringstream msg;
    msg << "Gauss-Seidel stopped after " << result.sweeps << " sweeps with residual " << result.residual
        << " (tolerance " << tol << ")";
    throw NonConvergenceError(msg.str(), std::move(result.history));
  }
  result.u.grid = std::move(grid_ptr);
  result.u.values.resize(n);
  for (std::size_t i = 0; i < n; ++i) result.u.values[i] = e[i] + 0.5 * norm2(result.u.grid->node(i));
  return result;
}

}  // namespace mongeampere
