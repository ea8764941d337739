#include "mongeampere/aleksandrov.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "mongeampere/errors.hpp"

namespace mongeampere {

namespace {

constexpr double kEps = std::numeric_limits<double>::epsilon();

// Uniform bucket grid over the node bounding box.
class Buckets {
 public:
  Buckets(const std::vector<Vec2>& pts, const std::vector<double>& vals, double cell) : pts_(pts) {
    lo_ = hi_ = pts.front();
    for (const Vec2& p : pts) {
      lo_.x = std::min(lo_.x, p.x), lo_.y = std::min(lo_.y, p.y);
      hi_.x = std::max(hi_.x, p.x), hi_.y = std::max(hi_.y, p.y);
    }
    size_ = cell;
    nx_ = std::max(1, static_cast<int>(std::floor((hi_.x - lo_.x) / size_)) + 1);
    ny_ = std::max(1, static_cast<int>(std::floor((hi_.y - lo_.y) / size_)) + 1);
    start_.assign(static_cast<std::size_t>(nx_) * ny_ + 1, 0);
    std::vector<int> key(pts.size());
    for (std::size_t i = 0; i < pts.size(); ++i) {
      key[i] = index(pts[i]);
      ++start_[key[i] + 1];
    }
    std::partial_sum(start_.begin(), start_.end(), start_.begin());
    items_.resize(pts.size());
    std::vector<std::size_t> fill(start_.begin(), start_.end() - 1);
    for (std::size_t i = 0; i < pts.size(); ++i) items_[fill[key[i]]++] = i;
    umin_.assign(static_cast<std::size_t>(nx_) * ny_, std::numeric_limits<double>::infinity());
    for (std::size_t i = 0; i < pts.size(); ++i) umin_[key[i]] = std::min(umin_[key[i]], vals[i]);
  }

  int bx(double x) const { return std::clamp(static_cast<int>(std::floor((x - lo_.x) / size_)), 0, nx_ - 1); }
  int by(double y) const { return std::clamp(static_cast<int>(std::floor((y - lo_.y) / size_)), 0, ny_ - 1); }
  int index(Vec2 p) const { return by(p.y) * nx_ + bx(p.x); }
  int nx() const { return nx_; }
  int ny() const { return ny_; }
  std::span<const std::size_t> bucket(int b) const {
    return {items_.data() + start_[b], items_.data() + start_[b + 1]};
  }
  double umin(int b) const { return umin_[b]; }
  // Bounds of bucket b (the last row/column absorb clamped points).
  void bounds(int b, Vec2& lo, Vec2& hi) const {
    const int ix = b % nx_, iy = b / nx_;
    lo = {lo_.x + ix * size_, lo_.y + iy * size_};
    hi = {ix == nx_ - 1 ? std::max(hi_.x, lo.x + size_) : lo.x + size_,
          iy == ny_ - 1 ? std::max(hi_.y, lo.y + size_) : lo.y + size_};
  }

  template <class F>
  void for_each_near(Vec2 p, double radius, F&& f) const {
    const int x0 = bx(p.x - radius), x1 = bx(p.x + radius);
    const int y0 = by(p.y - radius), y1 = by(p.y + radius);
    for (int iy = y0; iy <= y1; ++iy)
      for (int ix = x0; ix <= x1; ++ix)
        for (std::size_t j : bucket(iy * nx_ + ix))
          if (norm2(pts_[j] - p) <= radius * radius) f(j);
  }

 private:
  const std::vector<Vec2>& pts_;
  Vec2 lo_, hi_;
  double size_ = 1.0;
  int nx_ = 1, ny_ = 1;
  std::vector<std::size_t> start_;
  std::vector<std::size_t> items_;
  std::vector<double> umin_;
};

double smallest_spacing(const std::vector<Vec2>& pts) {
  // Sort-and-sweep closest pair.
  std::vector<Vec2> s = pts;
  std::sort(s.begin(), s.end(), lex_less);
  double best = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < s.size(); ++i)
    for (std::size_t j = i + 1; j < s.size() && s[j].x - s[i].x < best; ++j) best = std::min(best, norm(s[j] - s[i]));
  return best;
}

struct CellBuilder {
  const std::vector<Vec2>& x;
  const std::vector<double>& u;
  const Buckets& buckets;
  double box;
  double u_scale;
  double x_scale;

  Polygon clip(std::size_t i, const std::vector<std::size_t>& cons, double slack) const {
    return clip_from(axis_box(box), i, cons, slack);
  }

  Polygon clip_from(Polygon cell, std::size_t i, const std::vector<std::size_t>& cons, double slack) const {
    for (std::size_t j : cons) {
      cell = clip_half_plane(cell, x[j] - x[i], u[j] - u[i] + slack * (1.0 + norm(x[j] - x[i])));
      if (cell.empty()) break;
    }
    return cell;
  }

  // Most violated global constraint at gradient p, or npos.
  std::size_t worst_violation(std::size_t i, Vec2 p) const {
    const double tol = 64.0 * kEps * (u_scale + norm(p) * x_scale);
    const double level = u[i] - dot(p, x[i]) - tol;
    double worst = level;
    std::size_t arg = static_cast<std::size_t>(-1);
    const int nb = buckets.nx() * buckets.ny();
    for (int b = 0; b < nb; ++b) {
      Vec2 lo, hi;
      buckets.bounds(b, lo, hi);
      const double reach = std::max(p.x * lo.x, p.x * hi.x) + std::max(p.y * lo.y, p.y * hi.y);
      if (buckets.umin(b) - reach >= worst) continue;
      for (std::size_t j : buckets.bucket(b)) {
        const double v = u[j] - dot(p, x[j]);
        if (v < worst) {
          worst = v;
          arg = j;
        }
      }
    }
    return arg;
  }

  // Exact subdifferential of the envelope at node i, intersected with the box.
  // Every pass adds the worst violator at each cell vertex; the cell is exact
  // once all its vertices satisfy every constraint.
  Polygon exact_cell(std::size_t i, std::vector<std::size_t>& cons) const {
    const std::size_t cap = x.size() + 8;
    for (std::size_t iter = 0; iter < cap; ++iter) {
      Polygon cell = clip(i, cons, 0.0);
      if (cell.empty()) return cell;
      bool changed = false;
      for (const Vec2& p : cell) {
        const std::size_t j = worst_violation(i, p);
        if (j == static_cast<std::size_t>(-1)) continue;
        if (std::find(cons.begin(), cons.end(), j) != cons.end()) continue;
        cons.push_back(j);
        changed = true;
      }
      if (!changed) return cell;
    }
    throw Error(ErrorKind::InternalConsistency, "subgradient cell refinement did not settle");
  }
};

// Constraints that touch the final cell (within rounding).
std::vector<std::size_t> active_constraints(const std::vector<Vec2>& x, const std::vector<double>& u, std::size_t i,
                                            const std::vector<std::size_t>& cons, const Polygon& cell) {
  std::vector<std::size_t> active;
  for (std::size_t j : cons) {
    const Vec2 nrm = x[j] - x[i];
    const double off = u[j] - u[i];
    double worst = -std::numeric_limits<double>::infinity();
    for (const Vec2& p : cell) worst = std::max(worst, dot(nrm, p) - off);
    if (worst >= -1e-9 * (std::abs(off) + 1.0)) active.push_back(j);
  }
  return active;
}

Polygon padded_bbox(const Polygon& poly) {
  Vec2 lo = poly.front(), hi = poly.front();
  for (const Vec2& p : poly) {
    lo.x = std::min(lo.x, p.x), lo.y = std::min(lo.y, p.y);
    hi.x = std::max(hi.x, p.x), hi.y = std::max(hi.y, p.y);
  }
  const double pad = 1e-6 * (hi.x - lo.x + hi.y - lo.y) + 1e-12 * (std::abs(lo.x) + std::abs(lo.y) + 1.0);
  return {{lo.x - pad, lo.y - pad}, {hi.x + pad, lo.y - pad}, {hi.x + pad, hi.y + pad}, {lo.x - pad, hi.y + pad}};
}

double bbox_diag2(const Polygon& poly) {
  Vec2 lo = poly.front(), hi = poly.front();
  for (const Vec2& p : poly) {
    lo.x = std::min(lo.x, p.x), lo.y = std::min(lo.y, p.y);
    hi.x = std::max(hi.x, p.x), hi.y = std::max(hi.y, p.y);
  }
  return norm2(hi - lo);
}

double distance_to_boundary(const Polygon& hull, Vec2 p) {
  double d = std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; k < hull.size(); ++k) {
    const Vec2 a = hull[k];
    const Vec2 e = hull[(k + 1) % hull.size()] - a;
    d = std::min(d, cross(e, p - a) / norm(e));
  }
  return d;
}

}  // namespace

std::size_t PLConvexFunction::flagged_count() const {
  return static_cast<std::size_t>(std::count(roles_.begin(), roles_.end(), NodeRole::NonExtreme));
}

double PLConvexFunction::evaluate(Vec2 x) const {
  double best = -std::numeric_limits<double>::infinity();
  for (const Facet& f : facets_) best = std::max(best, dot(f.gradient, x) + f.offset);
  return best;
}

PLConvexFunction lower_hull(std::vector<Vec2> nodes, std::vector<double> values, const HullOptions& opts) {
  if (nodes.size() != values.size()) throw Error(ErrorKind::InvalidInput, "nodes and values differ in length");
  if (nodes.size() < 3) throw Error(ErrorKind::Degenerate, "lower hull needs at least 3 nodes");
  const Polygon node_hull = convex_hull(nodes);
  if (node_hull.size() < 3 || polygon_area(node_hull) <= 0.0)
    throw Error(ErrorKind::Degenerate, "all nodes are collinear");
  for (double v : values)
    if (!std::isfinite(v)) throw Error(ErrorKind::InvalidInput, "non-finite node value");

  const std::size_t n = nodes.size();
  const double dmin = smallest_spacing(nodes);
  if (!(dmin > 0.0)) throw Error(ErrorKind::InvalidInput, "duplicate nodes");
  const auto [umin_it, umax_it] = std::minmax_element(values.begin(), values.end());
  const double range = *umax_it - *umin_it;
  double diameter = 0.0;
  double x_scale = 0.0;
  for (const Vec2& p : node_hull) x_scale = std::max(x_scale, norm(p));
  for (std::size_t a = 0; a < node_hull.size(); ++a)
    for (std::size_t b = a + 1; b < node_hull.size(); ++b) diameter = std::max(diameter, norm(node_hull[a] - node_hull[b]));
  double u_scale = 0.0;
  for (double v : values) u_scale = std::max(u_scale, std::abs(v));

  // A facet through lattice-like nodes has gradient at most sqrt(2) range diameter / dmin^2.
  const double box = opts.gradient_box > 0.0 ? opts.gradient_box : 4.0 * (range * diameter / (dmin * dmin) + 1.0);
  const Buckets buckets(nodes, values, 4.0 * dmin);
  const CellBuilder builder{nodes, values, buckets, box, u_scale, x_scale};

  PLConvexFunction f;
  f.roles_.assign(n, NodeRole::Above);
  f.truncated_.assign(n, 0);
  f.collar_.assign(n, 0);
  f.cells_.assign(n, {});
  f.masses_.assign(n, 0.0);
  std::vector<Polygon> box_cells(n);
  std::vector<std::vector<std::size_t>> constraints(n);

  const double near = 2.5 * dmin;
  const double edge = box * (1.0 - 1e-12);
  std::vector<std::size_t> warm;
  for (std::size_t i = 0; i < n; ++i) {
    std::vector<std::size_t> cons;
    buckets.for_each_near(nodes[i], near, [&](std::size_t j) {
      if (j != i) cons.push_back(j);
    });
    // Far constraints of the previous node are good guesses for this one.
    for (std::size_t j : warm)
      if (j != i && std::find(cons.begin(), cons.end(), j) == cons.end()) cons.push_back(j);
    Polygon cell = builder.exact_cell(i, cons);
    warm = cell.empty() ? std::vector<std::size_t>{} : active_constraints(nodes, values, i, cons, cell);
    constraints[i] = warm;
    bool truncated = false;
    for (const Vec2& p : cell)
      if (std::abs(p.x) >= edge || std::abs(p.y) >= edge) truncated = true;
    // Clips that start from the huge box leave vertex errors of order
    // eps * box; bounded cells are redone from a tight start.
    if (!truncated && cell.size() >= 3) cell = builder.clip_from(padded_bbox(cell), i, warm, 0.0);
    if (cell.size() >= 3 && polygon_area(cell) > 1e-12 * bbox_diag2(cell)) {
      f.roles_[i] = NodeRole::Vertex;
      f.truncated_[i] = truncated;
      box_cells[i] = std::move(cell);
    } else {
      const double slack = 1e-9 * (u_scale + 1.0);
      f.roles_[i] = builder.clip(i, cons, slack).empty() ? NodeRole::Above : NodeRole::NonExtreme;
    }
  }

  // Facet gradients are the finite cell vertices; group the nodes sharing one.
  struct Tag {
    Vec2 p;
    std::size_t node;
  };
  std::vector<Tag> tags;
  for (std::size_t i = 0; i < n; ++i)
    for (const Vec2& p : box_cells[i])
      if (std::abs(p.x) < edge && std::abs(p.y) < edge) tags.push_back({p, i});
  std::sort(tags.begin(), tags.end(), [](const Tag& a, const Tag& b) { return lex_less(a.p, b.p); });

  struct Group {
    Vec2 rep;
    std::vector<std::size_t> nodes;
  };
  std::vector<Group> groups;
  std::size_t window_start = 0;
  for (const Tag& t : tags) {
    const double tol = 1e-8 * (1.0 + norm(t.p));
    while (window_start < groups.size() && groups[window_start].rep.x < t.p.x - tol) ++window_start;
    Group* hit = nullptr;
    for (std::size_t g = window_start; g < groups.size(); ++g)
      if (norm(groups[g].rep - t.p) <= tol) {
        hit = &groups[g];
        break;
      }
    if (!hit) {
      groups.push_back({t.p, {}});
      hit = &groups.back();
    }
    hit->nodes.push_back(t.node);
  }

  std::vector<Vec2> gradients;
  gradients.reserve(groups.size());
  for (Group& g : groups) {
    std::sort(g.nodes.begin(), g.nodes.end());
    g.nodes.erase(std::unique(g.nodes.begin(), g.nodes.end()), g.nodes.end());
    if (g.nodes.size() < 3) continue;
    gradients.push_back(g.rep);
    double offset = 0.0;
    for (std::size_t i : g.nodes) offset += values[i] - dot(g.rep, nodes[i]);
    offset /= static_cast<double>(g.nodes.size());
    // Counterclockwise order around the centroid, then a fan from the
    // lexicographically smallest node.
    Vec2 c{};
    for (std::size_t i : g.nodes) c += nodes[i];
    c *= 1.0 / static_cast<double>(g.nodes.size());
    std::vector<std::size_t> ring = g.nodes;
    std::sort(ring.begin(), ring.end(), [&](std::size_t a, std::size_t b) {
      const Vec2 da = nodes[a] - c, db = nodes[b] - c;
      return std::atan2(da.y, da.x) < std::atan2(db.y, db.x);
    });
    const auto first = std::min_element(ring.begin(), ring.end(),
                                        [&](std::size_t a, std::size_t b) { return lex_less(nodes[a], nodes[b]); });
    std::rotate(ring.begin(), first, ring.end());
    for (std::size_t k = 1; k + 1 < ring.size(); ++k)
      f.facets_.push_back({{ring[0], ring[k], ring[k + 1]}, g.rep, offset});
  }
  f.gradient_hull_ = convex_hull(std::move(gradients));

  const double collar = opts.collar_width > 0.0 ? opts.collar_width : 1.5 * dmin;
  for (std::size_t i = 0; i < n; ++i) {
    f.collar_[i] = distance_to_boundary(node_hull, nodes[i]) < collar;
    if (f.roles_[i] != NodeRole::Vertex || f.gradient_hull_.size() < 3) continue;
    f.cells_[i] = f.truncated_[i]
                      ? intersect_convex(builder.clip_from(padded_bbox(f.gradient_hull_), i, constraints[i], 0.0),
                                         f.gradient_hull_)
                      : intersect_convex(box_cells[i], f.gradient_hull_);
    f.masses_[i] = polygon_area(f.cells_[i]);
  }
  f.nodes_ = std::move(nodes);
  f.values_ = std::move(values);
  return f;
}

Polygon subgradient_polygon(const PLConvexFunction& f, std::size_t node) {
  if (node >= f.size()) throw Error(ErrorKind::InvalidInput, "node index out of range");
  return f.role(node) == NodeRole::Vertex ? f.cell(node) : Polygon{};
}

MAMeasureReport ma_measure(const PLConvexFunction& f, std::span<const Vec2> region, double atom_threshold) {
  MAMeasureReport rep;
  rep.masses.assign(f.size(), 0.0);
  for (std::size_t i = 0; i < f.size(); ++i) {
    if (f.in_collar(i) || f.role(i) != NodeRole::Vertex) continue;
    if (!region.empty() && !contains_point(region, f.nodes()[i], 1e-12)) continue;
    rep.masses[i] = f.mass(i);
    rep.total += f.mass(i);
    if (f.mass(i) > atom_threshold) rep.atoms.emplace_back(i, f.mass(i));
  }
  std::stable_sort(rep.atoms.begin(), rep.atoms.end(), [](const auto& a, const auto& b) { return a.second > b.second; });
  return rep;
}

double ma_mass(const PLConvexFunction& f, std::span<const Vec2> region) {
  return ma_measure(f, region, std::numeric_limits<double>::infinity()).total;
}

ComparisonResult discrete_comparison(const PLConvexFunction& u, const PLConvexFunction& v, double tol) {
  if (u.size() != v.size() || !std::equal(u.nodes().begin(), u.nodes().end(), v.nodes().begin()))
    throw Error(ErrorKind::InvalidInput, "comparison needs identical node sets");
  ComparisonResult res{true, std::nullopt};
  const double mass_tol = 1e-12;
  for (std::size_t i = 0; i < u.size(); ++i) {
    if (u.in_collar(i)) {
      if (u.values()[i] > v.values()[i] + tol) res.hypotheses_hold = false;
    } else if (u.mass(i) + mass_tol < v.mass(i)) {
      res.hypotheses_hold = false;
    }
  }
  std::vector<std::size_t> order(u.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(),
            [&](std::size_t a, std::size_t b) { return lex_less(u.nodes()[a], u.nodes()[b]); });
  for (std::size_t i : order)
    if (u.values()[i] > v.values()[i] + tol) {
      res.violation = i;
      break;
    }
  return res;
}

}  // namespace mongeampere
