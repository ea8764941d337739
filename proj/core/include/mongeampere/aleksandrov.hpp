#pragma once

#include <array>
#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include "mongeampere/polygon.hpp"

namespace mongeampere {

enum class NodeRole {
  Vertex,      // extreme point of the lower hull; carries a 2-d subgradient cell
  NonExtreme,  // on the hull but inside a facet or edge (flagged)
  Above,       // strictly above the lower hull (data not convex there)
};

struct Facet {
  std::array<std::size_t, 3> nodes;
  Vec2 gradient;
  double offset;  // the facet plane is gradient . x + offset
};

struct HullOptions {
  // Half-width of the square that truncates unbounded cells while they are
  // built. Zero picks a bound from the data that contains every facet
  // gradient of lattice-like node sets.
  double gradient_box = 0.0;
  // Nodes closer than this to the boundary of the node hull form the collar
  // excluded from mass queries. Zero means 1.5 times the smallest spacing.
  double collar_width = 0.0;
};

// Lower convex envelope of lifted points (x_i, u_i) together with its normal
// fan. Cells are the subdifferentials of the envelope at each node, clipped
// to the convex hull of all facet gradients, so the cell areas add up to the
// area of that hull.
class PLConvexFunction {
 public:
  const std::vector<Vec2>& nodes() const { return nodes_; }
  const std::vector<double>& values() const { return values_; }
  const std::vector<Facet>& facets() const { return facets_; }
  NodeRole role(std::size_t i) const { return roles_[i]; }
  bool truncated(std::size_t i) const { return truncated_[i]; }
  bool in_collar(std::size_t i) const { return collar_[i]; }
  const Polygon& cell(std::size_t i) const { return cells_[i]; }
  double mass(std::size_t i) const { return masses_[i]; }
  const Polygon& gradient_hull() const { return gradient_hull_; }
  std::size_t size() const { return nodes_.size(); }
  std::size_t flagged_count() const;

  // Envelope value: maximum over facet planes. Exact at hull vertices up to rounding.
  double evaluate(Vec2 x) const;

 private:
  friend PLConvexFunction lower_hull(std::vector<Vec2>, std::vector<double>, const HullOptions&);

  std::vector<Vec2> nodes_;
  std::vector<double> values_;
  std::vector<Facet> facets_;
  std::vector<NodeRole> roles_;
  std::vector<char> truncated_;
  std::vector<char> collar_;
  std::vector<Polygon> cells_;
  std::vector<double> masses_;
  Polygon gradient_hull_;
};

PLConvexFunction lower_hull(std::vector<Vec2> nodes, std::vector<double> values, const HullOptions& opts = {});

// Counterclockwise subgradient cell of a node; empty for nodes that are not
// hull vertices.
Polygon subgradient_polygon(const PLConvexFunction& f, std::size_t node);

struct MAMeasureReport {
  std::vector<double> masses;  // per node (0 in the collar and off the hull)
  double total = 0.0;
  std::vector<std::pair<std::size_t, double>> atoms;  // nodes above the threshold, by decreasing mass
};

// Masses of hull vertices inside the region (the collar is always dropped).
MAMeasureReport ma_measure(const PLConvexFunction& f, std::span<const Vec2> region, double atom_threshold);
double ma_mass(const PLConvexFunction& f, std::span<const Vec2> region);

struct ComparisonResult {
  bool hypotheses_hold;                 // Mu >= Mv off the collar and u <= v on it
  std::optional<std::size_t> violation; // first node (lexicographic) with u > v + tol
  bool pass() const { return !violation.has_value(); }
};

ComparisonResult discrete_comparison(const PLConvexFunction& u, const PLConvexFunction& v, double tol = 1e-9);

}  // namespace mongeampere
