#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <iosfwd>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "mongeampere/geometry.hpp"

namespace mongeampere {

using BoundaryFunction = std::function<double(Vec2)>;

// Lattice step vectors of the wide stencil: W primitive vectors (a, b) with
// a > 0, b >= 0, sorted by angle. Their rotations by 90 degrees complete the
// orthogonal pairs. W must be one of 2, 4, 8, 12.
std::vector<std::array<int, 2>> stencil_directions(int W);

// W = 8 for h <= 1/32, W = 4 above.
int default_stencil_width(double h);

// Lattice points (i h, j h) with |x| <= R - h, ordered lexicographically by
// (x1, x2). Every stencil ray either ends on an interior node or is cut at
// its intersection with the circle |x| = R.
class GridDisk {
 public:
  struct Ray {
    std::int32_t neighbor;  // node index, or -1 when the ray is cut by the circle
    double arm;             // distance to the neighbor or to the circle
    Vec2 end;               // neighbor position or boundary point
  };

  GridDisk(double R, double h, int W);

  double R() const { return R_; }
  double h() const { return h_; }
  int W() const { return W_; }
  std::size_t size() const { return nodes_.size(); }
  const std::vector<Vec2>& nodes() const { return nodes_; }
  Vec2 node(std::size_t i) const { return nodes_[i]; }
  std::array<int, 2> lattice(std::size_t i) const { return lattice_[i]; }
  // Node index of lattice point (i, j), or -1.
  std::int64_t index(int i, int j) const;
  std::int64_t origin() const { return index(0, 0); }
  const std::vector<std::array<int, 2>>& directions() const { return dirs_; }

  // 4W rays of a node: for pair k the entries 4k..4k+3 are
  // (v_k forward, v_k backward, v_k rotated forward, v_k rotated backward).
  std::span<const Ray> rays(std::size_t i) const {
    return {rays_.data() + i * rays_per_node(), rays_per_node()};
  }
  std::size_t rays_per_node() const { return 4 * static_cast<std::size_t>(W_); }
  bool near_boundary(std::size_t i) const { return cut_[i] != 0; }

 private:
  double R_, h_;
  int W_;
  int m_;  // lattice half-width
  std::vector<Vec2> nodes_;
  std::vector<std::array<int, 2>> lattice_;
  std::vector<std::int64_t> lookup_;
  std::vector<std::array<int, 2>> dirs_;
  std::vector<Ray> rays_;
  std::vector<char> cut_;
};

// Values on the interior nodes of a grid.
struct GridFunction {
  std::shared_ptr<const GridDisk> grid;
  std::vector<double> values;

  // Columnar text: one header line "R h W count", then "x1 x2 value" rows.
  // Numbers are written with 17 significant digits so reading back is exact.
  void write(std::ostream& os) const;
  static GridFunction read(std::istream& is);
  void save(const std::string& path) const;
  static GridFunction load(const std::string& path);
};

// Bilinear interpolation from the lattice cell containing x; all four
// corners must be grid nodes.
double bilinear(const GridFunction& u, Vec2 x);

// Density per node: mass of the node's h-cell divided by h^2. The atom part
// is also kept separately because the solver treats those nodes differently.
struct DiscreteRHS {
  std::vector<double> density;
  std::vector<double> atom_mass;
  double max() const;
  double total_mass(double h) const;
};

}  // namespace mongeampere
