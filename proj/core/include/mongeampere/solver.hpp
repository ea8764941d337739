#pragma once

#include <cstddef>
#include <memory>
#include <vector>

#include "mongeampere/grid.hpp"
#include "mongeampere/measure.hpp"

namespace mongeampere {

// Midpoint rule for the density; each atom split over the four lattice
// nodes around it with bilinear weights (all four must be interior).
DiscreteRHS discretize_measure(const SourceMeasure& measure, const GridDisk& grid);

// Wide-stencil operator at a node: minimum over the W orthogonal pairs of
// the product of clamped directional second differences, minus rhs.
double ma_operator(const GridFunction& u, const BoundaryFunction& g, std::size_t node, const DiscreteRHS& rhs);

// Smallest directional second difference over all nodes and directions.
double min_second_difference(const GridFunction& u, const BoundaryFunction& g);

struct SolverOptions {
  double tol = 0.0;         // 0: 1e-9 * max(1, max rhs)
  int max_sweeps = 200000;
  double omega = 0.0;       // over-relaxation; 0 picks one from the grid size, 1 is plain Gauss-Seidel
  double bisection_tol = 1e-13;
  int history_stride = 1;   // record the residual every this many sweeps
  int area_zone = 8;        // nodes within this many steps of an atom node also use the area equation
};

struct SolveResult {
  GridFunction u;
  std::vector<double> history;  // max |residual| per recorded sweep
  int sweeps = 0;
  double residual = 0.0;
};

// Nonlinear Gauss-Seidel in lexicographic node order. Nodes without atoms
// solve the scalar wide-stencil equation in closed form; nodes carrying atom
// mass solve the local subgradient-area equation
//   |{p : p.(y_r - x) <= u(y_r) - u(x) for every stencil ray r}| = h^2 rhs
// by bisection, since the finite-difference operator is not consistent for
// a Dirac mass. The iteration starts from the quadratic matching g at the
// four axis points of the circle.
SolveResult solve_dirichlet(std::shared_ptr<const GridDisk> grid, const DiscreteRHS& rhs, const BoundaryFunction& g,
                            const SolverOptions& opts = {});

// Residual of the equation actually solved at each node (area form near atoms).
std::vector<double> scheme_residuals(const GridFunction& u, const BoundaryFunction& g, const DiscreteRHS& rhs,
                                     int area_zone = 8);

}  // namespace mongeampere
