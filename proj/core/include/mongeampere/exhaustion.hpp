#pragma once

#include <iosfwd>
#include <limits>
#include <memory>
#include <string>
#include <vector>

#include "mongeampere/errors.hpp"
#include "mongeampere/grid.hpp"
#include "mongeampere/measure.hpp"
#include "mongeampere/radial.hpp"
#include "mongeampere/solver.hpp"

namespace mongeampere {

// Constant boundary value R^2/2 + d ln R in the plane, R^2/2 for n >= 3.
double boundary_value(int n, double R, double d);
BoundaryFunction boundary_data(int n, double R, double d);

struct Normalization {
  GridFunction u;  // u - (p.x + u(0))
  Vec2 p;          // least-norm subgradient of the lower envelope at the origin
  double u0 = 0.0;
};

// Subtracts the supporting plane at the origin. Throws Degenerate when the
// origin is not a vertex of the lower convex envelope of the samples.
Normalization normalize(const GridFunction& u);

// Level lambda with w(R) + lambda = R^2/2 + d ln R.
double claim_level(const RadialPotential& w, double R, double d);

struct ExhaustionOptions {
  double window = 4.0;
  double window_h = 1.0 / 32.0;
  int nodes_per_radius = 64;
  int stencil_width = 0;      // 0: default_stencil_width(h) per radius
  double cauchy_tol = 1e-3;
  double margin_tol = 1e-6;
  bool deterministic = false; // solve the radii one after another
  SolverOptions solver;
};

struct ExhaustionRecord {
  double R = 0.0;
  double h = 0.0;
  double u0 = 0.0;
  double lambda = 0.0;
  double claim_margin = 0.0;
  double sandwich_margin = 0.0;
  Vec2 p;
  double p_norm = 0.0;
  double cauchy_gap = std::numeric_limits<double>::quiet_NaN();  // none for the first radius
  int sweeps = 0;
  double residual = 0.0;
};

struct ExhaustionReport {
  std::vector<double> schedule;
  std::vector<ExhaustionRecord> records;
  double d = 0.0;
  double cbar = 0.0;
  double slope_bound = 0.0;  // largest slope of w_cbar on the window
  bool converged = false;

  // Columns R,h,u_R0,lambda,claim_margin,sandwich_margin,pR_norm,cauchy_gap.
  void write_csv(std::ostream& os) const;
  void save_csv(const std::string& path) const;
};

struct ExhaustionResult {
  GridFunction limit;      // last normalized iterate on the window grid
  Normalization last;      // last normalized iterate on its own grid
  ExhaustionReport report;
};

// Thrown when the schedule ends before the Cauchy test passes.
class ExhaustionNonConvergence : public Error {
 public:
  explicit ExhaustionNonConvergence(std::shared_ptr<const ExhaustionResult> result);
  const ExhaustionResult& result() const noexcept { return *result_; }

 private:
  std::shared_ptr<const ExhaustionResult> result_;
};

// Grid of the comparison window: lattice nodes with |x| <= window.
std::shared_ptr<const GridDisk> window_grid(double window, double h);

// Solves the Dirichlet problems over the schedule, normalizes at the origin,
// records the claim and sandwich margins and the window Cauchy gaps. Throws
// InvariantViolation when a margin or the slope bound fails and
// ExhaustionNonConvergence when the last gap is not below cauchy_tol.
ExhaustionResult run_exhaustion(const SourceMeasure& measure, const std::vector<double>& schedule,
                                const ExhaustionOptions& opts = {});

}  // namespace mongeampere
