#pragma once

#include <span>
#include <vector>

#include "mongeampere/measure.hpp"
#include "mongeampere/sub_super.hpp"

namespace mongeampere {

// Radial solution of det D^2 u = f on B_R with u = R^2/2 on the sphere,
//   u(r) = R^2/2 + int_R^r ( int_0^s n t^(n-1) f )^(1/n) ds.
class RadialDirichlet {
 public:
  RadialDirichlet(const SourceMeasure& measure, double R, int sample_count = 512, QuadratureOptions quad = {});

  double R() const { return R_; }
  double value(double r) const;
  double excess(double r) const;  // value(r) - r^2/2
  const RadialPotential& potential() const { return pot_; }

 private:
  RadialPotential pot_;
  double R_;
  double excess_R_;
};

struct SandwichRecord {
  double R;
  double lower_margin;  // min over sampled r >= 1 of u_R - (under + beta_minus)
  double upper_margin;  // min over sampled r of (over + beta_plus) - u_R
  double worst_lower_radius;
  double worst_upper_radius;
};

struct SandwichReport {
  std::vector<SandwichRecord> records;
  double min_margin() const;
};

struct SandwichOptions {
  int radii_per_R = 96;
  double tolerance = 0.0;  // margins below -tolerance are violations
  int sample_count = 512;
};

// Evaluates both sides of the barrier inequality for every radius in the
// schedule. The lower side is sampled on [1, R] (where the under barrier is
// explicit), the upper side on [0, R]. Throws InvariantViolation on a
// negative margin.
SandwichReport radial_sandwich_check(int n, const SourceMeasure& measure, const SubSuperPair& pair,
                                     std::span<const double> schedule, const SandwichOptions& opts = {});

}  // namespace mongeampere
