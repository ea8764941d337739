#pragma once

#include <vector>

namespace mongeampere {

// A radial density r -> f(r) made of three pieces:
//   [0, floor_radius)           constant core value (0 for the lower profile),
//   [floor_radius, tail_radius] linear interpolation of samples,
//   (tail_radius, inf)          1 + tail_b * r^(-tail_beta).
// All moment integrals are evaluated in closed form on this representation.
class RadialProfile {
 public:
  struct Sample {
    double radius;
    double value;
  };

  struct Tail {
    double b = 0.0;
    double beta = 4.0;
    double radius = 0.0;
  };

  RadialProfile(double floor_radius, double core_value, std::vector<Sample> samples, Tail tail,
                bool allow_slow_tail = false);

  // Profile identically equal to one.
  static RadialProfile unit();

  double density(double r) const;

  // Integral over [a, b] of n t^(n-1) (f(t) - 1) dt; b may be +infinity.
  double excess_moment(double a, double b, int n) const;
  // Integral over [a, b] of n t^(n-1) f(t) dt.
  double moment(double a, double b, int n) const;

  double floor_radius() const { return floor_radius_; }
  double core_value() const { return core_value_; }
  const std::vector<Sample>& samples() const { return samples_; }
  const Tail& tail() const { return tail_; }

  // Radii where the representation changes smoothness.
  std::vector<double> breakpoints() const;

 private:
  double excess_on_piece(double a, double b, int n) const;

  double floor_radius_;
  double core_value_;
  std::vector<Sample> samples_;
  Tail tail_;
};

}  // namespace mongeampere
