#pragma once

#include <optional>

#include "mongeampere/measure.hpp"
#include "mongeampere/quadrature.hpp"
#include "mongeampere/radial.hpp"

namespace mongeampere {

struct SubSuperOptions {
  int sample_count = 256;
  int angle_count = 1024;
  double a_cap = 1e12;          // escalation of a stops here
  double ladder_max = 1e6;
  int ladder_per_octave = 8;
  QuadratureOptions quad{};
};

// Radial barriers for the n-dimensional exhaustion, in the normalization
// Omega inside B_1/2, A = I, l = 0.
//
//   under(r) = -c0                        r < 1/2
//            = -K int_r^1 Q(s)^(1/n) ds   1/2 <= r < 1, Q(s) = int_s^1 n t^(n-1) f_upper
//            = int_1^r (int_1^s n t^(n-1) f_upper + K)^(1/n) ds   r >= 1
//   over(r)  = 0 for r <= 1, int_1^r (int_1^s n t^(n-1) f_lower)^(1/n) ds beyond.
//
// Inside B_1 the under barrier stands in for the local solution v1 by its
// lower comparison function; the bounds beta_minus / beta_plus are taken on
// r >= 1 (plus r <= 1 for the over barrier, where it vanishes). When a
// barrier grows logarithmically (n = 2) the matching beta is infinite.
class SubSuperPair {
 public:
  int dimension() const { return n_; }
  double a() const { return a_; }
  double c0() const { return c0_; }
  double c1() const { return c1_; }
  double K() const { return K_; }
  double beta_minus() const { return beta_minus_; }
  double beta_plus() const { return beta_plus_; }
  bool bounded() const;

  double u_under(double r) const;
  double u_over(double r) const;
  // Excess over (r^2 - 1)/2 for r >= 1, full precision at large r.
  double under_excess(double r) const;
  double over_excess(double r) const;

  // One-sided radial slopes of the under barrier at r = 1.
  double under_slope_inner() const { return slope_inner_; }
  double under_slope_outer() const { return slope_outer_; }

  const RadialProfile& f_upper() const { return under_.profile(); }
  const RadialProfile& f_lower() const { return over_.profile(); }
  const RadialPotential& under_potential() const { return under_; }
  const RadialPotential& over_potential() const { return over_; }

 private:
  friend SubSuperPair build_sub_super(int, const SourceMeasure&, double, std::optional<double>,
                                      const SubSuperOptions&);
  SubSuperPair(RadialPotential under, RadialPotential over) : under_(std::move(under)), over_(std::move(over)) {}

  double inner_root(double s) const;  // Q(s)^(1/n)

  RadialPotential under_;
  RadialPotential over_;
  int n_ = 0;
  double a_ = 0.0, c0_ = 0.0, c1_ = 0.0, K_ = 0.0;
  double beta_minus_ = 0.0, beta_plus_ = 0.0;
  double slope_inner_ = 0.0, slope_outer_ = 0.0;
  QuadratureOptions quad_{};
};

// (2^(n-1) / omega_n)^(1/n); lower bound constant for the local solution
// with zero boundary values on B_1.
double aleksandrov_constant(int n);
double unit_ball_volume(int n);

// nu(B_1) of the absolutely continuous part plus atoms in B_1.
double unit_ball_mass(const SourceMeasure& measure);

// v1_lower_bound, when given, is a (negative) lower bound for the local
// solution on B_1/2 and fixes c0 = -v1_lower_bound; a is then used as is and
// c0 < c1 is a construction failure. Otherwise c0 = c(n) (nu(B_1) + a)^(1/n)
// and a is doubled until c0 >= c1.
SubSuperPair build_sub_super(int n, const SourceMeasure& measure, double a,
                             std::optional<double> v1_lower_bound = std::nullopt,
                             const SubSuperOptions& opts = {});

}  // namespace mongeampere
