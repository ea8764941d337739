#pragma once

#include <vector>

#include "mongeampere/measure.hpp"
#include "mongeampere/quadrature.hpp"
#include "mongeampere/radial_profile.hpp"

namespace mongeampere {

enum class RadializeMode {
  Lower,  // circle minimum beyond rho, zero inside
  Upper,  // circle maximum from r = 1/2 on
};

struct RadializeOptions {
  int angle_count = 1024;
};

// Circle extrema of the exterior density, sampled at sample_count radii on
// [floor, tail radius] and at angle_count angles per circle. Radial measures
// are evaluated along one ray. For smooth f the sampled minimum overshoots the
// true one by at most L * pi * r / angle_count with L the angular Lipschitz
// constant of f on the circle.
RadialProfile radialize(const SourceMeasure& measure, RadializeMode mode, int sample_count,
                        const RadializeOptions& opts = {});

// Exact radial density profile (compact part inside B_rho included) of a
// radial measure.
RadialProfile radial_density_profile(const SourceMeasure& measure, int sample_count);

// The radial function
//   U(r) = integral_{origin}^{r} ( constant + integral_{inner}^{s} n t^(n-1) f(t) dt )^(1/n) ds
// for a profile f. Every radial object of the construction (w_c, the Joergens
// family, the barriers of the higher dimensional sandwich, radial Dirichlet
// solutions) is an instance. Values are reported through the excess over
// (r^2 - origin^2)/2 so that large radii keep full relative precision.
class RadialPotential {
 public:
  RadialPotential(RadialProfile profile, int n, double inner, double constant, double origin,
                  QuadratureOptions quad = {});

  int dimension() const { return n_; }
  const RadialProfile& profile() const { return profile_; }
  double constant() const { return constant_; }

  // constant + integral_{inner}^{s} n t^(n-1) f - s^n
  double slope_power_excess(double s) const;
  double slope(double s) const;
  double slope_excess(double s) const;  // slope(s) - s
  double excess(double r) const;        // U(r) - (r^2 - origin^2)/2
  double excess_between(double a, double b) const;  // excess(b) - excess(a)
  double value(double r) const;

 private:
  RadialProfile profile_;
  int n_;
  double inner_;
  double constant_;
  double origin_;
  QuadratureOptions quad_;
  std::vector<double> knots_;       // radii where the profile changes piece
  std::vector<double> knot_excess_; // slope_power_excess at each knot
  std::vector<double> breaks_;
};

struct ValueSlope {
  double value;
  double slope;
};

// w_c(r) = int_0^r ( int_0^s 2 t f(t) dt + 2c )^(1/2) ds and its derivative.
ValueSlope w_c(const RadialProfile& profile, double c, double r, const QuadratureOptions& quad = {});
RadialPotential w_c_potential(const RadialProfile& profile, double c, const QuadratureOptions& quad = {});

// d_lower = int_0^inf r (f(r) - 1) dr for a lower profile.
double d_lower(const RadialProfile& profile);

struct LogCoefficientOptions {
  int sample_count = 256;
  int angle_count = 256;          // angular trapezoid for non-radial densities
  int radialize_angles = 1024;    // circle extrema for the lower profile
  double abs_tol = 1e-10;
  double identity_tol = 1e-8;
};

// d = (1/2pi) lim (nu(B_R) - pi R^2).
double compute_d(const SourceMeasure& measure, const LogCoefficientOptions& opts = {});

struct LogCoefficients {
  double d;
  double d_lower;
  double cbar;         // by the direct formula
  double cbar_via_d;   // d - d_lower
};

// Both routes to cbar; throws InternalConsistency when they disagree by more
// than opts.identity_tol.
LogCoefficients log_coefficients(const SourceMeasure& measure, const LogCoefficientOptions& opts = {});
double cbar(const SourceMeasure& measure, const LogCoefficientOptions& opts = {});

// int_0^r (c + t^n)^(1/n) dt.
double jorgens_solution(int n, double c, double r);
double jorgens_slope(int n, double c, double r);

// Dimension of the space of entire solutions with k singular points (n >= 3).
long long orbifold_dim(int n, int k);

}  // namespace mongeampere
