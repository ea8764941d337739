#pragma once

#include <functional>
#include <span>

namespace mongeampere {

struct QuadratureOptions {
  double abs_tol = 1e-10;
  int max_depth = 20;
};

// Adaptive Gauss-Kronrod (7/15) integration on [a, b] with an absolute
// tolerance, split at the given interior breakpoints. The tolerance is
// distributed over panels in proportion to their length.
double integrate(const std::function<double(double)>& f, double a, double b,
                 const QuadratureOptions& opts = {}, std::span<const double> breakpoints = {});

// Same, but panels are additionally cut on a geometric ladder (ratio 2)
// beyond max(1, a); suited to integrands with power-law behavior at large r.
double integrate_radial(const std::function<double(double)>& f, double a, double b,
                        const QuadratureOptions& opts = {}, std::span<const double> breakpoints = {});

// Periodic trapezoid rule over [0, 2 pi) with n equally spaced angles.
double integrate_angle(const std::function<double(double)>& g, int n);

}  // namespace mongeampere
