#pragma once

#include <array>
#include <functional>
#include <iosfwd>
#include <limits>
#include <string>
#include <vector>

#include <Eigen/Core>
#include <Eigen/LU>

#include "mongeampere/geometry.hpp"
#include "mongeampere/grid.hpp"

namespace mongeampere {

using PlaneFunction = std::function<double(Vec2)>;

// (1/2pi) ( oint_{|x|=R} (u1 u22 x1 - u1 u12 x2)/|x| ds - pi R^2 ), the
// divergence form of det D^2 u integrated over B_R, minus the Lebesgue part.
// Derivatives are central differences with the given step; the circle uses
// the periodic trapezoid rule with quadrature_count angles.
double flux_D(const PlaneFunction& u, double R, int quadrature_count, double step);
// Same flux for u = |x|^2/2 + e, from the excess e alone; keeps the digits
// that the subtraction of pi R^2 loses at large R.
double flux_D_excess(const PlaneFunction& e, double R, int quadrature_count, double step);
// Grid data: bilinear interpolation with the grid spacing as the step.
double flux_D(const GridFunction& u, double R, int quadrature_count);

struct AnnulusSamples {
  enum class Source { ClosedForm, GridInterpolation };

  struct Annulus {
    double radius = 0.0;
    std::vector<Vec2> points;
    std::vector<double> values;
  };

  std::vector<Annulus> annuli;
  Source source = Source::ClosedForm;
  // Values hold u(x) - |x|^2/2; keeps the far field digits for closed forms.
  bool excess_form = false;

  // Radii strictly increasing, at least 64 samples per annulus.
  void validate() const;
};

// count equally spaced angles on each circle.
AnnulusSamples sample_annuli(const PlaneFunction& u, const std::vector<double>& radii, int count,
                             AnnulusSamples::Source source, bool excess_form = false);

struct AnnulusResidual {
  double radius;
  std::size_t count;
  double max_abs;
  double rms;
};

struct DecayEstimate {
  double sigma_hat = std::numeric_limits<double>::quiet_NaN();
  bool floor_limited = false;  // residuals at rounding level; no exponent measured
  bool failure = false;        // negative exponent or a drifting log coefficient
  // |d(outer half) - d(inner half)| / max(1, |d(outer half)|); NaN below six annuli.
  double log_drift = std::numeric_limits<double>::quiet_NaN();
  std::vector<AnnulusResidual> residuals;
};

struct AsymptoticFit {
  Eigen::Matrix2d A = Eigen::Matrix2d::Identity();
  double d = 0.0;
  std::array<double, 3> ell{0.0, 0.0, 0.0};  // b1, b2, b0
  int rounds = 0;
  DecayEstimate decay;

  double det_A() const { return A.determinant(); }
  // A / sqrt(det A); diagnostics only.
  Eigen::Matrix2d normalized_A() const;
  double model(Vec2 x) const;         // 1/2 x'Ax + d ln sqrt(x'Ax) + l(x)
  double model_excess(Vec2 x) const;  // model(x) - |x|^2/2

  // Lines "key value" for a11 a12 a22 d b1 b2 b0 sigma_hat det_A.
  void write(std::ostream& os) const;
  static AsymptoticFit read(std::istream& is);
  void write_residual_csv(std::ostream& os) const;
};

// Iterated least squares: the first round fits ln|x|, later rounds replace it
// by ln sqrt(x'Ax) with the previous A, until the parameters move by less
// than 1e-10 or five rounds have run. Rows are weighted by (r / r_max)^2 so
// the far field pins the parameters. Throws Degenerate on a rank deficient
// design and InvalidInput on fewer than three annuli or less than an octave.
AsymptoticFit fit_expansion(const AnnulusSamples& samples);

// Sup residual per annulus regressed on ln r; sigma_hat is minus the slope.
// Annuli whose residual is at the rounding level of the data are left out.
// With six or more annuli the log coefficient is also refitted on the inner
// and outer halves; a relative drift above 0.1 sets the failure flag, as
// does a negative sigma_hat. Throws InvalidInput with fewer than three annuli.
DecayEstimate residual_decay(const AnnulusSamples& samples, const AsymptoticFit& fit);

}  // namespace mongeampere
