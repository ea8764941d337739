#include "mongeampere/sandwich.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "mongeampere/errors.hpp"

namespace mongeampere {

RadialDirichlet::RadialDirichlet(const SourceMeasure& measure, double R, int sample_count, QuadratureOptions quad)
    : pot_(radial_density_profile(measure, sample_count), measure.dimension(), 0.0, 0.0, 0.0, quad), R_(R) {
  if (!(R > 0.0)) throw Error(ErrorKind::InvalidInput, "radius must be positive");
  excess_R_ = pot_.excess(R);
}

double RadialDirichlet::excess(double r) const { return pot_.excess_between(R_, r); }

double RadialDirichlet::value(double r) const { return 0.5 * r * r + excess(r); }

double SandwichReport::min_margin() const {
  double m = std::numeric_limits<double>::infinity();
  for (const auto& rec : records) m = std::min({m, rec.lower_margin, rec.upper_margin});
  return m;
}

SandwichReport radial_sandwich_check(int n, const SourceMeasure& measure, const SubSuperPair& pair,
                                     std::span<const double> schedule, const SandwichOptions& opts) {
  if (n < 3) throw Error(ErrorKind::Unsupported, "radial sandwich is implemented for n >= 3");
  if (measure.dimension() != n || pair.dimension() != n)
    throw Error(ErrorKind::InvalidInput, "dimension mismatch between measure, barriers and request");
  if (!measure.is_radial() || !measure.atoms().empty())
    throw Error(ErrorKind::Unsupported, "radial sandwich needs a radial measure without atoms");
  if (!pair.bounded()) throw Error(ErrorKind::ConstructionFailure, "barrier constants are infinite");

  SandwichReport report;
  for (double R : schedule) {
    if (!(R > 1.0)) throw Error(ErrorKind::InvalidInput, "schedule radii must exceed 1");
    const RadialDirichlet u(measure, R, opts.sample_count);
    SandwichRecord rec{R, std::numeric_limits<double>::infinity(), std::numeric_limits<double>::infinity(), 0.0,
                       0.0};
    // Geometric spacing on [1, R] plus a uniform sweep of [0, 1].
    std::vector<double> radii;
    for (int i = 0; i <= opts.radii_per_R / 4; ++i) radii.push_back(static_cast<double>(i) / (opts.radii_per_R / 4));
    for (int i = 1; i <= opts.radii_per_R; ++i) radii.push_back(std::pow(R, static_cast<double>(i) / opts.radii_per_R));
    radii.back() = R;

    double u_excess = u.excess(0.0);
    double prev = 0.0;
    double under_excess = 0.0, over_excess = 0.0, prev_outer = 1.0;
    for (double r : radii) {
      u_excess += u.potential().excess_between(prev, r);
      prev = r;
      // u_R - r^2/2 = u_excess
      if (r >= 1.0) {
        under_excess += pair.under_potential().excess_between(prev_outer, r);
        over_excess += pair.over_potential().excess_between(prev_outer, r);
        prev_outer = r;
        const double lower = u_excess - (under_excess - 0.5) - pair.beta_minus();
        const double upper = (over_excess - 0.5) + pair.beta_plus() - u_excess;
        if (lower < rec.lower_margin) rec.lower_margin = lower, rec.worst_lower_radius = r;
        if (upper < rec.upper_margin) rec.upper_margin = upper, rec.worst_upper_radius = r;
      } else {
        const double upper = pair.beta_plus() - 0.5 * r * r - u_excess;
        if (upper < rec.upper_margin) rec.upper_margin = upper, rec.worst_upper_radius = r;
      }
    }
    report.records.push_back(rec);
    if (rec.lower_margin < -opts.tolerance || rec.upper_margin < -opts.tolerance) {
      std::ostringstream msg;
      msg << "barrier inequality fails at R = " << R << ": lower margin " << rec.lower_margin << " (r = "
          << rec.worst_lower_radius << "), upper margin " << rec.upper_margin << " (r = " << rec.worst_upper_radius
          << ")";
      throw Error(ErrorKind::InvariantViolation, msg.str());
    }
  }
  return report;
}

}  // namespace mongeampere
