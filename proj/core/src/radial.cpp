#include "mongeampere/radial.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <utility>

#include "mongeampere/errors.hpp"

namespace mongeampere {

namespace {

double ipow(double x, int n) {
  double r = 1.0;
  for (int i = 0; i < n; ++i) r *= x;
  return r;
}

Vec2 on_circle(double r, double theta) { return {r * std::cos(theta), r * std::sin(theta)}; }

struct CircleExtrema {
  double min;
  double max;
};

template <class F>
CircleExtrema circle_extrema(F&& f, double r, int angles, bool radial) {
  if (radial) {
    const double v = f(Vec2{r, 0.0});
    return {v, v};
  }
  CircleExtrema e{std::numeric_limits<double>::infinity(), -std::numeric_limits<double>::infinity()};
  for (int k = 0; k < angles; ++k) {
    const double v = f(on_circle(r, 2.0 * kPi * k / angles));
    e.min = std::min(e.min, v);
    e.max = std::max(e.max, v);
  }
  return e;
}

CircleExtrema amplitude_extrema(const TailModel& tail, int angles) {
  if (!tail.amplitude) return {0.0, 0.0};
  if (!tail.angular) {
    const double v = tail.amplitude(0.0);
    return {v, v};
  }
  CircleExtrema e{std::numeric_limits<double>::infinity(), -std::numeric_limits<double>::infinity()};
  for (int k = 0; k < angles; ++k) {
    const double v = tail.amplitude(2.0 * kPi * k / angles);
    e.min = std::min(e.min, v);
    e.max = std::max(e.max, v);
  }
  return e;
}

// Integral over the circle of radius r of g, with angular trapezoid for non-radial data.
template <class G>
double circle_integral(G&& g, double r, int angles, bool radial) {
  if (radial) return 2.0 * kPi * g(Vec2{r, 0.0});
  return integrate_angle([&](double th) { return g(on_circle(r, th)); }, angles);
}

double angular_mean_amplitude(const TailModel& tail, int angles) {
  if (!tail.amplitude) return 0.0;
  if (!tail.angular) return tail.amplitude(0.0);
  return integrate_angle([&](double th) { return tail.amplitude(th); }, angles) / (2.0 * kPi);
}

}  // namespace

RadialProfile radialize(const SourceMeasure& measure, RadializeMode mode, int sample_count,
                        const RadializeOptions& opts) {
  if (sample_count < 8) throw Error(ErrorKind::InvalidInput, "radialize needs at least 8 samples");
  const TailModel& tail = measure.tail();
  if (!(tail.beta > 2.0) && !measure.allows_slow_tail())
    throw Error(ErrorKind::RejectedMeasure, "tail exponent must exceed 2");
  const bool radial = measure.is_radial();
  const int angles = opts.angle_count;
  const bool lower = mode == RadializeMode::Lower;

  double floor = measure.rho();
  if (!lower) {
    if (measure.rho() > 0.5)
      throw Error(ErrorKind::InvalidInput, "upper profile needs the perturbation inside B_1/2");
    floor = std::min(0.5, tail.radius);
  }
  const double r_tail = std::max(tail.radius, floor);

  auto f = [&](Vec2 x) { return measure.exterior_density(x); };
  auto pick = [&](double r) {
    const CircleExtrema e = circle_extrema(f, r, angles, radial);
    const double v = lower ? e.min : e.max;
    if (!std::isfinite(v) || v < 0.0) {
      std::ostringstream msg;
      msg << "invalid measure: density " << v << " at radius " << r;
      throw Error(ErrorKind::InvalidInput, msg.str());
    }
    if (lower && v <= 0.0) {
      std::ostringstream msg;
      msg << "invalid measure: density must be positive outside the perturbation (radius " << r << ")";
      throw Error(ErrorKind::InvalidInput, msg.str());
    }
    return v;
  };

  std::vector<RadialProfile::Sample> samples;
  if (r_tail > floor) {
    samples.reserve(sample_count);
    for (int i = 0; i < sample_count; ++i) {
      const bool last = i + 1 == sample_count;
      const double r = last ? r_tail : floor + (r_tail - floor) * i / (sample_count - 1);
      // The tail piece starts past r_tail; the last sample is the limit from inside.
      samples.push_back({r, pick(last ? r * (1.0 - 1e-12) : r)});
    }
  }
  const CircleExtrema amp = amplitude_extrema(tail, radial ? 1 : angles);
  RadialProfile::Tail t{lower ? amp.min : amp.max, tail.beta, r_tail};
  if (!tail.amplitude) t.b = 0.0;
  if (t.b != 0.0 && r_tail <= 0.0)
    throw Error(ErrorKind::InvalidInput, "a nonzero tail needs a positive tail radius");
  double core = 0.0;
  if (!lower) core = samples.empty() ? (r_tail > 0.0 ? pick(r_tail) : 1.0) : samples.front().value;
  return RadialProfile(floor, core, std::move(samples), t, measure.allows_slow_tail());
}

RadialProfile radial_density_profile(const SourceMeasure& measure, int sample_count) {
  if (!measure.is_radial()) throw Error(ErrorKind::Unsupported, "density profile needs a radial measure");
  if (sample_count < 8) throw Error(ErrorKind::InvalidInput, "density profile needs at least 8 samples");
  const TailModel& tail = measure.tail();
  const double rho = measure.rho();
  std::vector<RadialProfile::Sample> samples;
  if (tail.radius > 0.0) {
    for (int i = 0; i < sample_count; ++i) {
      const double r = i + 1 == sample_count ? tail.radius : tail.radius * i / (sample_count - 1);
      if (rho > 0.0 && r > rho && (samples.empty() || samples.back().radius < rho)) {
        const double below = rho * (1.0 - 1e-12);
        if (samples.empty() || samples.back().radius < below)
          samples.push_back({below, measure.compact_density(Vec2{below, 0.0})});
        if (r > rho) samples.push_back({rho, measure.exterior_density(Vec2{rho, 0.0})});
      }
      const double at = i + 1 == sample_count ? r * (1.0 - 1e-12) : r;
      samples.push_back({r, measure.density(Vec2{at, 0.0})});
    }
  }
  RadialProfile::Tail t{tail.amplitude ? tail.amplitude(0.0) : 0.0, tail.beta, tail.radius};
  return RadialProfile(0.0, 1.0, std::move(samples), t, measure.allows_slow_tail());
}

RadialPotential::RadialPotential(RadialProfile profile, int n, double inner, double constant, double origin,
                                 QuadratureOptions quad)
    : profile_(std::move(profile)), n_(n), inner_(inner), constant_(constant), origin_(origin), quad_(quad) {
  if (n_ < 2) throw Error(ErrorKind::InvalidInput, "radial potential dimension must be at least 2");
  knots_.push_back(inner_);
  auto add = [&](double r) {
    if (r > inner_) knots_.push_back(r);
  };
  add(profile_.floor_radius());
  for (const auto& s : profile_.samples()) add(s.radius);
  add(profile_.tail().radius);
  std::sort(knots_.begin(), knots_.end());
  knots_.erase(std::unique(knots_.begin(), knots_.end()), knots_.end());
  knot_excess_.resize(knots_.size());
  knot_excess_[0] = constant_ - ipow(inner_, n_);
  for (std::size_t k = 1; k < knots_.size(); ++k)
    knot_excess_[k] = knot_excess_[k - 1] + profile_.excess_moment(knots_[k - 1], knots_[k], n_);
  for (double b : profile_.breakpoints()) breaks_.push_back(b);
  breaks_.push_back(inner_);
}

double RadialPotential::slope_power_excess(double s) const {
  if (s <= inner_) return constant_ - ipow(inner_, n_) - profile_.excess_moment(s, inner_, n_);
  auto it = std::upper_bound(knots_.begin(), knots_.end(), s);
  const std::size_t k = static_cast<std::size_t>(it - knots_.begin()) - 1;
  return knot_excess_[k] + profile_.excess_moment(knots_[k], s, n_);
}

double RadialPotential::slope(double s) const {
  const double sn = ipow(s, n_);
  const double m = sn + slope_power_excess(s);
  if (m < 0.0) {
    if (m < -1e-12 * std::max(1.0, sn)) {
      std::ostringstream msg;
      msg << "negative inner integral " << m << " at s = " << s;
      throw Error(ErrorKind::InternalConsistency, msg.str());
    }
    return 0.0;
  }
  return n_ == 2 ? std::sqrt(m) : std::pow(m, 1.0 / n_);
}

double RadialPotential::slope_excess(double s) const {
  if (s > 0.0) {
    const double x = slope_power_excess(s);
    const double ratio = x / ipow(s, n_);
    if (ratio > -0.5 && std::isfinite(ratio)) return s * std::expm1(std::log1p(ratio) / n_);
  }
  return slope(s) - s;
}

double RadialPotential::excess(double r) const {
  if (r == origin_) return 0.0;
  return integrate_radial([this](double s) { return slope_excess(s); }, origin_, r, quad_, breaks_);
}

double RadialPotential::excess_between(double a, double b) const {
  if (a == b) return 0.0;
  return integrate_radial([this](double s) { return slope_excess(s); }, a, b, quad_, breaks_);
}

double RadialPotential::value(double r) const { return 0.5 * (r * r - origin_ * origin_) + excess(r); }

RadialPotential w_c_potential(const RadialProfile& profile, double c, const QuadratureOptions& quad) {
  if (!(c >= 0.0)) throw Error(ErrorKind::InvalidInput, "w_c needs c >= 0");
  return RadialPotential(profile, 2, 0.0, 2.0 * c, 0.0, quad);
}

ValueSlope w_c(const RadialProfile& profile, double c, double r, const QuadratureOptions& quad) {
  if (!(r >= 0.0)) throw Error(ErrorKind::InvalidInput, "w_c needs r >= 0");
  const RadialPotential w = w_c_potential(profile, c, quad);
  return {w.value(r), w.slope(r)};
}

double d_lower(const RadialProfile& profile) {
  return 0.5 * profile.excess_moment(0.0, std::numeric_limits<double>::infinity(), 2);
}

namespace {

void require_planar_integrable(const SourceMeasure& measure) {
  if (measure.dimension() != 2) throw Error(ErrorKind::Unsupported, "log coefficient d is defined in the plane");
  if (!(measure.tail().beta > 2.0))
    throw Error(ErrorKind::RejectedMeasure, "divergent tail: beta <= 2 makes d infinite");
}

struct PlanarIntegrals {
  double atoms;
  double compact;         // int_Omega compact density
  double exterior_excess; // int_{R^2 \ Omega} (f - 1)
};

PlanarIntegrals planar_integrals(const SourceMeasure& measure, const LogCoefficientOptions& opts) {
  const bool radial = measure.is_radial();
  const int angles = opts.angle_count;
  const QuadratureOptions quad{opts.abs_tol};
  const double rho = measure.rho();
  const TailModel& tail = measure.tail();
  PlanarIntegrals out{measure.total_atom_mass(), 0.0, 0.0};
  if (rho > 0.0 && measure.spec().compact_density) {
    out.compact = integrate(
        [&](double r) {
          return r * circle_integral([&](Vec2 x) { return measure.compact_density(x); }, r, angles, radial);
        },
        0.0, rho, quad);
  }
  if (tail.radius > rho) {
    out.exterior_excess = integrate(
        [&](double r) {
          return r * circle_integral([&](Vec2 x) { return measure.exterior_density(x) - 1.0; }, r, angles, radial);
        },
        rho, tail.radius, quad);
  }
  if (tail.amplitude) {
    out.exterior_excess += 2.0 * kPi * angular_mean_amplitude(tail, radial ? 1 : angles) *
                           std::pow(tail.radius, 2.0 - tail.beta) / (tail.beta - 2.0);
  }
  return out;
}

}  // namespace

double compute_d(const SourceMeasure& measure, const LogCoefficientOptions& opts) {
  require_planar_integrable(measure);
  const PlanarIntegrals p = planar_integrals(measure, opts);
  const double rho = measure.rho();
  return (p.atoms + p.compact - kPi * rho * rho + p.exterior_excess) / (2.0 * kPi);
}

LogCoefficients log_coefficients(const SourceMeasure& measure, const LogCoefficientOptions& opts) {
  require_planar_integrable(measure);
  const PlanarIntegrals p = planar_integrals(measure, opts);
  const double rho = measure.rho();
  const RadialProfile lower =
      radialize(measure, RadializeMode::Lower, opts.sample_count, RadializeOptions{opts.radialize_angles});

  LogCoefficients out{};
  out.d = (p.atoms + p.compact - kPi * rho * rho + p.exterior_excess) / (2.0 * kPi);
  out.d_lower = d_lower(lower);

  // Direct route: (1/2pi) (nu(Omega) + int_{R^2 \ Omega} (f - f_lower)).
  const bool radial = measure.is_radial();
  const TailModel& tail = measure.tail();
  double gap = 0.0;
  if (!radial && tail.radius > rho) {
    std::vector<double> knots;
    for (const auto& s : lower.samples()) knots.push_back(s.radius);
    gap = integrate(
        [&](double r) {
          const double circle =
              circle_integral([&](Vec2 x) { return measure.exterior_density(x); }, r, opts.angle_count, false);
          return r * (circle - 2.0 * kPi * lower.density(r));
        },
        rho, tail.radius, QuadratureOptions{opts.abs_tol}, knots);
  }
  if (tail.amplitude && tail.angular) {
    const double mean_b = angular_mean_amplitude(tail, opts.angle_count);
    gap += 2.0 * kPi * (mean_b - lower.tail().b) * std::pow(tail.radius, 2.0 - tail.beta) / (tail.beta - 2.0);
  }
  out.cbar = (p.atoms + p.compact + gap) / (2.0 * kPi);
  out.cbar_via_d = out.d - out.d_lower;
  if (std::abs(out.cbar - out.cbar_via_d) > opts.identity_tol) {
    std::ostringstream msg;
    msg.precision(17);
    msg << "cbar routes disagree: direct " << out.cbar << " vs d - d_lower " << out.cbar_via_d;
    throw Error(ErrorKind::InternalConsistency, msg.str());
  }
  return out;
}

double cbar(const SourceMeasure& measure, const LogCoefficientOptions& opts) {
  return log_coefficients(measure, opts).cbar;
}

double jorgens_solution(int n, double c, double r) {
  if (!(c >= 0.0) || !(r >= 0.0)) throw Error(ErrorKind::InvalidInput, "Joergens profile needs c, r >= 0");
  if (c == 0.0) return 0.5 * r * r;
  return RadialPotential(RadialProfile::unit(), n, 0.0, c, 0.0).value(r);
}

double jorgens_slope(int n, double c, double r) {
  if (!(c >= 0.0) || !(r >= 0.0)) throw Error(ErrorKind::InvalidInput, "Joergens profile needs c, r >= 0");
  return std::pow(c + ipow(r, n), 1.0 / n);
}

long long orbifold_dim(int n, int k) {
  if (n < 3) throw Error(ErrorKind::Unsupported, "orbifold dimension formula holds for n >= 3");
  if (k < 1) throw Error(ErrorKind::InvalidInput, "orbifold dimension needs k >= 1");
  const long long km1 = k - 1;
  if (km1 <= n) return km1 + km1 * k / 2;
  return km1 + static_cast<long long>(n) * (n + 1) / 2 + (km1 - n) * n;
}

}  // namespace mongeampere
