#include "mongeampere/sub_super.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "mongeampere/errors.hpp"

namespace mongeampere {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// excess(inf) - excess(r) from the far-field form of the slope; r must lie in
// the tail region. Infinite (with sign) when the log term survives in the plane.
double excess_to_infinity(const RadialPotential& pot, double r) {
  const int n = pot.dimension();
  const auto& tail = pot.profile().tail();
  if (r < tail.radius) throw Error(ErrorKind::InvalidInput, "tail limit requested inside the tail radius");
  const double b = tail.b;
  const double beta = tail.beta;
  if (b != 0.0 && std::abs(beta - n) < 1e-12)
    throw Error(ErrorKind::Unsupported, "tail exponent equal to the dimension is not handled");
  const double tail_part = b != 0.0 ? n * b * std::pow(r, n - beta) / (n - beta) : 0.0;
  const double x_const = pot.slope_power_excess(r) - tail_part;
  const double b_term = b != 0.0 ? b * std::pow(r, 2.0 - beta) / ((n - beta) * (beta - 2.0)) : 0.0;
  if (n == 2) {
    if (std::abs(x_const) > 1e-9) return x_const > 0.0 ? kInf : -kInf;
    return b_term;
  }
  return x_const / (n * (n - 2.0) * std::pow(r, n - 2.0)) + b_term;
}

std::vector<double> ladder(const SubSuperOptions& opts) {
  std::vector<double> radii;
  for (int k = 0;; ++k) {
    const double r = std::exp2(static_cast<double>(k) / opts.ladder_per_octave);
    if (r > opts.ladder_max) break;
    radii.push_back(r);
  }
  if (radii.back() < opts.ladder_max) radii.push_back(opts.ladder_max);
  return radii;
}

// Values of 1/2 - excess(r) along the ladder (the gap r^2/2 - U(r) for a
// potential anchored at r = 1), followed by its limit.
std::vector<double> gap_on_ladder(const RadialPotential& pot, const std::vector<double>& radii) {
  std::vector<double> gaps;
  gaps.reserve(radii.size() + 1);
  double e = 0.0;
  double prev = 1.0;
  for (double r : radii) {
    e += pot.excess_between(prev, r);
    prev = r;
    gaps.push_back(0.5 - e);
  }
  const double rest = excess_to_infinity(pot, prev);
  gaps.push_back(std::isinf(rest) ? -rest : 0.5 - (e + rest));
  return gaps;
}

}  // namespace

double unit_ball_volume(int n) { return std::pow(kPi, 0.5 * n) / std::tgamma(0.5 * n + 1.0); }

double aleksandrov_constant(int n) {
  if (n < 2) throw Error(ErrorKind::InvalidInput, "dimension must be at least 2");
  return std::pow(std::exp2(n - 1.0) / unit_ball_volume(n), 1.0 / n);
}

double unit_ball_mass(const SourceMeasure& measure) {
  const int n = measure.dimension();
  std::vector<double> breaks{measure.rho(), measure.tail().radius};
  double mass = 0.0;
  if (measure.is_radial()) {
    const double sphere = n * unit_ball_volume(n);
    mass = sphere * integrate([&](double t) { return std::pow(t, n - 1) * measure.density(Vec2{t, 0.0}); }, 0.0,
                              1.0, QuadratureOptions{1e-12}, breaks);
  } else {
    if (n != 2) throw Error(ErrorKind::Unsupported, "non-radial measures are planar only");
    mass = integrate(
        [&](double t) {
          return t * integrate_angle(
                         [&](double th) { return measure.density(Vec2{t * std::cos(th), t * std::sin(th)}); }, 512);
        },
        0.0, 1.0, QuadratureOptions{1e-12}, breaks);
  }
  for (const Atom& atom : measure.atoms())
    if (norm(atom.position) < 1.0) mass += atom.mass;
  return mass;
}

bool SubSuperPair::bounded() const { return std::isfinite(beta_minus_) && std::isfinite(beta_plus_); }

double SubSuperPair::inner_root(double s) const {
  const double q = under_.profile().moment(s, 1.0, n_);
  return q > 0.0 ? std::pow(q, 1.0 / n_) : 0.0;
}

double SubSuperPair::under_excess(double r) const {
  if (r < 1.0) throw Error(ErrorKind::InvalidInput, "barrier excess is defined for r >= 1");
  return under_.excess(r);
}

double SubSuperPair::over_excess(double r) const {
  if (r < 1.0) throw Error(ErrorKind::InvalidInput, "barrier excess is defined for r >= 1");
  return over_.excess(r);
}

double SubSuperPair::u_under(double r) const {
  if (r >= 1.0) return under_.value(r);
  if (r < 0.5) return -c0_;
  return -K_ * integrate([this](double s) { return inner_root(s); }, r, 1.0, quad_,
                         std::span<const double>{});
}

double SubSuperPair::u_over(double r) const { return r <= 1.0 ? 0.0 : over_.value(r); }

SubSuperPair build_sub_super(int n, const SourceMeasure& measure, double a, std::optional<double> v1_lower_bound,
                             const SubSuperOptions& opts) {
  if (n != measure.dimension()) throw Error(ErrorKind::InvalidInput, "dimension does not match the measure");
  if (n < 2) throw Error(ErrorKind::InvalidInput, "dimension must be at least 2");
  if (!(a > 0.0)) throw Error(ErrorKind::InvalidInput, "a must be positive");
  if (measure.rho() > 0.5) throw Error(ErrorKind::InvalidInput, "perturbation must lie in B_1/2; rescale first");

  const RadializeOptions ropts{opts.angle_count};
  RadialProfile upper = radialize(measure, RadializeMode::Upper, opts.sample_count, ropts);
  RadialProfile lower = radialize(measure, RadializeMode::Lower, opts.sample_count, ropts);

  SubSuperPair pair(RadialPotential(upper, n, 1.0, 0.0, 1.0, opts.quad),
                    RadialPotential(lower, n, 1.0, 0.0, 1.0, opts.quad));
  pair.n_ = n;
  pair.quad_ = opts.quad;
  pair.c1_ = integrate([&](double s) { return pair.inner_root(s); }, 0.5, 1.0, opts.quad, upper.breakpoints());
  if (!(pair.c1_ > 0.0)) throw Error(ErrorKind::ConstructionFailure, "c1 is not positive");

  if (v1_lower_bound) {
    if (!(*v1_lower_bound < 0.0)) throw Error(ErrorKind::InvalidInput, "v1 lower bound must be negative");
    pair.a_ = a;
    pair.c0_ = -*v1_lower_bound;
    if (pair.c0_ < pair.c1_) {
      std::ostringstream msg;
      msg << "supplied bound gives c0 = " << pair.c0_ << " < c1 = " << pair.c1_;
      throw Error(ErrorKind::ConstructionFailure, msg.str());
    }
  } else {
    const double mass = unit_ball_mass(measure);
    const double cn = aleksandrov_constant(n);
    double trial = a;
    double c0 = cn * std::pow(mass + trial, 1.0 / n);
    while (c0 < pair.c1_) {
      trial *= 2.0;
      if (trial > opts.a_cap) {
        std::ostringstream msg;
        msg << "escalation of a passed the cap " << opts.a_cap;
        throw Error(ErrorKind::ConstructionFailure, msg.str());
      }
      c0 = cn * std::pow(mass + trial, 1.0 / n);
    }
    pair.a_ = trial;
    pair.c0_ = c0;
  }
  pair.K_ = pair.c0_ / pair.c1_;

  // Rebuild the under barrier with its constant K now known.
  pair.under_ = RadialPotential(std::move(upper), n, 1.0, pair.K_, 1.0, opts.quad);
  pair.slope_inner_ = pair.K_ * pair.inner_root(1.0);
  pair.slope_outer_ = pair.under_.slope(1.0);
  if (!(pair.slope_inner_ < pair.slope_outer_))
    throw Error(ErrorKind::ConstructionFailure, "under barrier has no convex corner at r = 1");

  const std::vector<double> radii = ladder(opts);
  const std::vector<double> under_gaps = gap_on_ladder(pair.under_, radii);
  const std::vector<double> over_gaps = gap_on_ladder(pair.over_, radii);
  pair.beta_minus_ = *std::min_element(under_gaps.begin(), under_gaps.end());
  pair.beta_plus_ = std::max(0.5, *std::max_element(over_gaps.begin(), over_gaps.end()));
  return pair;
}

}  // namespace mongeampere
