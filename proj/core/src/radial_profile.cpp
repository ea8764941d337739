#include "mongeampere/radial_profile.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <utility>

#include "mongeampere/errors.hpp"

namespace mongeampere {

namespace {

double ipow(double x, int n) {
  double r = 1.0;
  for (int i = 0; i < n; ++i) r *= x;
  return r;
}

// Integral of n t^(n-1) * b t^(-beta) over [a, c]; c may be infinite.
double tail_excess(double b, double beta, double a, double c, int n) {
  if (b == 0.0 || a >= c) return 0.0;
  const double p = n - beta;
  if (std::isinf(c)) {
    if (p >= 0.0) return b > 0.0 ? std::numeric_limits<double>::infinity()
                                 : -std::numeric_limits<double>::infinity();
    return -n * b * std::pow(a, p) / p;
  }
  if (std::abs(p) < 1e-14) return n * b * std::log(c / a);
  return n * b * (std::pow(c, p) - std::pow(a, p)) / p;
}

}  // namespace

RadialProfile::RadialProfile(double floor_radius, double core_value, std::vector<Sample> samples,
                             Tail tail, bool allow_slow_tail)
    : floor_radius_(floor_radius), core_value_(core_value), samples_(std::move(samples)), tail_(tail) {
  if (!(tail_.beta > 2.0) && !allow_slow_tail)
    throw Error(ErrorKind::RejectedMeasure, "profile tail exponent must exceed 2");
  if (floor_radius_ < 0.0 || tail_.radius < floor_radius_)
    throw Error(ErrorKind::InvalidInput, "profile radii must satisfy 0 <= floor <= tail radius");
  if (tail_.b != 0.0 && !(tail_.radius > 0.0))
    throw Error(ErrorKind::InvalidInput, "a nonzero profile tail needs a positive tail radius");
  if (core_value_ < 0.0) throw Error(ErrorKind::InvalidInput, "profile core value must be nonnegative");
  for (std::size_t i = 0; i < samples_.size(); ++i) {
    if (samples_[i].value < 0.0) throw Error(ErrorKind::InvalidInput, "profile density must be nonnegative");
    if (i > 0 && !(samples_[i].radius > samples_[i - 1].radius))
      throw Error(ErrorKind::InvalidInput, "profile sample radii must be strictly increasing");
  }
  if (tail_.radius > floor_radius_) {
    if (samples_.size() < 2 || samples_.front().radius != floor_radius_ ||
        samples_.back().radius != tail_.radius)
      throw Error(ErrorKind::InvalidInput, "profile samples must span [floor, tail radius]");
  }
}

RadialProfile RadialProfile::unit() { return RadialProfile(0.0, 1.0, {}, Tail{0.0, 4.0, 0.0}); }

double RadialProfile::density(double r) const {
  if (r < floor_radius_) return core_value_;
  if (r > tail_.radius || samples_.empty()) {
    if (tail_.b == 0.0) return 1.0;
    return 1.0 + tail_.b * std::pow(std::max(r, tail_.radius), -tail_.beta);
  }
  auto it = std::upper_bound(samples_.begin(), samples_.end(), r,
                             [](double v, const Sample& s) { return v < s.radius; });
  if (it == samples_.begin()) return samples_.front().value;
  if (it == samples_.end()) return samples_.back().value;
  const Sample& hi = *it;
  const Sample& lo = *(it - 1);
  const double t = (r - lo.radius) / (hi.radius - lo.radius);
  return lo.value + t * (hi.value - lo.value);
}

double RadialProfile::excess_on_piece(double a, double b, int n) const {
  // Closed form on one linear piece f(t) = v0 + s (t - r0).
  auto it = std::upper_bound(samples_.begin(), samples_.end(), 0.5 * (a + b),
                             [](double v, const Sample& s) { return v < s.radius; });
  const Sample& hi = *it;
  const Sample& lo = *(it - 1);
  const double s = (hi.value - lo.value) / (hi.radius - lo.radius);
  const double c0 = lo.value - s * lo.radius - 1.0;
  return c0 * (ipow(b, n) - ipow(a, n)) +
         s * static_cast<double>(n) / (n + 1) * (ipow(b, n + 1) - ipow(a, n + 1));
}

double RadialProfile::excess_moment(double a, double b, int n) const {
  if (!(b > a)) return b == a ? 0.0 : -excess_moment(b, a, n);
  double total = 0.0;
  // Core.
  if (a < floor_radius_) {
    const double c = std::min(b, floor_radius_);
    total += (core_value_ - 1.0) * (ipow(c, n) - ipow(a, n));
    a = c;
    if (a >= b) return total;
  }
  // Sampled region.
  if (samples_.size() >= 2 && a < tail_.radius) {
    const double c = std::min(b, tail_.radius);
    double lo = a;
    auto it = std::upper_bound(samples_.begin(), samples_.end(), lo,
                               [](double v, const Sample& s) { return v < s.radius; });
    while (lo < c) {
      const double hi = it == samples_.end() ? c : std::min(c, it->radius);
      if (hi > lo) total += excess_on_piece(lo, hi, n);
      lo = hi;
      if (it != samples_.end()) ++it;
    }
    a = c;
    if (a >= b) return total;
  }
  total += tail_excess(tail_.b, tail_.beta, std::max(a, tail_.radius), b, n);
  return total;
}

double RadialProfile::moment(double a, double b, int n) const {
  return ipow(b, n) - ipow(a, n) + excess_moment(a, b, n);
}

std::vector<double> RadialProfile::breakpoints() const {
  std::vector<double> out;
  if (floor_radius_ > 0.0) out.push_back(floor_radius_);
  if (tail_.radius > floor_radius_) out.push_back(tail_.radius);
  return out;
}

}  // namespace mongeampere
