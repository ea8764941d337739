#include "mongeampere/measure.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <utility>

#include "mongeampere/errors.hpp"

namespace mongeampere {

namespace {

double tail_formula(const TailModel& tail, Vec2 x) {
  if (!tail.amplitude) return 1.0;
  const double r = norm(x);
  const double theta = std::atan2(x.y, x.x);
  return 1.0 + tail.amplitude_at(theta) * std::pow(r, -tail.beta);
}

}  // namespace

SourceMeasure::SourceMeasure(MeasureSpec spec) : spec_(std::move(spec)) {
  if (spec_.dimension < 2)
    throw Error(ErrorKind::InvalidInput, "measure dimension must be at least 2");
  if (!(spec_.rho >= 0.0))
    throw Error(ErrorKind::InvalidInput, "perturbation radius must be nonnegative");
  if (!(spec_.tail.beta > 2.0) && !spec_.allow_slow_tail) {
    std::ostringstream msg;
    msg << "tail exponent beta = " << spec_.tail.beta << " must exceed 2";
    throw Error(ErrorKind::RejectedMeasure, msg.str());
  }
  if (spec_.tail.radius < spec_.rho)
    throw Error(ErrorKind::InvalidInput, "tail radius must be at least the perturbation radius");
  if (spec_.tail.amplitude && spec_.tail.radius <= 0.0)
    throw Error(ErrorKind::InvalidInput, "a nonzero tail needs a positive tail radius");
  if (spec_.dimension >= 3 && !spec_.radial)
    throw Error(ErrorKind::Unsupported, "dimension >= 3 measures must be radial");
  if (spec_.dimension >= 3 && !spec_.atoms.empty())
    throw Error(ErrorKind::Unsupported, "atoms are supported in the plane only");
  for (const Atom& a : spec_.atoms) {
    if (!(a.mass > 0.0)) throw Error(ErrorKind::InvalidInput, "atom masses must be positive");
    if (!(norm(a.position) < spec_.rho))
      throw Error(ErrorKind::InvalidInput, "every atom must lie inside the perturbation disk");
  }
}

bool SourceMeasure::has_compact_part() const {
  return !spec_.atoms.empty() || (spec_.rho > 0.0 && static_cast<bool>(spec_.compact_density));
}

double SourceMeasure::exterior_density(Vec2 x) const {
  if (norm(x) >= spec_.tail.radius) return tail_formula(spec_.tail, x);
  if (spec_.near_density) return spec_.near_density(x);
  return tail_formula(spec_.tail, x);
}

double SourceMeasure::compact_density(Vec2 x) const {
  return spec_.compact_density ? spec_.compact_density(x) : 0.0;
}

double SourceMeasure::density(Vec2 x) const {
  return norm(x) < spec_.rho ? compact_density(x) : exterior_density(x);
}

double SourceMeasure::total_atom_mass() const {
  double m = 0.0;
  for (const Atom& a : spec_.atoms) m += a.mass;
  return m;
}

namespace measures {

double smoothstep5(double t) {
  t = std::clamp(t, 0.0, 1.0);
  return t * t * t * (10.0 - 15.0 * t + 6.0 * t * t);
}

SourceMeasure lebesgue(int dimension) {
  MeasureSpec spec;
  spec.dimension = dimension;
  spec.tail.beta = 4.0;
  return SourceMeasure(std::move(spec));
}

SourceMeasure radial_tail(double b, double beta, double r_tail, double rho, int dimension) {
  MeasureSpec spec;
  spec.dimension = dimension;
  spec.rho = rho;
  spec.tail.beta = beta;
  spec.tail.radius = r_tail;
  if (b != 0.0) spec.tail.amplitude = [b](double) { return b; };
  spec.near_density = [](Vec2) { return 1.0; };
  if (rho > 0.0) spec.compact_density = [](Vec2) { return 1.0; };
  return SourceMeasure(std::move(spec));
}

SourceMeasure lebesgue_with_atoms(std::vector<Atom> atoms, double rho) {
  MeasureSpec spec;
  spec.rho = rho;
  spec.tail.beta = 4.0;
  spec.tail.radius = rho;
  spec.compact_density = [](Vec2) { return 1.0; };
  spec.atoms = std::move(atoms);
  return SourceMeasure(std::move(spec));
}

SourceMeasure slow_tail_counterexample(int dimension) {
  MeasureSpec spec;
  spec.dimension = dimension;
  spec.tail.beta = 2.0;
  spec.tail.radius = 2.0;
  spec.tail.amplitude = [](double) { return 1.0; };
  spec.near_density = [](Vec2 x) {
    const double r = norm(x);
    return r <= 1.0 ? 1.0 : 1.0 + smoothstep5(r - 1.0) / (r * r);
  };
  spec.allow_slow_tail = true;
  return SourceMeasure(std::move(spec));
}

}  // namespace measures

}  // namespace mongeampere
