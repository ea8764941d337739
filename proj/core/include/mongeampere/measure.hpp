#pragma once

#include <functional>
#include <span>
#include <vector>

#include "mongeampere/geometry.hpp"

namespace mongeampere {

struct Atom {
  Vec2 position;
  double mass = 0.0;
};

// Far-field density model: f(x) = 1 + amplitude(theta) * |x|^(-beta) for |x| >= radius.
struct TailModel {
  double beta = 4.0;
  double radius = 0.0;
  std::function<double(double)> amplitude;  // empty means identically zero
  bool angular = false;                     // amplitude depends on theta

  double amplitude_at(double theta) const { return amplitude ? amplitude(theta) : 0.0; }
};

// Everything needed to construct a SourceMeasure. Densities are evaluated on
// the plane; for dimension >= 3 the measure must be radial and is evaluated
// along the positive first axis.
struct MeasureSpec {
  int dimension = 2;
  double rho = 0.0;  // perturbation disk B_rho containing every non-density mass
  std::function<double(Vec2)> compact_density;  // on B_rho; empty means 0
  std::function<double(Vec2)> near_density;     // f on rho <= |x| < tail.radius; empty means the tail formula
  TailModel tail;
  std::vector<Atom> atoms;
  bool radial = true;            // density depends on |x| only
  bool allow_slow_tail = false;  // accept beta <= 2 (counterexample path only)
};

// The measure nu = f dx outside B_rho plus an arbitrary absolutely
// continuous part and finitely many atoms inside. Immutable once built.
class SourceMeasure {
 public:
  explicit SourceMeasure(MeasureSpec spec);

  int dimension() const { return spec_.dimension; }
  double rho() const { return spec_.rho; }
  const TailModel& tail() const { return spec_.tail; }
  std::span<const Atom> atoms() const { return spec_.atoms; }
  bool is_radial() const { return spec_.radial; }
  bool allows_slow_tail() const { return spec_.allow_slow_tail; }
  bool has_compact_part() const;
  const MeasureSpec& spec() const { return spec_; }

  // f on the complement of B_rho.
  double exterior_density(Vec2 x) const;
  // Density of the absolutely continuous part on B_rho.
  double compact_density(Vec2 x) const;
  // Density of the absolutely continuous part of nu anywhere.
  double density(Vec2 x) const;
  double total_atom_mass() const;

 private:
  MeasureSpec spec_;
};

namespace measures {

// Lebesgue measure (f = 1, nothing compact).
SourceMeasure lebesgue(int dimension = 2);

// Radial f = 1 + b r^-beta for r >= r_tail and f = 1 below (rho = 0 unless given).
// With rho > 0 the compact density on B_rho defaults to 1.
SourceMeasure radial_tail(double b, double beta, double r_tail, double rho = 0.0, int dimension = 2);

// Lebesgue plus atoms, with Omega = B_rho carrying density 1.
SourceMeasure lebesgue_with_atoms(std::vector<Atom> atoms, double rho);

// Radial f = 1 on [0, 1], 1 + r^-2 for r >= 2, smooth in between (quintic smoothstep).
SourceMeasure slow_tail_counterexample(int dimension = 2);

// The quintic smoothstep used by the counterexample, 0 at t <= 0 and 1 at t >= 1.
double smoothstep5(double t);

}  // namespace measures

}  // namespace mongeampere
