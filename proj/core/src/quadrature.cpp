#include "mongeampere/quadrature.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "mongeampere/errors.hpp"
#include "mongeampere/geometry.hpp"

namespace mongeampere {

namespace {

using Rule = boost::math::quadrature::gauss_kronrod<double, 15>;

double adapt(const std::function<double(double)>& f, double a, double b, double tol, int depth) {
  double err = 0.0;
  const double value = Rule::integrate(f, a, b, 0, 0.0, &err);
  if (!std::isfinite(value))
    throw Error(ErrorKind::InternalConsistency, "non-finite integrand value");
  if (err <= std::max(tol, 1e-15 * std::abs(value)) || depth <= 0 || b - a <= 1e-15 * std::max(std::abs(a), std::abs(b)))
    return value;
  const double m = 0.5 * (a + b);
  return adapt(f, a, m, 0.5 * tol, depth - 1) + adapt(f, m, b, 0.5 * tol, depth - 1);
}

std::vector<double> panel_edges(double a, double b, std::span<const double> breakpoints, bool geometric) {
  std::vector<double> edges{a, b};
  for (double p : breakpoints)
    if (p > a && p < b) edges.push_back(p);
  if (geometric) {
    for (double r = std::max(1.0, 2.0 * a); r < b; r *= 2.0)
      if (r > a) edges.push_back(r);
  }
  std::sort(edges.begin(), edges.end());
  edges.erase(std::unique(edges.begin(), edges.end()), edges.end());
  return edges;
}

double integrate_panels(const std::function<double(double)>& f, double a, double b,
                        const QuadratureOptions& opts, std::span<const double> breakpoints, bool geometric) {
  if (a == b) return 0.0;
  if (b < a) return -integrate_panels(f, b, a, opts, breakpoints, geometric);
  const std::vector<double> edges = panel_edges(a, b, breakpoints, geometric);
  const double panels = static_cast<double>(edges.size() - 1);
  double total = 0.0;
  for (std::size_t i = 0; i + 1 < edges.size(); ++i)
    total += adapt(f, edges[i], edges[i + 1], opts.abs_tol / panels, opts.max_depth);
  return total;
}

}  // namespace

double integrate(const std::function<double(double)>& f, double a, double b, const QuadratureOptions& opts,
                 std::span<const double> breakpoints) {
  return integrate_panels(f, a, b, opts, breakpoints, false);
}

double integrate_radial(const std::function<double(double)>& f, double a, double b,
                        const QuadratureOptions& opts, std::span<const double> breakpoints) {
  return integrate_panels(f, a, b, opts, breakpoints, true);
}

double integrate_angle(const std::function<double(double)>& g, int n) {
  double s = 0.0;
  for (int k = 0; k < n; ++k) s += g(2.0 * kPi * k / n);
  return s * (2.0 * kPi / n);
}

}  // namespace mongeampere
