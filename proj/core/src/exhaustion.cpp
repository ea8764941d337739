#include "mongeampere/exhaustion.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <future>
#include <iomanip>
#include <ostream>
#include <sstream>

#include "mongeampere/aleksandrov.hpp"

namespace mongeampere {

double boundary_value(int n, double R, double d) {
  if (!(R > 1.0)) throw Error(ErrorKind::InvalidInput, "boundary radius must exceed 1");
  return n == 2 ? 0.5 * R * R + d * std::log(R) : 0.5 * R * R;
}

BoundaryFunction boundary_data(int n, double R, double d) {
  const double v = boundary_value(n, R, d);
  return [v](Vec2) { return v; };
}

Normalization normalize(const GridFunction& u) {
  const GridDisk& g = *u.grid;
  const std::int64_t o = g.origin();
  if (o < 0) throw Error(ErrorKind::InvalidInput, "the origin is not a grid node");
  const PLConvexFunction hull = lower_hull(g.nodes(), u.values);
  const Polygon cell = subgradient_polygon(hull, static_cast<std::size_t>(o));
  if (cell.empty()) throw Error(ErrorKind::Degenerate, "the origin is not a vertex of the lower envelope");

  Normalization out;
  out.p = least_norm_point(cell);
  out.u0 = u.values[static_cast<std::size_t>(o)];
  out.u.grid = u.grid;
  out.u.values.resize(u.values.size());
  for (std::size_t i = 0; i < g.size(); ++i)
    out.u.values[i] = u.values[i] - dot(out.p, g.node(i)) - out.u0;
  return out;
}

double claim_level(const RadialPotential& w, double R, double d) {
  // R^2/2 - w(R) is minus the excess, kept in that form for large R.
  return d * std::log(R) - w.excess(R);
}

void ExhaustionReport::write_csv(std::ostream& os) const {
  os << "R,h,u_R0,lambda,claim_margin,sandwich_margin,pR_norm,cauchy_gap\n";
  os << std::setprecision(12);
  for (const ExhaustionRecord& r : records) {
    os << r.R << ',' << r.h << ',' << r.u0 << ',' << r.lambda << ',' << r.claim_margin << ',' << r.sandwich_margin
       << ',' << r.p_norm << ',';
    if (std::isnan(r.cauchy_gap)) os << "nan";
    else os << r.cauchy_gap;
    os << '\n';
  }
}

void ExhaustionReport::save_csv(const std::string& path) const {
  std::ofstream f(path);
  if (!f) throw Error(ErrorKind::InvalidInput, "cannot open " + path);
  write_csv(f);
}

namespace {

std::string describe_gap(const ExhaustionReport& rep) {
  std::ostringstream msg;
  msg << "exhaustion did not converge: last window gap ";
  if (rep.records.empty() || std::isnan(rep.records.back().cauchy_gap)) msg << "undefined";
  else msg << rep.records.back().cauchy_gap;
  return msg.str();
}

struct RadiusRun {
  Normalization norm;
  int sweeps = 0;
  double residual = 0.0;
};

RadiusRun solve_radius(const SourceMeasure& measure, double R, double d, const ExhaustionOptions& opts) {
  const double h = R / opts.nodes_per_radius;
  const int W = opts.stencil_width > 0 ? opts.stencil_width : default_stencil_width(h);
  auto grid = std::make_shared<const GridDisk>(R, h, W);
  const DiscreteRHS rhs = discretize_measure(measure, *grid);
  SolveResult s = solve_dirichlet(grid, rhs, boundary_data(2, R, d), opts.solver);
  RadiusRun run;
  run.norm = normalize(s.u);
  run.sweeps = s.sweeps;
  run.residual = s.residual;
  return run;
}

GridFunction restrict_to_window(const GridFunction& u, const std::shared_ptr<const GridDisk>& window) {
  GridFunction out{window, std::vector<double>(window->size())};
  for (std::size_t i = 0; i < window->size(); ++i) out.values[i] = bilinear(u, window->node(i));
  return out;
}

}  // namespace

ExhaustionNonConvergence::ExhaustionNonConvergence(std::shared_ptr<const ExhaustionResult> result)
    : Error(ErrorKind::NonConvergence, describe_gap(result->report)), result_(std::move(result)) {}

std::shared_ptr<const GridDisk> window_grid(double window, double h) {
  // GridDisk keeps |x| <= R - h, so pad by one step.
  return std::make_shared<const GridDisk>(window + h, h, 4);
}

ExhaustionResult run_exhaustion(const SourceMeasure& measure, const std::vector<double>& schedule,
                                const ExhaustionOptions& opts) {
  if (measure.dimension() != 2) throw Error(ErrorKind::Unsupported, "exhaustion runs in the plane only");
  if (schedule.empty()) throw Error(ErrorKind::InvalidInput, "empty radius schedule");
  for (std::size_t i = 0; i < schedule.size(); ++i) {
    if (!(schedule[i] > 1.0)) throw Error(ErrorKind::InvalidInput, "scheduled radii must exceed 1");
    if (i > 0 && !(schedule[i] > schedule[i - 1]))
      throw Error(ErrorKind::InvalidInput, "the radius schedule must be strictly increasing");
  }
  if (!(opts.window >= 2.0 * measure.rho()))
    throw Error(ErrorKind::InvalidInput, "the window must contain the perturbation disk twice over");
  if (!(schedule.front() >= 2.0 * opts.window))
    throw Error(ErrorKind::InvalidInput, "the first radius must be at least twice the window");
  if (opts.nodes_per_radius < 8) throw Error(ErrorKind::InvalidInput, "at least 8 nodes per radius are needed");

  const LogCoefficients lc = log_coefficients(measure);
  const RadialProfile lower = radialize(measure, RadializeMode::Lower, LogCoefficientOptions{}.sample_count,
                                        RadializeOptions{LogCoefficientOptions{}.radialize_angles});
  const RadialPotential w = w_c_potential(lower, lc.cbar);

  auto result = std::make_shared<ExhaustionResult>();
  ExhaustionReport& rep = result->report;
  rep.schedule = schedule;
  rep.d = lc.d;
  rep.cbar = lc.cbar;
  // The slope of w_cbar is nondecreasing, so its maximum on the window is at the rim.
  rep.slope_bound = w.slope(opts.window);

  std::vector<RadiusRun> runs(schedule.size());
  if (opts.deterministic) {
    for (std::size_t i = 0; i < schedule.size(); ++i) runs[i] = solve_radius(measure, schedule[i], lc.d, opts);
  } else {
    std::vector<std::future<RadiusRun>> jobs;
    for (double R : schedule)
      jobs.push_back(std::async(std::launch::async, solve_radius, std::cref(measure), R, lc.d, std::cref(opts)));
    for (std::size_t i = 0; i < jobs.size(); ++i) runs[i] = jobs[i].get();
  }

  const auto window = window_grid(opts.window, opts.window_h);
  GridFunction previous;
  for (std::size_t i = 0; i < schedule.size(); ++i) {
    const RadiusRun& run = runs[i];
    const GridDisk& g = *run.norm.u.grid;
    ExhaustionRecord rec;
    rec.R = schedule[i];
    rec.h = g.h();
    rec.u0 = run.norm.u0;
    rec.lambda = claim_level(w, rec.R, lc.d);
    rec.claim_margin = rec.u0 - rec.lambda;
    double sandwich = std::numeric_limits<double>::infinity();
    for (std::size_t k = 0; k < g.size(); ++k) {
      const Vec2 x = g.node(k);
      // u_R(x) - u_R(0) = normalized value + p.x
      sandwich = std::min(sandwich, w.value(norm(x)) - run.norm.u.values[k] - dot(run.norm.p, x));
    }
    rec.sandwich_margin = sandwich;
    rec.p = run.norm.p;
    rec.p_norm = norm(run.norm.p);
    rec.sweeps = run.sweeps;
    rec.residual = run.residual;

    GridFunction current = restrict_to_window(run.norm.u, window);
    if (i > 0) {
      double gap = 0.0;
      for (std::size_t k = 0; k < current.values.size(); ++k)
        gap = std::max(gap, std::abs(current.values[k] - previous.values[k]));
      rec.cauchy_gap = gap;
    }
    previous = std::move(current);
    rep.records.push_back(rec);
  }
  result->limit = std::move(previous);
  result->last = std::move(runs.back().norm);

  for (const ExhaustionRecord& r : rep.records) {
    std::ostringstream msg;
    msg << std::setprecision(6);
    if (r.claim_margin < -opts.margin_tol) msg << "claim margin " << r.claim_margin << " at R = " << r.R;
    else if (r.sandwich_margin < -opts.margin_tol) msg << "sandwich margin " << r.sandwich_margin << " at R = " << r.R;
    else if (r.p_norm > rep.slope_bound + opts.margin_tol)
      msg << "|p_R(0)| = " << r.p_norm << " exceeds the window slope bound " << rep.slope_bound << " at R = " << r.R;
    else continue;
    throw Error(ErrorKind::InvariantViolation, msg.str());
  }

  const double last_gap = rep.records.back().cauchy_gap;
  rep.converged = !std::isnan(last_gap) && last_gap < opts.cauchy_tol;
  if (!rep.converged) throw ExhaustionNonConvergence(result);
  return std::move(*result);
}

}  // namespace mongeampere
