#include "commands.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <limits>
#include <optional>
#include <ostream>

#include "acceptance.hpp"
#include "svg.hpp"

#include "mongeampere/aleksandrov.hpp"
#include "mongeampere/asymptotics.hpp"
#include "mongeampere/exhaustion.hpp"
#include "mongeampere/radial.hpp"
#include "mongeampere/sandwich.hpp"
#include "mongeampere/sub_super.hpp"

namespace mongeampere::cli {

namespace fs = std::filesystem;

namespace {

constexpr int kProfileSamples = 256;
constexpr int kAnnulusCount = 256;

std::ofstream open_out(const RunContext& ctx, const std::string& name) {
  fs::create_directories(ctx.out);
  std::ofstream f(ctx.out / name);
  if (!f) throw Error(ErrorKind::InvalidInput, "cannot write " + (ctx.out / name).string());
  f << std::setprecision(12);
  return f;
}

void note(const RunContext& ctx, const std::string& msg) {
  if (ctx.log) *ctx.log << msg << '\n';
}

bool slow_tail(const ProblemConfig& cfg) { return !(cfg.tail_beta > 2.0); }

std::vector<double> log_spaced(double a, double b, int count) {
  std::vector<double> r(static_cast<std::size_t>(count));
  for (int i = 0; i < count; ++i) r[i] = a * std::pow(b / a, static_cast<double>(i) / (count - 1));
  r.back() = b;
  return r;
}

Polygon disk_polygon(double r, int sides = 256) {
  Polygon p;
  for (int k = 0; k < sides; ++k) {
    const double t = 2.0 * kPi * k / sides;
    p.push_back({r * std::cos(t), r * std::sin(t)});
  }
  return p;
}

void write_fit(const RunContext& ctx, const AsymptoticFit& fit) {
  std::ofstream f = open_out(ctx, "fit.txt");
  fit.write(f);
  std::ofstream r = open_out(ctx, "fit_residuals.csv");
  fit.write_residual_csv(r);
  if (fit.decay.failure) note(ctx, "residual decay check failed: the expansion does not hold on these annuli");
}

void plot_residuals(const RunContext& ctx, const AsymptoticFit& fit, const std::string& annotation) {
  Series s{"max |residual|", {}, {}};
  for (const AnnulusResidual& a : fit.decay.residuals) {
    s.x.push_back(a.radius);
    s.y.push_back(a.max_abs);
  }
  PlotSpec spec{"fit residual per annulus", "r", "max |u - model|", true, true, annotation};
  write_line_plot((ctx.out / "fit_residuals.svg").string(), spec, {s});
}

// Oracle atom table of grid data restricted to a disk.
void write_atom_table(const RunContext& ctx, const GridFunction& u, double radius, double threshold,
                      const std::string& name) {
  std::vector<Vec2> nodes;
  std::vector<double> values;
  for (std::size_t i = 0; i < u.grid->size(); ++i)
    if (norm(u.grid->node(i)) <= radius) {
      nodes.push_back(u.grid->node(i));
      values.push_back(u.values[i]);
    }
  const PLConvexFunction hull = lower_hull(nodes, values);
  const MAMeasureReport rep = ma_measure(hull, {}, threshold);
  std::ofstream f = open_out(ctx, name);
  f << "x,y,mass\n";
  for (const auto& [i, m] : rep.atoms) f << hull.nodes()[i].x << ',' << hull.nodes()[i].y << ',' << m << '\n';
}

double atom_threshold(const ProblemConfig& cfg) {
  if (cfg.atoms.empty()) return std::numeric_limits<double>::infinity();
  double m = std::numeric_limits<double>::infinity();
  for (const AtomSpec& a : cfg.atoms) m = std::min(m, a.mass);
  return 0.25 * m;
}

void radial_planar(const RunContext& ctx, const SourceMeasure& measure) {
  const ProblemConfig& cfg = ctx.cfg;
  const bool slow = slow_tail(cfg);
  const RadialProfile lower = radialize(measure, RadializeMode::Lower, kProfileSamples);
  const double nan = std::numeric_limits<double>::quiet_NaN();
  LogCoefficients lc{nan, nan, nan, nan};
  if (!slow) lc = log_coefficients(measure);
  const double c = cfg.radial.c.value_or(slow ? 0.0 : lc.cbar);
  const RadialPotential w = w_c_potential(lower, c);
  // Below two the lower profile has no finite log coefficient; the gap is then the raw excess.
  const double log_coeff = slow ? c : lc.d_lower + c;

  {
    std::ofstream f = open_out(ctx, "coefficients.txt");
    f << "d " << lc.d << "\nd_lower " << lc.d_lower << "\ncbar " << lc.cbar << "\ncbar_via_d " << lc.cbar_via_d
      << "\nc " << c << '\n';
  }

  const std::vector<double> radii = log_spaced(cfg.radial.r_min, cfg.radial.r_max, cfg.radial.samples);
  std::vector<double> gaps;
  {
    std::ofstream f = open_out(ctx, "radial.csv");
    f << "r,w_c,slope,excess,gap" << (slow ? ",gap_over_log2" : "") << '\n';
    for (double r : radii) {
      const double ex = w.excess(r);
      const double gap = ex - log_coeff * std::log(r);
      gaps.push_back(gap);
      f << r << ',' << w.value(r) << ',' << w.slope(r) << ',' << ex << ',' << gap;
      if (slow) f << ',' << (r > 1.0 ? gap / std::pow(std::log(r), 2) : nan);
      f << '\n';
    }
  }
  {
    // Spread of the gap per decade; a bounded gap settles to a constant.
    std::ofstream f = open_out(ctx, "gap_table.csv");
    f << "r_from,r_to,gap_min,gap_max,spread,shift\n";
    double previous = nan;
    for (double a = cfg.radial.r_min; a < cfg.radial.r_max * (1.0 - 1e-12); a *= 10.0) {
      const double b = std::min(10.0 * a, cfg.radial.r_max);
      double lo = std::numeric_limits<double>::infinity(), hi = -lo;
      for (double r : log_spaced(a, b, 21)) {
        const double g = w.excess(r) - log_coeff * std::log(r);
        lo = std::min(lo, g);
        hi = std::max(hi, g);
      }
      const double end = w.excess(b) - log_coeff * std::log(b);
      f << a << ',' << b << ',' << lo << ',' << hi << ',' << hi - lo << ',' << end - previous << '\n';
      previous = end;
    }
  }
  PlotSpec spec{"w_c(r) - r^2/2 - (d_lower + c) ln r", "r", "gap", true, false,
                slow ? "β ≤ 2: expansion fails" : ""};
  if (slow) spec.title = "w_c(r) - r^2/2 - c ln r";
  write_line_plot((ctx.out / "radial_gap.svg").string(), spec, {{"gap", radii, gaps}});
}

void radial_higher(const RunContext& ctx, const SourceMeasure& measure) {
  const ProblemConfig& cfg = ctx.cfg;
  const SubSuperPair pair = build_sub_super(cfg.dimension, measure, 1.0);
  {
    std::ofstream f = open_out(ctx, "barriers.txt");
    f << "a " << pair.a() << "\nc0 " << pair.c0() << "\nc1 " << pair.c1() << "\nK " << pair.K() << "\nbeta_minus "
      << pair.beta_minus() << "\nbeta_plus " << pair.beta_plus() << '\n';
  }
  const SandwichReport rep = radial_sandwich_check(cfg.dimension, measure, pair, cfg.schedule);
  std::ofstream f = open_out(ctx, "sandwich.csv");
  f << "R,lower_margin,upper_margin,worst_lower_radius,worst_upper_radius\n";
  Series lo{"lower margin", {}, {}}, up{"upper margin", {}, {}};
  for (const SandwichRecord& r : rep.records) {
    f << r.R << ',' << r.lower_margin << ',' << r.upper_margin << ',' << r.worst_lower_radius << ','
      << r.worst_upper_radius << '\n';
    lo.x.push_back(r.R);
    lo.y.push_back(r.lower_margin);
    up.x.push_back(r.R);
    up.y.push_back(r.upper_margin);
  }
  write_line_plot((ctx.out / "sandwich.svg").string(), {"barrier margins", "R", "margin", true, false, ""}, {lo, up});
}

std::shared_ptr<const GridDisk> make_grid(const ProblemConfig& cfg, double R, double h) {
  const int W = cfg.solver.W > 0 ? cfg.solver.W : default_stencil_width(h);
  return std::make_shared<const GridDisk>(R, h, W);
}

void require_plane(const ProblemConfig& cfg, const char* what) {
  if (cfg.dimension != 2) throw ConfigError(std::string(what) + " runs in the plane only (dimension 2)");
}

}  // namespace

void cmd_radial(const RunContext& ctx) {
  const SourceMeasure measure = build_measure(ctx.cfg, ctx.remark_override);
  if (ctx.cfg.dimension == 2) radial_planar(ctx, measure);
  else radial_higher(ctx, measure);
}

void cmd_solve(const RunContext& ctx) {
  const ProblemConfig& cfg = ctx.cfg;
  require_plane(cfg, "solve");
  if (cfg.schedule.size() != 1) throw ConfigError("config field 'schedule': solve needs exactly one radius");
  const SourceMeasure measure = build_measure(cfg, ctx.remark_override);
  const double R = cfg.schedule.front();
  const auto grid = make_grid(cfg, R, cfg.solver.h);
  const DiscreteRHS rhs = discretize_measure(measure, *grid);
  const double d = slow_tail(cfg) ? 0.0 : compute_d(measure);

  auto write_history = [&](const std::vector<double>& history, int stride) {
    std::ofstream f = open_out(ctx, "residual_history.csv");
    f << "sweep,max_residual\n";
    for (std::size_t i = 0; i < history.size(); ++i) f << (i + 1) * static_cast<std::size_t>(stride) << ',' << history[i] << '\n';
  };

  const SolverOptions opts = solver_options(cfg);
  SolveResult s;
  try {
    s = solve_dirichlet(grid, rhs, boundary_data(2, R, d), opts);
  } catch (const NonConvergenceError& e) {
    write_history(e.history(), opts.history_stride);
    throw;
  }
  write_history(s.history, opts.history_stride);
  s.u.save((ctx.out / "solution.grid").string());

  {
    std::ofstream f = open_out(ctx, "solve_summary.txt");
    f << "R " << R << "\nh " << grid->h() << "\nW " << grid->W() << "\nnodes " << grid->size() << "\nd " << d
      << "\nsweeps " << s.sweeps << "\nresidual " << s.residual << "\nmin_second_difference "
      << min_second_difference(s.u, boundary_data(2, R, d)) << '\n';
  }

  // Oracle mass against lumped mass on interior disks.
  const PLConvexFunction hull = lower_hull(grid->nodes(), s.u.values);
  std::ofstream f = open_out(ctx, "mass_report.csv");
  f << "region_radius,oracle_mass,lumped_mass,relative_difference\n";
  const double h = grid->h();
  for (double frac : {0.25, 0.5, 0.75}) {
    const double r = frac * R;
    const Polygon region = disk_polygon(r);
    const double oracle = ma_mass(hull, region);
    double lumped = 0.0;
    for (std::size_t i = 0; i < grid->size(); ++i)
      if (!hull.in_collar(i) && contains_point(region, grid->node(i), 1e-12)) lumped += rhs.density[i] * h * h;
    f << r << ',' << oracle << ',' << lumped << ',' << (oracle - lumped) / lumped << '\n';
  }
  write_atom_table(ctx, s.u, R, atom_threshold(cfg), "atoms.csv");
}

void cmd_exhaust(const RunContext& ctx) {
  const ProblemConfig& cfg = ctx.cfg;
  require_plane(cfg, "exhaust");
  const SourceMeasure measure = build_measure(cfg, ctx.remark_override);
  ExhaustionOptions opts;
  opts.window = cfg.window;
  opts.window_h = cfg.solver.h;
  opts.nodes_per_radius = cfg.nodes_per_radius;
  opts.stencil_width = cfg.solver.W;
  opts.deterministic = ctx.deterministic;
  opts.solver = solver_options(cfg);

  std::shared_ptr<const ExhaustionResult> result;
  std::optional<ExhaustionNonConvergence> failure;
  try {
    result = std::make_shared<const ExhaustionResult>(run_exhaustion(measure, cfg.schedule, opts));
  } catch (const ExhaustionNonConvergence& e) {
    failure.emplace(e);
    result = std::make_shared<const ExhaustionResult>(e.result());
  }
  const ExhaustionReport& rep = result->report;
  {
    std::ofstream f = open_out(ctx, "exhaustion.csv");
    rep.write_csv(f);
  }
  result->limit.save((ctx.out / "limit.grid").string());

  Series gaps{"window gap", {}, {}};
  for (const ExhaustionRecord& r : rep.records)
    if (!std::isnan(r.cauchy_gap)) {
      gaps.x.push_back(r.R);
      gaps.y.push_back(r.cauchy_gap);
    }
  write_line_plot((ctx.out / "cauchy_gap.svg").string(),
                  {"successive window differences", "R", "sup |u_R' - u_R|", true, true, ""}, {gaps});

  // The last iterate on its own grid, with the normalization plane added back.
  const Normalization& last = result->last;
  const GridDisk& g = *last.u.grid;
  auto excess = [&](Vec2 x) { return bilinear(last.u, x) + dot(last.p, x) + last.u0 - 0.5 * norm2(x); };
  for (double r : cfg.annuli)
    if (!(r + g.h() <= g.R() - g.h()))
      throw ConfigError("config field 'annuli': radius " + std::to_string(r) + " leaves the last grid");
  const AnnulusSamples samples =
      sample_annuli(excess, cfg.annuli, kAnnulusCount, AnnulusSamples::Source::GridInterpolation, true);
  const AsymptoticFit fit = fit_expansion(samples);
  write_fit(ctx, fit);
  plot_residuals(ctx, fit, "");

  const double flux_radius = 0.75 * g.R();
  const double flux = flux_D_excess(excess, flux_radius, kAnnulusCount, g.h());
  {
    std::ofstream f = open_out(ctx, "exhaust_summary.txt");
    f << "d " << rep.d << "\ncbar " << rep.cbar << "\nslope_bound " << rep.slope_bound << "\nflux_radius "
      << flux_radius << "\nflux_D " << flux << "\nconverged " << (rep.converged ? 1 : 0) << '\n';
  }
  write_atom_table(ctx, last.u, cfg.window, atom_threshold(cfg), "atoms.csv");
  if (failure) throw *failure;
}

void cmd_asymptotics(const RunContext& ctx) {
  const ProblemConfig& cfg = ctx.cfg;
  require_plane(cfg, "asymptotics");
  std::ofstream flux_csv = open_out(ctx, "flux.csv");
  flux_csv << "R,flux_D\n";

  if (!cfg.input.empty()) {
    const GridFunction u = GridFunction::load(cfg.input);
    const GridDisk& g = *u.grid;
    for (double r : cfg.annuli)
      if (!(r + g.h() <= g.R() - g.h()))
        throw ConfigError("config field 'annuli': radius " + std::to_string(r) + " leaves the input grid");
    auto excess = [&](Vec2 x) { return bilinear(u, x) - 0.5 * norm2(x); };
    const AsymptoticFit fit = fit_expansion(
        sample_annuli(excess, cfg.annuli, kAnnulusCount, AnnulusSamples::Source::GridInterpolation, true));
    write_fit(ctx, fit);
    plot_residuals(ctx, fit, "");
    const double r = 0.75 * g.R();
    flux_csv << r << ',' << flux_D_excess(excess, r, kAnnulusCount, g.h()) << '\n';
    return;
  }

  // Radial solution of the configured measure.
  const SourceMeasure measure = build_measure(cfg, ctx.remark_override);
  const bool slow = slow_tail(cfg);
  const RadialProfile lower = radialize(measure, RadializeMode::Lower, kProfileSamples);
  const double c = cfg.radial.c.value_or(slow ? 0.0 : cbar(measure));
  const RadialPotential w = w_c_potential(lower, c);
  auto excess = [&](Vec2 x) { return w.excess(norm(x)); };
  const AsymptoticFit fit =
      fit_expansion(sample_annuli(excess, cfg.annuli, kAnnulusCount, AnnulusSamples::Source::ClosedForm, true));
  write_fit(ctx, fit);
  plot_residuals(ctx, fit, slow ? "β ≤ 2: expansion fails" : "");
  for (double r : cfg.annuli) flux_csv << r << ',' << flux_D_excess(excess, r, kAnnulusCount, 1e-2 * r) << '\n';
}

int cmd_verify(const RunContext& ctx, const std::string& suite) {
  AcceptanceOptions opts;
  opts.deterministic = ctx.deterministic;
  opts.log = ctx.log;
  const std::vector<int> ids = suite_criteria(suite);
  AcceptanceRunner runner(opts);
  std::vector<CriterionOutcome> outcomes;
  int failed = 0;
  for (int id : ids) {
    outcomes.push_back(runner.run(id));
    if (ctx.log) *ctx.log << format_outcome(outcomes.back()) << std::endl;
    if (!outcomes.back().pass) ++failed;
  }
  std::ofstream f = open_out(ctx, "verify.json");
  f << outcomes_json(suite, outcomes).dump(2) << '\n';
  return failed;
}

}  // namespace mongeampere::cli
