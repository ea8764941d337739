#include "mongeampere/asymptotics.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <istream>
#include <map>
#include <ostream>
#include <sstream>

#include <Eigen/SVD>

#include "mongeampere/errors.hpp"
#include "mongeampere/quadrature.hpp"

namespace mongeampere {

double flux_D(const PlaneFunction& u, double R, int quadrature_count, double step) {
  if (!(R > 0.0) || !(step > 0.0) || quadrature_count < 8)
    throw Error(ErrorKind::InvalidInput, "flux needs R > 0, a positive step and at least 8 angles");
  const double h = step;
  const double integral = integrate_angle(
      [&](double theta) {
        const Vec2 x{R * std::cos(theta), R * std::sin(theta)};
        const Vec2 e1{h, 0.0}, e2{0.0, h};
        const double u0 = u(x);
        const double u1 = (u(x + e1) - u(x - e1)) / (2.0 * h);
        const double u22 = (u(x + e2) - 2.0 * u0 + u(x - e2)) / (h * h);
        const double u12 = (u(x + e1 + e2) - u(x + e1 - e2) - u(x - e1 + e2) + u(x - e1 - e2)) / (4.0 * h * h);
        const double g = u1 * u22 * std::cos(theta) - u1 * u12 * std::sin(theta);
        if (!std::isfinite(g)) throw Error(ErrorKind::InvalidInput, "non-finite derivative estimate in the flux");
        return g * R;
      },
      quadrature_count);
  return (integral - kPi * R * R) / (2.0 * kPi);
}

double flux_D_excess(const PlaneFunction& e, double R, int quadrature_count, double step) {
  if (!(R > 0.0) || !(step > 0.0) || quadrature_count < 8)
    throw Error(ErrorKind::InvalidInput, "flux needs R > 0, a positive step and at least 8 angles");
  const double h = step;
  // With u = |x|^2/2 + e the quadratic part of the integrand integrates to
  // pi R^2 exactly; only the terms carrying e are left.
  const double integral = integrate_angle(
      [&](double theta) {
        const double c = std::cos(theta), s = std::sin(theta);
        const Vec2 x{R * c, R * s};
        const Vec2 e1{h, 0.0}, e2{0.0, h};
        const double e0 = e(x);
        const double d1 = (e(x + e1) - e(x - e1)) / (2.0 * h);
        const double d22 = (e(x + e2) - 2.0 * e0 + e(x - e2)) / (h * h);
        const double d12 = (e(x + e1 + e2) - e(x + e1 - e2) - e(x - e1 + e2) + e(x - e1 - e2)) / (4.0 * h * h);
        const double g = (x.x * d22 + d1 + d1 * d22) * c - (x.x + d1) * d12 * s;
        if (!std::isfinite(g)) throw Error(ErrorKind::InvalidInput, "non-finite derivative estimate in the flux");
        return g * R;
      },
      quadrature_count);
  return integral / (2.0 * kPi);
}

double flux_D(const GridFunction& u, double R, int quadrature_count) {
  const double h = u.grid->h();
  if (!(R + 3.0 * h <= u.grid->R() - h))
    throw Error(ErrorKind::InvalidInput, "flux circle too close to the grid boundary");
  return flux_D([&](Vec2 x) { return bilinear(u, x); }, R, quadrature_count, h);
}

void AnnulusSamples::validate() const {
  for (std::size_t i = 0; i < annuli.size(); ++i) {
    const Annulus& a = annuli[i];
    if (a.points.size() != a.values.size()) throw Error(ErrorKind::InvalidInput, "annulus points and values differ in size");
    if (a.points.size() < 64) throw Error(ErrorKind::InvalidInput, "each annulus needs at least 64 samples");
    if (i > 0 && !(a.radius > annuli[i - 1].radius))
      throw Error(ErrorKind::InvalidInput, "annulus radii must increase strictly");
  }
}

AnnulusSamples sample_annuli(const PlaneFunction& u, const std::vector<double>& radii, int count,
                             AnnulusSamples::Source source, bool excess_form) {
  AnnulusSamples s;
  s.source = source;
  s.excess_form = excess_form;
  for (double r : radii) {
    AnnulusSamples::Annulus a;
    a.radius = r;
    for (int k = 0; k < count; ++k) {
      const double t = 2.0 * kPi * k / count;
      const Vec2 x{r * std::cos(t), r * std::sin(t)};
      a.points.push_back(x);
      a.values.push_back(u(x));
    }
    s.annuli.push_back(std::move(a));
  }
  s.validate();
  return s;
}

Eigen::Matrix2d AsymptoticFit::normalized_A() const { return A / std::sqrt(A.determinant()); }

double AsymptoticFit::model_excess(Vec2 x) const {
  const double q = A(0, 0) * x.x * x.x + 2.0 * A(0, 1) * x.x * x.y + A(1, 1) * x.y * x.y;
  const double quad = 0.5 * ((A(0, 0) - 1.0) * x.x * x.x + 2.0 * A(0, 1) * x.x * x.y + (A(1, 1) - 1.0) * x.y * x.y);
  return quad + 0.5 * d * std::log(q) + ell[0] * x.x + ell[1] * x.y + ell[2];
}

double AsymptoticFit::model(Vec2 x) const { return 0.5 * norm2(x) + model_excess(x); }

namespace {

constexpr double kDriftTol = 0.1;

constexpr const char* kKeys[] = {"a11", "a12", "a22", "d", "b1", "b2", "b0", "sigma_hat", "det_A"};

using Params = Eigen::Matrix<double, 7, 1>;

// One linear least-squares round. log_A selects the logarithm ln sqrt(x'Ax);
// nullptr means ln |x|. Rows carry the weight (r / r_max)^2: with equal
// weights the fit spreads the inner remainder over every annulus and the
// residuals stop showing its decay.
Params solve_round(const AnnulusSamples& s, const Eigen::Matrix2d* log_A) {
  const double r_max = s.annuli.back().radius;
  std::size_t rows = 0;
  for (const auto& a : s.annuli) rows += a.points.size();
  Eigen::MatrixXd M(rows, 7);
  Eigen::VectorXd y(rows);
  std::size_t k = 0;
  for (const auto& a : s.annuli)
    for (std::size_t i = 0; i < a.points.size(); ++i, ++k) {
      const Vec2 x = a.points[i];
      const double q = log_A ? (*log_A)(0, 0) * x.x * x.x + 2.0 * (*log_A)(0, 1) * x.x * x.y + (*log_A)(1, 1) * x.y * x.y
                             : norm2(x);
      if (!(q > 0.0)) throw Error(ErrorKind::Degenerate, "quadratic form not positive at a sample");
      M.row(k) << 0.5 * x.x * x.x, x.x * x.y, 0.5 * x.y * x.y, 0.5 * std::log(q), x.x, x.y, 1.0;
      y(k) = a.values[i];
      const double wt = (a.radius / r_max) * (a.radius / r_max);
      M.row(k) *= wt;
      y(k) *= wt;
    }
  // Column equilibration before the SVD; the quadratic columns dominate otherwise.
  Eigen::VectorXd scale = M.colwise().norm().transpose();
  for (int j = 0; j < 7; ++j) {
    if (!(scale(j) > 0.0)) throw Error(ErrorKind::Degenerate, "empty design column");
    M.col(j) /= scale(j);
  }
  Eigen::BDCSVD<Eigen::MatrixXd> svd(M, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const auto& sv = svd.singularValues();
  if (!(sv(6) > 1e-10 * sv(0))) throw Error(ErrorKind::Degenerate, "rank deficient design for the expansion fit");
  Eigen::VectorXd sol = svd.solve(y);
  Params p;
  for (int j = 0; j < 7; ++j) p(j) = sol(j) / scale(j);
  return p;
}

Eigen::Matrix2d matrix_of(const Params& p, bool excess_form) {
  Eigen::Matrix2d A;
  A << p(0), p(1), p(1), p(2);
  if (excess_form) A += Eigen::Matrix2d::Identity();
  return A;
}

std::string format_number(double v) {
  std::ostringstream os;
  os << std::setprecision(17) << v;
  return os.str();
}

}  // namespace

namespace {

bool spans_octave(const AnnulusSamples& s) {
  return s.annuli.size() >= 3 && s.annuli.back().radius >= 2.0 * s.annuli.front().radius;
}

AsymptoticFit fit_parameters(const AnnulusSamples& samples) {

  Params p = solve_round(samples, nullptr);
  int rounds = 1;
  for (int r = 0; r < 5; ++r) {
    const Eigen::Matrix2d A = matrix_of(p, samples.excess_form);
    if (!(A.determinant() > 0.0 && A(0, 0) > 0.0)) throw Error(ErrorKind::Degenerate, "fitted quadratic part is not positive definite");
    const Params next = solve_round(samples, &A);
    ++rounds;
    double change = 0.0;
    for (int j = 0; j < 7; ++j) change = std::max(change, std::abs(next(j) - p(j)) / std::max(1.0, std::abs(p(j))));
    p = next;
    if (change < 1e-10) break;
  }

  AsymptoticFit fit;
  fit.A = matrix_of(p, samples.excess_form);
  fit.d = p(3);
  fit.ell = {p(4), p(5), p(6)};
  fit.rounds = rounds;
  return fit;
}

}  // namespace

AsymptoticFit fit_expansion(const AnnulusSamples& samples) {
  samples.validate();
  if (samples.annuli.size() < 3) throw Error(ErrorKind::InvalidInput, "the fit needs at least three annuli");
  if (!spans_octave(samples)) throw Error(ErrorKind::InvalidInput, "the annuli must span at least one octave");
  AsymptoticFit fit = fit_parameters(samples);
  fit.decay = residual_decay(samples, fit);
  return fit;
}

DecayEstimate residual_decay(const AnnulusSamples& samples, const AsymptoticFit& fit) {
  if (samples.annuli.size() < 3) throw Error(ErrorKind::InvalidInput, "decay needs at least three annuli");
  DecayEstimate out;
  std::vector<double> lr, lres;
  for (const auto& a : samples.annuli) {
    double mx = 0.0, ss = 0.0, scale = 1.0;
    for (std::size_t i = 0; i < a.points.size(); ++i) {
      const double model = samples.excess_form ? fit.model_excess(a.points[i]) : fit.model(a.points[i]);
      const double r = a.values[i] - model;
      mx = std::max(mx, std::abs(r));
      ss += r * r;
      scale = std::max(scale, std::abs(a.values[i]));
    }
    out.residuals.push_back({a.radius, a.points.size(), mx, std::sqrt(ss / a.points.size())});
    // Residuals this close to the rounding of the data carry no exponent.
    const double floor = 256.0 * std::numeric_limits<double>::epsilon() * scale;
    if (mx > floor) {
      lr.push_back(std::log(a.radius));
      lres.push_back(std::log(mx));
    }
  }
  // A log coefficient that keeps moving with the radius range means the
  // expansion does not hold, whatever the residual slope says.
  const std::size_t m = samples.annuli.size();
  if (m >= 6) {
    AnnulusSamples inner = samples, outer = samples;
    inner.annuli.assign(samples.annuli.begin(), samples.annuli.begin() + (m + 1) / 2);
    outer.annuli.assign(samples.annuli.begin() + m / 2, samples.annuli.end());
    if (spans_octave(inner) && spans_octave(outer)) {
      const double d_in = fit_parameters(inner).d, d_out = fit_parameters(outer).d;
      out.log_drift = std::abs(d_out - d_in) / std::max(1.0, std::abs(d_out));
    }
  }
  const bool drifting = out.log_drift > kDriftTol;
  if (lr.size() < 3) {
    out.floor_limited = true;
    out.failure = drifting;
    return out;
  }
  const double n = static_cast<double>(lr.size());
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < lr.size(); ++i) {
    mx += lr[i] / n;
    my += lres[i] / n;
  }
  double sxy = 0.0, sxx = 0.0;
  for (std::size_t i = 0; i < lr.size(); ++i) {
    sxy += (lr[i] - mx) * (lres[i] - my);
    sxx += (lr[i] - mx) * (lr[i] - mx);
  }
  out.sigma_hat = -sxy / sxx;
  out.failure = out.sigma_hat < 0.0 || drifting;
  return out;
}

void AsymptoticFit::write(std::ostream& os) const {
  const double values[] = {A(0, 0), A(0, 1), A(1, 1), d, ell[0], ell[1], ell[2], decay.sigma_hat, det_A()};
  for (int i = 0; i < 9; ++i) {
    os << kKeys[i] << ' ';
    if (i == 7 && decay.floor_limited) os << "floor-limited";
    else if (std::isnan(values[i])) os << "nan";
    else os << format_number(values[i]);
    os << '\n';
  }
}

AsymptoticFit AsymptoticFit::read(std::istream& is) {
  std::map<std::string, std::string> kv;
  std::string line;
  int lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    if (line.empty()) continue;
    std::istringstream ls(line);
    std::string key, value;
    if (!(ls >> key >> value)) throw Error(ErrorKind::InvalidInput, "malformed fit line " + std::to_string(lineno));
    kv[key] = value;
  }
  const auto get = [&](const char* key) {
    const auto it = kv.find(key);
    if (it == kv.end()) throw Error(ErrorKind::InvalidInput, std::string("fit block lacks ") + key);
    return it->second;
  };
  const auto num = [&](const char* key) {
    const std::string v = get(key);
    try {
      std::size_t used = 0;
      const double x = std::stod(v, &used);
      if (used != v.size()) throw std::invalid_argument(v);
      return x;
    } catch (const std::exception&) {
      throw Error(ErrorKind::InvalidInput, std::string("bad value for ") + key + ": " + v);
    }
  };
  AsymptoticFit f;
  f.A << num("a11"), num("a12"), num("a12"), num("a22");
  f.d = num("d");
  f.ell = {num("b1"), num("b2"), num("b0")};
  const std::string s = get("sigma_hat");
  if (s == "floor-limited") {
    f.decay.floor_limited = true;
  } else {
    f.decay.sigma_hat = num("sigma_hat");
    f.decay.failure = f.decay.sigma_hat < 0.0;
  }
  return f;
}

void AsymptoticFit::write_residual_csv(std::ostream& os) const {
  os << "radius,count,max_abs_residual,rms_residual\n";
  for (const AnnulusResidual& r : decay.residuals)
    os << format_number(r.radius) << ',' << r.count << ',' << format_number(r.max_abs) << ',' << format_number(r.rms)
       << '\n';
}

}  // namespace mongeampere
