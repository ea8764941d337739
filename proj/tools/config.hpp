#pragma once

#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "json.hpp"

#include "mongeampere/measure.hpp"
#include "mongeampere/solver.hpp"

namespace mongeampere::cli {

// Bad configuration; the message names the line or the field.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct CompactDensity {
  std::string kind = "constant";  // zero | constant | radial_bump
  double value = 1.0;              // constant
  double amplitude = 0.0;          // radial_bump: 1 + amplitude (1 - |x|^2/rho^2)^2
};

struct AtomSpec {
  double x = 0.0, y = 0.0, mass = 0.0;
};

struct SolverConfig {
  double h = 1.0 / 16.0;
  int W = 0;  // 0: pick from h
  double tol = 0.0;
  int max_sweeps = 200000;
  int area_zone = 8;
};

struct RadialConfig {
  std::optional<double> c;  // unset: cbar of the measure
  double r_min = 1.0;
  double r_max = 1e6;
  int samples = 121;
};

struct ProblemConfig {
  int dimension = 2;
  double tail_b = 0.0;
  double tail_beta = 4.0;
  double tail_radius = 1.0;
  double rho = 0.0;
  CompactDensity compact;
  std::vector<AtomSpec> atoms;
  SolverConfig solver;
  std::vector<double> schedule{8.0, 16.0, 32.0};
  int nodes_per_radius = 64;
  double window = 4.0;
  std::vector<double> annuli{4.0, 8.0, 16.0};
  RadialConfig radial;
  std::string output = "out";
  std::string input;  // asymptotics: grid function file to analyze instead of the radial solution

  nlohmann::ordered_json to_json() const;
};

// Missing fields keep their defaults; unknown fields are rejected.
ProblemConfig parse_config(const std::string& text, bool remark_override);
ProblemConfig load_config(const std::string& path, bool remark_override);
std::string dump_config(const ProblemConfig& cfg);

SourceMeasure build_measure(const ProblemConfig& cfg, bool remark_override);
SolverOptions solver_options(const ProblemConfig& cfg);

}  // namespace mongeampere::cli
