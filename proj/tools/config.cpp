#include "config.hpp"

#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include "mongeampere/errors.hpp"

namespace mongeampere::cli {

using json = nlohmann::ordered_json;

namespace {

[[noreturn]] void field_error(const std::string& path, const std::string& what) {
  throw ConfigError("config field '" + path + "': " + what);
}

void reject_unknown(const json& obj, const std::string& path, std::initializer_list<const char*> known) {
  const std::set<std::string> k(known.begin(), known.end());
  for (auto it = obj.begin(); it != obj.end(); ++it)
    if (!k.count(it.key())) field_error(path.empty() ? it.key() : path + "." + it.key(), "unknown field");
}

const json* member(const json& obj, const char* key) {
  const auto it = obj.find(key);
  return it == obj.end() ? nullptr : &*it;
}

std::string join(const std::string& path, const char* key) { return path.empty() ? key : path + "." + key; }

void read_number(const json& obj, const std::string& path, const char* key, double& out) {
  if (const json* v = member(obj, key)) {
    if (!v->is_number()) field_error(join(path, key), "expected a number");
    out = v->get<double>();
    if (!std::isfinite(out)) field_error(join(path, key), "must be finite");
  }
}

void read_int(const json& obj, const std::string& path, const char* key, int& out) {
  if (const json* v = member(obj, key)) {
    if (!v->is_number_integer()) field_error(join(path, key), "expected an integer");
    out = v->get<int>();
  }
}

void read_string(const json& obj, const std::string& path, const char* key, std::string& out) {
  if (const json* v = member(obj, key)) {
    if (!v->is_string()) field_error(join(path, key), "expected a string");
    out = v->get<std::string>();
  }
}

void read_radii(const json& obj, const char* key, std::vector<double>& out) {
  if (const json* v = member(obj, key)) {
    if (!v->is_array() || v->empty()) field_error(key, "expected a nonempty array of numbers");
    out.clear();
    for (std::size_t i = 0; i < v->size(); ++i) {
      const json& e = (*v)[i];
      if (!e.is_number()) field_error(std::string(key) + "[" + std::to_string(i) + "]", "expected a number");
      out.push_back(e.get<double>());
      if (i > 0 && !(out[i] > out[i - 1])) field_error(key, "radii must increase strictly");
    }
  }
}

const json& object(const json& obj, const char* key, const std::string& path) {
  const json& v = obj.at(key);
  if (!v.is_object()) field_error(join(path, key), "expected an object");
  return v;
}

void validate(const ProblemConfig& c, bool remark_override) {
  if (c.dimension < 2) field_error("dimension", "must be at least 2");
  if (!(c.tail_beta > 2.0) && !remark_override)
    field_error("tail.beta", "must exceed 2 (pass --remark-override to study beta <= 2)");
  if (c.rho < 0.0) field_error("rho", "must be nonnegative");
  if (c.tail_radius < c.rho) field_error("tail.radius", "must be at least rho");
  if (c.compact.kind != "zero" && c.compact.kind != "constant" && c.compact.kind != "radial_bump")
    field_error("compact_density.kind", "expected zero, constant or radial_bump");
  if (c.compact.kind == "constant" && c.compact.value < 0.0) field_error("compact_density.value", "must be nonnegative");
  if (c.compact.kind == "radial_bump" && c.compact.amplitude < -1.0)
    field_error("compact_density.amplitude", "must be at least -1");
  for (std::size_t i = 0; i < c.atoms.size(); ++i) {
    const AtomSpec& a = c.atoms[i];
    const std::string p = "atoms[" + std::to_string(i) + "]";
    if (!(a.mass > 0.0)) field_error(p + ".mass", "must be positive");
    if (!(std::hypot(a.x, a.y) < c.rho)) field_error(p, "atom must lie inside B_rho");
  }
  if (!(c.solver.h > 0.0)) field_error("solver.h", "must be positive");
  if (c.solver.W != 0 && c.solver.W != 2 && c.solver.W != 4 && c.solver.W != 8 && c.solver.W != 12)
    field_error("solver.W", "expected 0, 2, 4, 8 or 12");
  if (c.solver.tol < 0.0) field_error("solver.tol", "must be nonnegative");
  if (c.solver.max_sweeps < 1) field_error("solver.max_sweeps", "must be positive");
  if (c.solver.area_zone < 0) field_error("solver.area_zone", "must be nonnegative");
  if (c.nodes_per_radius < 8) field_error("nodes_per_radius", "must be at least 8");
  if (!(c.window > 0.0)) field_error("window", "must be positive");
  for (double r : c.schedule)
    if (!(r > 1.0)) field_error("schedule", "radii must exceed 1");
  if (!(c.radial.r_min > 0.0) || !(c.radial.r_max > c.radial.r_min))
    field_error("radial", "need 0 < r_min < r_max");
  if (c.radial.samples < 2) field_error("radial.samples", "need at least 2");
  if (c.radial.c && *c.radial.c < 0.0) field_error("radial.c", "must be nonnegative");
}

}  // namespace

json ProblemConfig::to_json() const {
  json j;
  j["dimension"] = dimension;
  j["tail"] = {{"b", tail_b}, {"beta", tail_beta}, {"radius", tail_radius}};
  j["rho"] = rho;
  json cd = {{"kind", compact.kind}};
  if (compact.kind == "constant") cd["value"] = compact.value;
  if (compact.kind == "radial_bump") cd["amplitude"] = compact.amplitude;
  j["compact_density"] = cd;
  j["atoms"] = json::array();
  for (const AtomSpec& a : atoms) j["atoms"].push_back({{"x", a.x}, {"y", a.y}, {"mass", a.mass}});
  j["solver"] = {{"h", solver.h},
                 {"W", solver.W},
                 {"tol", solver.tol},
                 {"max_sweeps", solver.max_sweeps},
                 {"area_zone", solver.area_zone}};
  j["schedule"] = schedule;
  j["nodes_per_radius"] = nodes_per_radius;
  j["window"] = window;
  j["annuli"] = annuli;
  json r;
  if (radial.c) r["c"] = *radial.c;
  r["r_min"] = radial.r_min;
  r["r_max"] = radial.r_max;
  r["samples"] = radial.samples;
  j["radial"] = r;
  j["output"] = output;
  if (!input.empty()) j["input"] = input;
  return j;
}

ProblemConfig parse_config(const std::string& text, bool remark_override) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    // The library message carries the line and column.
    throw ConfigError(std::string("config is not valid JSON: ") + e.what());
  }
  if (!j.is_object()) throw ConfigError("config must be a JSON object");
  reject_unknown(j, "", {"dimension", "tail", "rho", "compact_density", "atoms", "solver", "schedule",
                         "nodes_per_radius", "window", "annuli", "radial", "output", "input"});
  ProblemConfig c;
  read_int(j, "", "dimension", c.dimension);
  if (member(j, "tail")) {
    const json& t = object(j, "tail", "");
    reject_unknown(t, "tail", {"b", "beta", "radius"});
    read_number(t, "tail", "b", c.tail_b);
    read_number(t, "tail", "beta", c.tail_beta);
    read_number(t, "tail", "radius", c.tail_radius);
  }
  read_number(j, "", "rho", c.rho);
  if (member(j, "compact_density")) {
    const json& cd = object(j, "compact_density", "");
    reject_unknown(cd, "compact_density", {"kind", "value", "amplitude"});
    read_string(cd, "compact_density", "kind", c.compact.kind);
    read_number(cd, "compact_density", "value", c.compact.value);
    read_number(cd, "compact_density", "amplitude", c.compact.amplitude);
  }
  if (const json* a = member(j, "atoms")) {
    if (!a->is_array()) field_error("atoms", "expected an array");
    for (std::size_t i = 0; i < a->size(); ++i) {
      const std::string p = "atoms[" + std::to_string(i) + "]";
      const json& e = (*a)[i];
      if (!e.is_object()) field_error(p, "expected an object");
      reject_unknown(e, p, {"x", "y", "mass"});
      AtomSpec s;
      read_number(e, p, "x", s.x);
      read_number(e, p, "y", s.y);
      read_number(e, p, "mass", s.mass);
      c.atoms.push_back(s);
    }
  }
  if (member(j, "solver")) {
    const json& s = object(j, "solver", "");
    reject_unknown(s, "solver", {"h", "W", "tol", "max_sweeps", "area_zone"});
    read_number(s, "solver", "h", c.solver.h);
    read_int(s, "solver", "W", c.solver.W);
    read_number(s, "solver", "tol", c.solver.tol);
    read_int(s, "solver", "max_sweeps", c.solver.max_sweeps);
    read_int(s, "solver", "area_zone", c.solver.area_zone);
  }
  read_radii(j, "schedule", c.schedule);
  read_int(j, "", "nodes_per_radius", c.nodes_per_radius);
  read_number(j, "", "window", c.window);
  read_radii(j, "annuli", c.annuli);
  if (member(j, "radial")) {
    const json& r = object(j, "radial", "");
    reject_unknown(r, "radial", {"c", "r_min", "r_max", "samples"});
    if (member(r, "c")) {
      double v = 0.0;
      read_number(r, "radial", "c", v);
      c.radial.c = v;
    }
    read_number(r, "radial", "r_min", c.radial.r_min);
    read_number(r, "radial", "r_max", c.radial.r_max);
    read_int(r, "radial", "samples", c.radial.samples);
  }
  read_string(j, "", "output", c.output);
  read_string(j, "", "input", c.input);
  validate(c, remark_override);
  return c;
}

ProblemConfig load_config(const std::string& path, bool remark_override) {
  std::ifstream f(path);
  if (!f) throw ConfigError("cannot read config file " + path);
  std::ostringstream ss;
  ss << f.rdbuf();
  return parse_config(ss.str(), remark_override);
}

std::string dump_config(const ProblemConfig& cfg) { return cfg.to_json().dump(2) + "\n"; }

SourceMeasure build_measure(const ProblemConfig& cfg, bool remark_override) {
  MeasureSpec spec;
  spec.dimension = cfg.dimension;
  spec.rho = cfg.rho;
  spec.tail.beta = cfg.tail_beta;
  spec.tail.radius = cfg.tail_radius;
  if (cfg.tail_b != 0.0) spec.tail.amplitude = [b = cfg.tail_b](double) { return b; };
  spec.near_density = [](Vec2) { return 1.0; };
  const double rho = cfg.rho;
  if (cfg.compact.kind == "constant") {
    spec.compact_density = [v = cfg.compact.value](Vec2) { return v; };
  } else if (cfg.compact.kind == "radial_bump") {
    spec.compact_density = [a = cfg.compact.amplitude, rho](Vec2 x) {
      const double s = 1.0 - norm2(x) / (rho * rho);
      return 1.0 + a * s * s;
    };
  }
  for (const AtomSpec& a : cfg.atoms) spec.atoms.push_back({{a.x, a.y}, a.mass});
  spec.allow_slow_tail = remark_override;
  try {
    return SourceMeasure(std::move(spec));
  } catch (const Error& e) {
    throw ConfigError(std::string("config describes an invalid measure: ") + e.what());
  }
}

SolverOptions solver_options(const ProblemConfig& cfg) {
  SolverOptions o;
  o.tol = cfg.solver.tol;
  o.max_sweeps = cfg.solver.max_sweeps;
  o.area_zone = cfg.solver.area_zone;
  return o;
}

}  // namespace mongeampere::cli
