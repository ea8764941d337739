#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <map>
#include <random>
#include <sstream>
#include <string>

#include "doctest.h"

#include "commands.hpp"
#include "config.hpp"
#include "svg.hpp"

using namespace mongeampere;
using namespace mongeampere::cli;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  static const std::string tag = std::to_string(std::random_device{}());
  fs::path p = fs::temp_directory_path() / ("mongeampere_test_" + tag) / name;
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

std::string slurp(const fs::path& p) {
  std::ifstream f(p, std::ios::binary);
  std::ostringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

void write_text(const fs::path& p, const std::string& s) { std::ofstream(p) << s; }

std::string config_error(const std::string& text, bool override = false) {
  try {
    parse_config(text, override);
  } catch (const ConfigError& e) {
    return e.what();
  }
  return "";
}

std::map<std::string, double> key_values(const fs::path& p) {
  std::map<std::string, double> kv;
  std::ifstream f(p);
  std::string k;
  double v;
  while (f >> k >> v) kv[k] = v;
  return kv;
}

int run_tool(const std::string& args) {
  const char* bin = std::getenv("MONGEAMPERE_BIN");
  REQUIRE(bin != nullptr);
  const std::string cmd = std::string("\"") + bin + "\" " + args + " > /dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

}  // namespace

TEST_CASE("shipped configs round-trip") {
  int count = 0;
  for (const auto& entry : fs::directory_iterator(MONGEAMPERE_CONFIG_DIR)) {
    if (entry.path().extension() != ".json") continue;
    ++count;
    const bool slow = entry.path().stem() == "slow_tail";
    const ProblemConfig a = load_config(entry.path().string(), slow);
    const std::string once = dump_config(a);
    const ProblemConfig b = parse_config(once, slow);
    CHECK(dump_config(b) == once);
  }
  CHECK(count >= 5);
}

TEST_CASE("config defaults and fields") {
  const ProblemConfig c = parse_config(R"({"atoms": [{"x": 0.1, "y": 0, "mass": 2}], "rho": 0.5})", false);
  CHECK(c.dimension == 2);
  CHECK(c.atoms.size() == 1);
  CHECK(c.atoms[0].mass == 2.0);
  CHECK(c.schedule == std::vector<double>{8.0, 16.0, 32.0});
  CHECK_FALSE(c.radial.c.has_value());
  const SourceMeasure m = build_measure(c, false);
  CHECK(m.total_atom_mass() == 2.0);
  CHECK(solver_options(c).area_zone == 8);
}

TEST_CASE("config errors name the line or field") {
  const std::string bad_json = config_error("{\n  \"rho\": 1,\n  \"tail\": {\"b\": 1,,}\n}");
  CHECK(bad_json.find("line 3") != std::string::npos);

  CHECK(config_error(R"({"rhoo": 1})").find("'rhoo'") != std::string::npos);
  CHECK(config_error(R"({"solver": {"h": "small"}})").find("'solver.h'") != std::string::npos);
  CHECK(config_error(R"({"tail": {"beta": 2}})").find("'tail.beta'") != std::string::npos);
  CHECK(config_error(R"({"tail": {"beta": 2}})", true).empty());
  CHECK(config_error(R"({"atoms": [{"x": 1, "y": 0, "mass": 1}], "rho": 0.5})").find("atoms[0]") != std::string::npos);
  CHECK(config_error(R"({"solver": {"W": 6}})").find("'solver.W'") != std::string::npos);
  CHECK(config_error(R"({"compact_density": {"kind": "gaussian"}})").find("compact_density.kind") !=
        std::string::npos);
  CHECK_THROWS_AS(load_config("/nonexistent/config.json", false), ConfigError);
}

TEST_CASE("svg plots") {
  PlotSpec spec;
  spec.title = "gap <w>";
  spec.log_x = true;
  spec.annotation = "β ≤ 2: expansion fails";
  const std::string svg = line_plot_svg(spec, {{"a & b", {0.0, 1.0, 10.0, 100.0}, {1.0, 2.0, NAN, 4.0}}});
  CHECK(svg.rfind("<svg", 0) == 0);
  CHECK(svg.find("</svg>") != std::string::npos);
  CHECK(svg.find("gap &lt;w&gt;") != std::string::npos);
  CHECK(svg.find("a &amp; b") != std::string::npos);
  CHECK(svg.find("β ≤ 2: expansion fails") != std::string::npos);
  CHECK(svg.find("nan") == std::string::npos);
}

TEST_CASE("radial command outputs") {
  RunContext ctx;
  ctx.cfg = parse_config(R"({"radial": {"c": 0, "r_max": 1000, "samples": 31}})", false);
  ctx.out = scratch("radial_lebesgue");
  cmd_radial(ctx);
  std::ifstream f(ctx.out / "radial.csv");
  std::string line;
  std::getline(f, line);
  CHECK(line.rfind("r,w_c,slope,excess,gap", 0) == 0);
  int rows = 0;
  while (std::getline(f, line)) {
    std::vector<double> v;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) v.push_back(std::stod(cell));
    CHECK(std::abs(v.at(4)) <= 1e-12);
    ++rows;
  }
  CHECK(rows == 31);
  CHECK(fs::exists(ctx.out / "radial_gap.svg"));

  RunContext slow;
  slow.cfg = load_config(std::string(MONGEAMPERE_CONFIG_DIR) + "/slow_tail.json", true);
  slow.remark_override = true;
  slow.out = scratch("radial_slow");
  cmd_radial(slow);
  CHECK(slurp(slow.out / "radial_gap.svg").find("β ≤ 2: expansion fails") != std::string::npos);
  CHECK(slurp(slow.out / "radial.csv").find("gap_over_log2") != std::string::npos);
}

TEST_CASE("lebesgue exhaustion fits A = I and d = 0") {
  RunContext ctx;
  ctx.cfg = load_config(std::string(MONGEAMPERE_CONFIG_DIR) + "/lebesgue.json", false);
  ctx.deterministic = true;
  ctx.out = scratch("exhaust_a");
  cmd_exhaust(ctx);
  // The fit reads the grid through bilinear interpolation, exact only at nodes.
  auto fit = key_values(ctx.out / "fit.txt");
  CHECK(std::abs(fit.at("a11") - 1.0) <= 1e-3);
  CHECK(std::abs(fit.at("a12")) <= 1e-3);
  CHECK(std::abs(fit.at("a22") - 1.0) <= 1e-3);
  CHECK(std::abs(fit.at("d")) <= 1e-3);

  // Same config, single-threaded: byte-identical tables.
  RunContext again = ctx;
  again.out = scratch("exhaust_b");
  cmd_exhaust(again);
  CHECK(slurp(ctx.out / "exhaustion.csv") == slurp(again.out / "exhaustion.csv"));
  CHECK(slurp(ctx.out / "fit_residuals.csv") == slurp(again.out / "fit_residuals.csv"));
}

TEST_CASE("unknown verify suite") {
  RunContext ctx;
  ctx.out = scratch("verify_bad");
  CHECK_THROWS_AS(cmd_verify(ctx, "nonsense"), ConfigError);
}

TEST_CASE("exit codes") {
  const fs::path dir = scratch("exit_codes");
  const std::string out = " --out \"" + (dir / "o").string() + "\"";
  write_text(dir / "bad.json", "{\"tail\": {\"beta\": 1.5}}");
  write_text(dir / "slow.json", R"({"rho": 0.5, "atoms": [{"x": 0, "y": 0, "mass": 1}], "schedule": [2],
    "solver": {"h": 0.125, "max_sweeps": 2}})");
  // Claim with zero slack (c-bar = 0) on a coarse grid.
  write_text(dir / "tight.json", R"({"tail": {"b": 1, "beta": 4, "radius": 1}, "compact_density": {"kind": "zero"},
    "schedule": [4, 8], "nodes_per_radius": 16, "window": 2})");
  const std::string cfg = " --config \"" + (dir / "bad.json").string() + "\"";

  CHECK(run_tool("radial --config \"" + std::string(MONGEAMPERE_CONFIG_DIR) + "/lebesgue.json\"" + out) == 0);
  CHECK(run_tool("radial" + cfg + out) == 2);
  CHECK(run_tool("radial" + out) == 2);
  CHECK(run_tool("frobnicate" + out) == 2);
  CHECK(run_tool("verify nonsense" + out) == 2);
  CHECK(run_tool("solve --config \"" + (dir / "slow.json").string() + "\"" + out) == 3);
  CHECK(fs::exists(dir / "o" / "residual_history.csv"));
  CHECK(run_tool("exhaust --deterministic --config \"" + (dir / "tight.json").string() + "\"" + out) == 4);
  CHECK(run_tool("verify radial" + out) == 0);
}
