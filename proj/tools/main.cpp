#include <exception>
#include <iostream>
#include <string>

#include "CLI11.hpp"

#include "commands.hpp"
#include "config.hpp"
#include "mongeampere/errors.hpp"

namespace {

constexpr int kConfigError = 2;
constexpr int kInvariantViolation = 4;

}  // namespace

int main(int argc, char** argv) {
  using namespace mongeampere;
  using namespace mongeampere::cli;

  CLI::App app{"Entire solutions of det D^2 u = nu with quadratic-plus-log asymptotics"};
  app.require_subcommand(1);
  std::string config_path, out_dir, suite = "all";
  bool deterministic = false, remark_override = false;
  app.add_option("--config", config_path, "problem configuration (JSON)");
  app.add_option("--out", out_dir, "output directory (default: the config's output field)");
  app.add_flag("--deterministic", deterministic, "single-threaded, reproducible runs");
  app.add_flag("--remark-override", remark_override, "accept tail exponents beta <= 2");

  auto* radial = app.add_subcommand("radial", "radial comparison solutions and coefficients");
  auto* solve = app.add_subcommand("solve", "one Dirichlet problem on the configured radius");
  auto* exhaust = app.add_subcommand("exhaust", "exhaustion over the radius schedule");
  auto* asymptotics = app.add_subcommand("asymptotics", "far-field fit and flux");
  auto* verify = app.add_subcommand("verify", "acceptance suites");
  verify->add_option("suite", suite, "radial | oracle | solver | exhaustion | asymptotics | remark14 | all");
  for (auto* sub : {radial, solve, exhaust, asymptotics, verify}) sub->fallthrough();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kConfigError;
  }

  try {
    RunContext ctx;
    ctx.deterministic = deterministic;
    ctx.remark_override = remark_override;
    ctx.log = &std::cerr;
    if (!config_path.empty()) ctx.cfg = load_config(config_path, remark_override);
    else if (!verify->parsed()) throw ConfigError("--config is required for this command");
    ctx.out = out_dir.empty() ? ctx.cfg.output : out_dir;

    if (radial->parsed()) cmd_radial(ctx);
    else if (solve->parsed()) cmd_solve(ctx);
    else if (exhaust->parsed()) cmd_exhaust(ctx);
    else if (asymptotics->parsed()) cmd_asymptotics(ctx);
    else if (verify->parsed()) {
      ctx.log = &std::cout;
      const int failed = cmd_verify(ctx, suite);
      return failed == 0 ? 0 : kInvariantViolation;
    }
    return 0;
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kConfigError;
  } catch (const NonConvergenceError& e) {
    std::cerr << "error (" << to_string(e.kind()) << "): " << e.what() << '\n';
    const auto& h = e.history();
    const std::size_t from = h.size() > 10 ? h.size() - 10 : 0;
    std::cerr << "last residuals:";
    for (std::size_t i = from; i < h.size(); ++i) std::cerr << ' ' << h[i];
    std::cerr << '\n';
    return exit_code(e.kind());
  } catch (const Error& e) {
    std::cerr << "error (" << to_string(e.kind()) << "): " << e.what() << '\n';
    return exit_code(e.kind());
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
}
