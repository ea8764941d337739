#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>

#include "config.hpp"

namespace mongeampere::cli {

struct RunContext {
  ProblemConfig cfg;
  std::filesystem::path out;
  bool deterministic = false;
  bool remark_override = false;
  std::ostream* log = nullptr;
};

// Each command writes its files under ctx.out and throws mongeampere::Error
// or ConfigError on failure. Files already written stay on disk.
void cmd_radial(const RunContext& ctx);
void cmd_solve(const RunContext& ctx);
void cmd_exhaust(const RunContext& ctx);
void cmd_asymptotics(const RunContext& ctx);
// Returns the number of failed criteria; writes verify.json.
int cmd_verify(const RunContext& ctx, const std::string& suite);

}  // namespace mongeampere::cli
