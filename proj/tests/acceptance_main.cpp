#include <iostream>
#include <string>

#include "acceptance.hpp"
#include "config.hpp"

// One line per acceptance criterion; nonzero exit when any fails.
// An optional argument selects a suite (default: all).
int main(int argc, char** argv) {
  using namespace mongeampere::cli;
  const std::string suite = argc > 1 ? argv[1] : "all";
  AcceptanceRunner runner(AcceptanceOptions{});
  int failed = 0;
  try {
    for (int id : suite_criteria(suite)) {
      const CriterionOutcome o = runner.run(id);
      std::cout << format_outcome(o) << std::endl;
      if (!o.pass) ++failed;
    }
  } catch (const ConfigError& e) {
    std::cerr << e.what() << '\n';
    return 2;
  }
  std::cout << (failed == 0 ? "all criteria passed" : std::to_string(failed) + " criteria failed") << '\n';
  return failed == 0 ? 0 : 1;
}
