#pragma once

#include <iosfwd>
#include <memory>
#include <string>
#include <vector>

#include "json.hpp"

namespace mongeampere::cli {

struct CriterionOutcome {
  int id = 0;
  std::string title;
  bool pass = false;
  std::string detail;
  double seconds = 0.0;
};

struct AcceptanceOptions {
  bool deterministic = false;
  std::ostream* log = nullptr;  // progress notes
};

// radial, oracle, solver, exhaustion, asymptotics, remark14 or all.
// Throws ConfigError on an unknown name.
std::vector<int> suite_criteria(const std::string& suite);

// Runs acceptance criteria 1 to 10. The one-atom exhaustion is shared by
// criteria 2, 3, 4 and 8 and computed once per runner.
class AcceptanceRunner {
 public:
  explicit AcceptanceRunner(AcceptanceOptions opts);
  ~AcceptanceRunner();
  AcceptanceRunner(const AcceptanceRunner&) = delete;
  AcceptanceRunner& operator=(const AcceptanceRunner&) = delete;

  // Never throws for a failed check; errors inside a criterion become a failure.
  CriterionOutcome run(int id);

 private:
  struct State;
  std::unique_ptr<State> state_;
};

// "criterion 3 PASS flux closure: ..." on one line.
std::string format_outcome(const CriterionOutcome& o);
nlohmann::ordered_json outcomes_json(const std::string& suite, const std::vector<CriterionOutcome>& outcomes);

}  // namespace mongeampere::cli
