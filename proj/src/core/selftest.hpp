#pragma once

#include <string>
#include <vector>

namespace cps5 {

struct SelftestCheck {
  std::string name;
  bool passed = false;
  std::string detail;
  double seconds = 0.0;
};

/// Names of the fast invariant checks, in execution order.
std::vector<std::string> selftest_names();

/// Runs every check. `inject` names one check whose input gets a deliberate perturbation
/// (it must then fail); an empty string runs clean. Unknown names throw Error(InvalidArgument).
std::vector<SelftestCheck> run_selftest(const std::string& inject = "");

}  // namespace cps5
