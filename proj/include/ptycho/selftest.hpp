#pragma once

#include <string>
#include <vector>

namespace ptycho {

struct SelfTestResult {
  std::string module;
  bool pass = false;
  double error = 0.0;
  double tolerance = 0.0;
  std::string detail;
};

/// Small dense-oracle equivalence checks, one or more per module.
std::vector<SelfTestResult> run_selftest();

}  // namespace ptycho
