#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace respred::accept {

struct CriterionResult {
  int id = 0;
  std::string name;
  bool passed = false;
  bool skipped = false;
  std::string detail;
  double seconds = 0.0;
};

/// Runs the full verification suite on synthetic systems. When both paths are
/// nonempty, the dataset-conditional pipeline criterion also runs against the
/// supplied CSV and config; otherwise it is reported as skipped.
std::vector<CriterionResult> run_criteria(const std::string& data_path = {},
                                          const std::string& config_path = {});

/// Prints one pass/fail line per criterion and returns the failure count.
int run_and_print(std::ostream& os, const std::string& data_path = {},
                  const std::string& config_path = {});

}  // namespace respred::accept
