#pragma once

// Exact-solution and property checks, one verdict per criterion. Shared by the
// acceptance test binary and `ricci_lab verify`.

#include <functional>
#include <limits>
#include <string>
#include <utility>
#include <vector>

namespace ricci {

struct CriterionInfo {
  int id = 0;
  std::string slug;   // e.g. "reduced-volume"
  std::string title;
};

struct CriterionResult {
  CriterionInfo info;
  bool pass = false;
  double order = std::numeric_limits<double>::quiet_NaN();  // convergence order where a sweep applies
  double seconds = 0;
  std::vector<std::pair<std::string, double>> metrics;
  std::vector<std::string> failures;  // one line per failed check
  std::string error;                  // exception text when the check itself threw
};

struct AcceptanceOptions {
  std::vector<std::string> only;  // slugs or ids; empty runs everything
  std::vector<int> resolutions;   // node counts for the convergence checks; empty takes the defaults
  bool parallel = true;           // criteria on separate threads
};

const std::vector<CriterionInfo>& acceptance_criteria();

/// Throws ParameterError for an unknown name in `only` or a resolution list that is not increasing.
std::vector<CriterionResult> run_acceptance(const AcceptanceOptions& opt = {});

/// Single criterion by id (1-based).
CriterionResult run_criterion(int id, const std::vector<int>& resolutions = {});

}  // namespace ricci
