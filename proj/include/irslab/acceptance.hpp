#pragma once

#include <string>
#include <vector>

namespace irslab {

// One bundled selftest criterion. detail and payload are deterministic
// (timings are kept out of both so reports can be compared byte for byte).
struct CriterionResult {
  int number = 0;
  std::string module;
  std::string name;
  bool pass = false;
  std::string detail;
  double seconds = 0;
  std::string payload;
};

// Runs the bundled criteria; filter restricts to one module name (empty
// string = everything). The determinism criterion reruns the other nine
// internally and compares the timing-free payloads.
std::vector<CriterionResult> acceptance_criteria(const std::string& filter = "");

// Timing-free rendering of a result list, used for byte comparison.
std::string acceptance_payload(const std::vector<CriterionResult>& results);

}  // namespace irslab
