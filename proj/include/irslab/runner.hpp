#pragma once

#include <string>
#include <vector>

#include "irslab/config.hpp"
#include "json.hpp"

namespace irslab {

// Run outcome plus the artifact list. payload() is the deterministic part;
// reruns with the same config produce byte-identical payloads, only wall_ms
// differs.
struct RunReport {
  std::string schema = "irslab-report v1";
  ExperimentConfig config;
  nlohmann::ordered_json results;
  std::vector<std::string> artifacts;  // file names inside config.output_dir
  double wall_ms = 0;

  std::string payload() const;
  std::string to_json() const;
};

// Dispatches on config.kind, writes CSV/SVG/JSON artifacts plus report.json
// into config.output_dir and returns the report.
RunReport run_experiment(const ExperimentConfig& cfg);

// Graph spec "cycle:<n>" or "random:<k>:<n>:<seed>[:<girth>]" to DOT text.
std::string export_dot(const std::string& spec);

std::string version_string();

}  // namespace irslab
