#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "irslab/group.hpp"

namespace irslab {

enum class ExperimentKind {
  SchreierSpectra,
  BsConvergence,
  IrsCheck,
  FolnerSearch,
  HaarRatio,
  ConeBarycenter,
  RadicalCheck,
};

const char* kind_name(ExperimentKind kind);

// The [group] block of a config file; build() constructs the marked group.
struct GroupSpec {
  Family family = Family::Finite;
  int rank = 0;         // free
  std::string name;     // finite, e.g. "symmetric:3"
  int degree = 0;       // tree
  int depth = 0;        // tree

  MarkedGroup build() const;
  std::vector<std::string> echo_lines() const;
};

// Parsed experiment description. Parsing is strict: unknown keys, duplicate
// keys, malformed lines and missing required keys are ConfigInvalid with the
// offending line number.
struct ExperimentConfig {
  ExperimentKind kind = ExperimentKind::SchreierSpectra;
  std::optional<GroupSpec> group;
  std::map<std::string, std::string> params;
  std::uint64_t seed = 0;
  std::string output_dir = "irslab-out";  // after the environment override
  std::string base_dir = ".";             // directory of the config file

  // Canonical echo of the effective configuration, one "key = value" line
  // per entry, sections in fixed order, params sorted.
  std::vector<std::string> echo_lines() const;

  // Typed access to [params]; throws ConfigInvalid naming the key.
  const std::string& param(const std::string& key) const;
  std::string param_or(const std::string& key, const std::string& fallback) const;
  long param_long(const std::string& key) const;
  long param_long_or(const std::string& key, long fallback) const;
  double param_double_or(const std::string& key, double fallback) const;
  bool param_bool_or(const std::string& key, bool fallback) const;
  bool has_param(const std::string& key) const { return params.count(key) != 0; }
  // Paths are resolved against the directory of the config file.
  std::string param_path(const std::string& key) const;
};

ExperimentConfig parse_config_text(const std::string& text, const std::string& base_dir);
ExperimentConfig load_config(const std::string& path);

}  // namespace irslab
