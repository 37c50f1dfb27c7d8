#include "irslab/config.hpp"

#include <algorithm>
#include <cstdlib>
#include <fstream>
#include <sstream>

namespace irslab {

namespace {

std::string trim(const std::string& s) {
  std::size_t b = s.find_first_not_of(" \t");
  if (b == std::string::npos) return "";
  std::size_t e = s.find_last_not_of(" \t");
  return s.substr(b, e - b + 1);
}

struct RawEntry {
  std::string value;
  int line = 0;
};
using RawSection = std::map<std::string, RawEntry>;

const std::map<std::string, ExperimentKind> kKinds = {
    {"schreier-spectra", ExperimentKind::SchreierSpectra},
    {"bs-convergence", ExperimentKind::BsConvergence},
    {"irs-check", ExperimentKind::IrsCheck},
    {"folner-search", ExperimentKind::FolnerSearch},
    {"haar-ratio", ExperimentKind::HaarRatio},
    {"cone-barycenter", ExperimentKind::ConeBarycenter},
    {"radical-check", ExperimentKind::RadicalCheck},
};

const std::map<ExperimentKind, std::vector<std::string>> kParamKeys = {
    {ExperimentKind::SchreierSpectra,
     {"family", "sizes", "index", "trials", "girth", "cayley_radius"}},
    {ExperimentKind::BsConvergence,
     {"family", "sizes", "girth", "radius", "tolerance"}},
    {ExperimentKind::IrsCheck, {"file"}},
    {ExperimentKind::FolnerSearch, {"gens", "q_reps", "n", "min_level"}},
    {ExperimentKind::HaarRatio, {"o_level", "o_reps", "l_level", "l_reps"}},
    {ExperimentKind::ConeBarycenter, {"body_file", "measure_file", "covering", "svg"}},
    {ExperimentKind::RadicalCheck, {"file"}},
};

long parse_integer(const std::string& value, const std::string& where) {
  std::size_t used = 0;
  long out = 0;
  try {
    out = std::stol(value, &used);
  } catch (const std::exception&) {
    fail(Errc::ConfigInvalid, where + ": '" + value + "' is not an integer");
  }
  require(used == value.size(), Errc::ConfigInvalid,
          where + ": '" + value + "' is not an integer");
  return out;
}

std::uint64_t parse_seed(const std::string& value, int line) {
  require(!value.empty() && value.find_first_not_of("0123456789") == std::string::npos,
          Errc::ConfigInvalid,
          "line " + std::to_string(line) + ": seed must be a nonnegative integer");
  try {
    return std::stoull(value);
  } catch (const std::exception&) {
    fail(Errc::ConfigInvalid, "line " + std::to_string(line) + ": seed out of range");
  }
}

GroupSpec parse_group(const RawSection& raw) {
  auto it = raw.find("family");
  require(it != raw.end(), Errc::ConfigInvalid, "[group] needs a 'family' key");
  GroupSpec spec;
  std::vector<std::string> allowed;
  if (it->second.value == "free") {
    spec.family = Family::Free;
    allowed = {"family", "rank"};
    auto rank = raw.find("rank");
    require(rank != raw.end(), Errc::ConfigInvalid, "[group] family free needs 'rank'");
    spec.rank = static_cast<int>(
        parse_integer(rank->second.value, "line " + std::to_string(rank->second.line)));
  } else if (it->second.value == "finite") {
    spec.family = Family::Finite;
    allowed = {"family", "name"};
    auto name = raw.find("name");
    require(name != raw.end(), Errc::ConfigInvalid, "[group] family finite needs 'name'");
    spec.name = name->second.value;
  } else if (it->second.value == "tree") {
    spec.family = Family::Tree;
    allowed = {"family", "degree", "depth"};
    auto degree = raw.find("degree"), depth = raw.find("depth");
    require(degree != raw.end() && depth != raw.end(), Errc::ConfigInvalid,
            "[group] family tree needs 'degree' and 'depth'");
    spec.degree = static_cast<int>(
        parse_integer(degree->second.value, "line " + std::to_string(degree->second.line)));
    spec.depth = static_cast<int>(
        parse_integer(depth->second.value, "line " + std::to_string(depth->second.line)));
  } else {
    fail(Errc::ConfigInvalid, "line " + std::to_string(it->second.line) +
                                  ": unknown group family '" + it->second.value + "'");
  }
  for (const auto& [key, entry] : raw)
    require(std::find(allowed.begin(), allowed.end(), key) != allowed.end(),
            Errc::ConfigInvalid,
            "line " + std::to_string(entry.line) + ": unknown [group] key '" + key + "'");
  return spec;
}

}  // namespace

const char* kind_name(ExperimentKind kind) {
  for (const auto& [name, k] : kKinds)
    if (k == kind) return name.c_str();
  fail(Errc::ConfigInvalid, "unknown experiment kind");
}

MarkedGroup GroupSpec::build() const {
  switch (family) {
    case Family::Free:
      return MarkedGroup::free_group(rank);
    case Family::Tree:
      return MarkedGroup::tree_group(degree, depth);
    case Family::Finite:
      break;
  }
  std::size_t colon = name.find(':');
  require(colon != std::string::npos && colon + 1 < name.size(), Errc::ConfigInvalid,
          "finite group name must look like 'symmetric:3', got '" + name + "'");
  std::string kindname = name.substr(0, colon);
  int n = static_cast<int>(parse_integer(name.substr(colon + 1), "group name '" + name + "'"));
  if (kindname == "symmetric") return MarkedGroup::symmetric_group(n);
  if (kindname == "cyclic") return MarkedGroup::cyclic_group(n);
  if (kindname == "alternating") return MarkedGroup::alternating_group(n);
  if (kindname == "dihedral") return MarkedGroup::dihedral_group(n);
  if (kindname == "elementary2") return MarkedGroup::elementary_abelian_2(n);
  if (kindname == "wreath") return MarkedGroup::wreath_c2_cyclic(n);
  fail(Errc::ConfigInvalid, "unknown finite group family '" + kindname + "'");
}

std::vector<std::string> GroupSpec::echo_lines() const {
  std::vector<std::string> out{"[group]"};
  switch (family) {
    case Family::Free:
      out.push_back("family = free");
      out.push_back("rank = " + std::to_string(rank));
      break;
    case Family::Finite:
      out.push_back("family = finite");
      out.push_back("name = " + name);
      break;
    case Family::Tree:
      out.push_back("family = tree");
      out.push_back("degree = " + std::to_string(degree));
      out.push_back("depth = " + std::to_string(depth));
      break;
  }
  return out;
}

std::vector<std::string> ExperimentConfig::echo_lines() const {
  std::vector<std::string> out{"[experiment]"};
  out.push_back(std::string("kind = ") + kind_name(kind));
  out.push_back("seed = " + std::to_string(seed));
  out.push_back("output = " + output_dir);
  if (group.has_value()) {
    std::vector<std::string> g = group->echo_lines();
    out.insert(out.end(), g.begin(), g.end());
  }
  out.push_back("[params]");
  for (const auto& [key, value] : params) out.push_back(key + " = " + value);
  return out;
}

const std::string& ExperimentConfig::param(const std::string& key) const {
  auto it = params.find(key);
  require(it != params.end(), Errc::ConfigInvalid,
          std::string("missing required [params] key '") + key + "' for " + kind_name(kind));
  return it->second;
}

std::string ExperimentConfig::param_or(const std::string& key,
                                       const std::string& fallback) const {
  auto it = params.find(key);
  return it == params.end() ? fallback : it->second;
}

long ExperimentConfig::param_long(const std::string& key) const {
  return parse_integer(param(key), "[params] " + key);
}

long ExperimentConfig::param_long_or(const std::string& key, long fallback) const {
  auto it = params.find(key);
  return it == params.end() ? fallback : parse_integer(it->second, "[params] " + key);
}

double ExperimentConfig::param_double_or(const std::string& key, double fallback) const {
  auto it = params.find(key);
  if (it == params.end()) return fallback;
  std::size_t used = 0;
  double out = 0;
  try {
    out = std::stod(it->second, &used);
  } catch (const std::exception&) {
    fail(Errc::ConfigInvalid, "[params] " + key + ": '" + it->second + "' is not a number");
  }
  require(used == it->second.size(), Errc::ConfigInvalid,
          "[params] " + key + ": '" + it->second + "' is not a number");
  return out;
}

bool ExperimentConfig::param_bool_or(const std::string& key, bool fallback) const {
  auto it = params.find(key);
  if (it == params.end()) return fallback;
  if (it->second == "true" || it->second == "1") return true;
  if (it->second == "false" || it->second == "0") return false;
  fail(Errc::ConfigInvalid, "[params] " + key + ": expected true or false");
}

std::string ExperimentConfig::param_path(const std::string& key) const {
  const std::string& p = param(key);
  if (!p.empty() && p[0] == '/') return p;
  return base_dir + "/" + p;
}

ExperimentConfig parse_config_text(const std::string& text, const std::string& base_dir) {
  std::map<std::string, RawSection> sections;
  std::string current;
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    std::string t = trim(line);
    if (t.empty() || t[0] == '#') continue;
    if (t.front() == '[') {
      require(t.back() == ']', Errc::ConfigInvalid,
              "line " + std::to_string(lineno) + ": unterminated section header");
      std::string name = trim(t.substr(1, t.size() - 2));
      require(name == "experiment" || name == "group" || name == "params",
              Errc::ConfigInvalid,
              "line " + std::to_string(lineno) + ": unknown section [" + name + "]");
      require(sections.count(name) == 0, Errc::ConfigInvalid,
              "line " + std::to_string(lineno) + ": duplicate section [" + name + "]");
      sections[name];
      current = name;
      continue;
    }
    std::size_t eq = t.find('=');
    require(eq != std::string::npos, Errc::ConfigInvalid,
            "line " + std::to_string(lineno) + ": expected 'key = value'");
    require(!current.empty(), Errc::ConfigInvalid,
            "line " + std::to_string(lineno) + ": key outside any section");
    std::string key = trim(t.substr(0, eq));
    std::string value = trim(t.substr(eq + 1));
    require(!key.empty() && !value.empty(), Errc::ConfigInvalid,
            "line " + std::to_string(lineno) + ": empty key or value");
    RawSection& sec = sections[current];
    require(sec.count(key) == 0, Errc::ConfigInvalid,
            "line " + std::to_string(lineno) + ": duplicate key '" + key + "'");
    sec[key] = RawEntry{value, lineno};
  }

  auto exp = sections.find("experiment");
  require(exp != sections.end(), Errc::ConfigInvalid, "missing [experiment] section");
  ExperimentConfig cfg;
  cfg.base_dir = base_dir.empty() ? "." : base_dir;
  for (const auto& [key, entry] : exp->second) {
    if (key == "kind") {
      auto it = kKinds.find(entry.value);
      require(it != kKinds.end(), Errc::ConfigInvalid,
              "line " + std::to_string(entry.line) + ": unknown experiment kind '" +
                  entry.value + "'");
      cfg.kind = it->second;
    } else if (key == "seed") {
      cfg.seed = parse_seed(entry.value, entry.line);
    } else if (key == "output") {
      cfg.output_dir = entry.value;
    } else {
      fail(Errc::ConfigInvalid,
           "line " + std::to_string(entry.line) + ": unknown [experiment] key '" + key + "'");
    }
  }
  require(exp->second.count("kind") == 1, Errc::ConfigInvalid,
          "[experiment] needs a 'kind' key");

  if (const char* env = std::getenv("IRSLAB_OUT"); env != nullptr && *env != '\0')
    cfg.output_dir = env;

  auto grp = sections.find("group");
  if (cfg.kind == ExperimentKind::ConeBarycenter) {
    require(grp == sections.end(), Errc::ConfigInvalid,
            "cone-barycenter reads bodies from files and takes no [group] block");
  } else {
    require(grp != sections.end(), Errc::ConfigInvalid,
            std::string(kind_name(cfg.kind)) + " needs a [group] block");
    cfg.group = parse_group(grp->second);
    Family fam = cfg.group->family;
    if (cfg.kind == ExperimentKind::SchreierSpectra || cfg.kind == ExperimentKind::BsConvergence)
      require(fam == Family::Free, Errc::ConfigInvalid,
              std::string(kind_name(cfg.kind)) + " needs a free group");
    if (cfg.kind == ExperimentKind::FolnerSearch || cfg.kind == ExperimentKind::HaarRatio)
      require(fam == Family::Tree, Errc::ConfigInvalid,
              std::string(kind_name(cfg.kind)) + " needs a tree group");
  }

  const std::vector<std::string>& allowed = kParamKeys.at(cfg.kind);
  if (auto par = sections.find("params"); par != sections.end()) {
    for (const auto& [key, entry] : par->second) {
      require(std::find(allowed.begin(), allowed.end(), key) != allowed.end(),
              Errc::ConfigInvalid,
              "line " + std::to_string(entry.line) + ": unknown [params] key '" + key +
                  "' for " + kind_name(cfg.kind));
      cfg.params[key] = entry.value;
    }
  }
  return cfg;
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  require(in.good(), Errc::IoError, "cannot open config file " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  std::size_t slash = path.find_last_of('/');
  std::string dir = slash == std::string::npos ? "." : path.substr(0, slash);
  return parse_config_text(buf.str(), dir);
}

}  // namespace irslab
