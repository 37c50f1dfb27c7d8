#include "irslab/runner.hpp"

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "irslab/cone.hpp"
#include "irslab/irs.hpp"
#include "irslab/spectral.hpp"
#include "irslab/svg.hpp"
#include "irslab/tree_group.hpp"

namespace irslab {

namespace {

using json = nlohmann::ordered_json;

std::string f17(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

// Rationals always carry an explicit denominator in emitted tables.
std::string frac(const Rat& q) {
  return q.get_num().get_str() + "/" + q.get_den().get_str();
}

std::vector<std::string> split_list(const std::string& value) {
  std::vector<std::string> out;
  std::string token;
  std::istringstream in(value);
  while (std::getline(in, token, ',')) {
    std::size_t b = token.find_first_not_of(" \t");
    if (b == std::string::npos) continue;
    std::size_t e = token.find_last_not_of(" \t");
    out.push_back(token.substr(b, e - b + 1));
  }
  require(!out.empty(), Errc::ConfigInvalid, "empty list value '" + value + "'");
  return out;
}

void write_artifact(RunReport& report, const std::string& name, const std::string& content) {
  std::filesystem::path path = std::filesystem::path(report.config.output_dir) / name;
  std::ofstream out(path);
  require(out.good(), Errc::IoError, "cannot write " + path.string());
  out << content;
  report.artifacts.push_back(name);
}

// The 2k-regular cycle fixture: a rotates an n-cycle, b fixes every vertex.
SchreierGraph cycle_graph(int n) {
  require(n >= 2, Errc::ConfigInvalid, "cycle size must be at least 2");
  std::vector<int> rot(static_cast<std::size_t>(n)), id(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    rot[static_cast<std::size_t>(i)] = (i + 1) % n;
    id[static_cast<std::size_t>(i)] = i;
  }
  return make_schreier_graph(2, {rot, id});
}

// A labeled family of Schreier graphs from the shared family parameters.
struct GraphFamily {
  std::vector<long> labels;  // cycle size, coset index, or trial seed
  std::vector<SchreierGraph> graphs;
};

// increasing_indices = the family feeds a local-approximation report, which
// needs one graph per strictly increasing index; otherwise a random family
// draws repeated trials at one index.
GraphFamily build_family(const ExperimentConfig& cfg, bool increasing_indices) {
  GraphFamily fam;
  const std::string& family = cfg.param("family");
  int k = cfg.group->rank;
  if (family == "cycle") {
    require(k == 2, Errc::ConfigInvalid, "the cycle family is defined over rank 2");
    for (const std::string& tok : split_list(cfg.param_or("sizes", "4,8,16,32,64"))) {
      long n = std::stol(tok);
      require(n >= 2, Errc::ConfigInvalid, "cycle sizes must be at least 2");
      fam.labels.push_back(n);
      fam.graphs.push_back(cycle_graph(static_cast<int>(n)));
    }
  } else if (family == "random") {
    long girth = cfg.param_long_or("girth", 0);
    if (increasing_indices) {
      int position = 0;
      for (const std::string& tok : split_list(cfg.param_or("sizes", "50,100,200"))) {
        long n = std::stol(tok);
        std::uint64_t s = cfg.seed + static_cast<std::uint64_t>(++position);
        fam.labels.push_back(n);
        fam.graphs.push_back(random_schreier_graph(k, static_cast<int>(n), s,
                                                   static_cast<int>(girth)));
      }
    } else {
      long n = cfg.param_long("index");
      long trials = cfg.param_long("trials");
      require(trials >= 1, Errc::ConfigInvalid, "trials must be positive");
      for (long t = 1; t <= trials; ++t) {
        std::uint64_t s = cfg.seed + static_cast<std::uint64_t>(t);
        fam.labels.push_back(static_cast<long>(s));
        fam.graphs.push_back(random_schreier_graph(k, static_cast<int>(n), s,
                                                   static_cast<int>(girth)));
      }
    }
  } else {
    fail(Errc::ConfigInvalid, "unknown family '" + family + "' (expected cycle or random)");
  }
  return fam;
}

std::string subgroup_brief(const Subgroup& h) {
  std::ostringstream out;
  if (h.parent().family() == Family::Finite) {
    long o = h.order();
    if (o == h.parent().order()) return "whole";
    if (o == 1) return "trivial";
    out << "order " << o << " index " << h.index();
  } else {
    long idx = h.index();
    if (idx == 1) return "whole";
    if (idx < 0)
      out << h.rep_tag() << " of infinite index";
    else
      out << "index " << idx;
  }
  return out.str();
}

json run_schreier_spectra(const ExperimentConfig& cfg, RunReport& report) {
  GraphFamily fam = build_family(cfg, false);
  MarkedGroup free_g = cfg.group->build();
  int cayley_r = static_cast<int>(cfg.param_long_or("cayley_radius", 12));
  SpectralInterval band = cayley_spectral_radius_estimate(free_g, cayley_r);

  json rows = json::array();
  std::ostringstream csv;
  csv << "label,vertices,rho0,cayley_lower,cayley_upper\n";
  PlotSeries series{"rho0", "#1f77b4", {}};
  for (std::size_t i = 0; i < fam.graphs.size(); ++i) {
    double rho = markov_spectral_radius_rho0(fam.graphs[i]);
    rows.push_back(json{{"label", fam.labels[i]},
                        {"vertices", fam.graphs[i].n},
                        {"rho0", rho}});
    csv << fam.labels[i] << "," << fam.graphs[i].n << "," << f17(rho) << ","
        << f17(band.lower) << "," << f17(band.upper) << "\n";
    series.points.emplace_back(static_cast<double>(fam.labels[i]), rho);
  }
  write_artifact(report, "schreier-spectra.csv", csv.str());
  write_artifact(report, "schreier-spectra.svg",
                 svg_line_plot("Markov spectral radius across the family", "family member",
                               "rho0", {series},
                               {{"Cayley interval", "#ff7f0e", band.lower, band.upper}}));
  return json{{"family", cfg.param("family")},
              {"cayley",
               {{"radius", cayley_r}, {"lower", band.lower}, {"upper", band.upper}}},
              {"rows", rows}};
}

json run_bs_convergence(const ExperimentConfig& cfg, RunReport& report) {
  GraphFamily fam = build_family(cfg, true);
  MarkedGroup free_g = cfg.group->build();
  int radius = static_cast<int>(cfg.param_long_or("radius", 2));
  double tolerance = cfg.param_double_or("tolerance", 0.1);

  std::vector<Subgroup> family;
  for (const SchreierGraph& g : fam.graphs) family.push_back(subgroup_of_graph(free_g, g));
  LocalApproxReport rep = local_approximation_report(family, radius, tolerance);

  write_artifact(report, "bs-convergence.csv", local_report_csv(rep));
  PlotSeries series{"BS distance to Cayley", "#2ca02c", {}};
  json rows = json::array();
  for (std::size_t i = 0; i < rep.rows.size(); ++i) {
    const LocalApproxRow& row = rep.rows[i];
    series.points.emplace_back(static_cast<double>(fam.labels[i]),
                               rat_to_double(row.bs_distance));
    json jrow{{"label", fam.labels[i]},
              {"index", row.index},
              {"bs_distance", frac(row.bs_distance)}};
    if (row.rho0_defined) jrow["rho0"] = row.rho0;
    rows.push_back(jrow);
  }
  write_artifact(report, "bs-convergence.svg",
                 svg_line_plot("Local statistics against the Cayley ball", "family member",
                               "BS distance at R=" + std::to_string(radius), {series}));
  return json{{"family", cfg.param("family")},
              {"radius", radius},
              {"tolerance", tolerance},
              {"cayley", {{"lower", rep.cayley.lower}, {"upper", rep.cayley.upper}}},
              {"hypothesis_observed", rep.hypothesis_observed},
              {"conclusion_observed", rep.conclusion_observed},
              {"theorem_consistent", rep.theorem_consistent},
              {"rows", rows}};
}

json run_irs_check(const ExperimentConfig& cfg, RunReport& report) {
  MarkedGroup g = cfg.group->build();
  std::ifstream in(cfg.param_path("file"));
  require(in.good(), Errc::IoError, "cannot open IRS file " + cfg.param_path("file"));
  IrsDistribution mu = parse_irs(g, in);

  InvarianceCheck inv = check_conjugation_invariance(mu);
  Subgroup closure = irs_normal_closure(mu);
  bool spanning = is_spanning(mu);

  json result{{"invariant", inv.invariant}};
  if (!inv.invariant) result["witness"] = inv.detail;
  result["normal_closure"] = subgroup_brief(closure);
  if (g.family() == Family::Finite) result["normal_closure_order"] = closure.order();
  result["spanning"] = spanning;
  if (inv.invariant) result["ergodic_components"] = ergodic_components(mu).size();

  std::ostringstream csv;
  csv << "atom,weight,subgroup\n";
  for (std::size_t i = 0; i < mu.atoms().size(); ++i)
    csv << i << "," << frac(mu.atoms()[i].weight) << ","
        << subgroup_brief(mu.atoms()[i].subgroup) << "\n";
  write_artifact(report, "irs-check.csv", csv.str());
  return result;
}

std::vector<Elem> parse_elems(const MarkedGroup& g, const std::string& list) {
  std::vector<Elem> out;
  for (const std::string& tok : split_list(list)) out.push_back(g.parse_elem(tok));
  return out;
}

json run_folner_search(const ExperimentConfig& cfg, RunReport& report) {
  MarkedGroup g = cfg.group->build();
  const std::string& gens = cfg.param("gens");
  TreeSubgroup c = gens == "whole" ? TreeSubgroup::whole(g)
                                   : TreeSubgroup::generated_by(g, parse_elems(g, gens));
  std::vector<Elem> q_reps;
  if (cfg.has_param("q_reps")) {
    q_reps = parse_elems(g, cfg.param("q_reps"));
  } else if (gens == "whole") {
    for (int i = 0; i < g.rank(); ++i) q_reps.push_back(g.letter_elem(2 * i));
  } else {
    q_reps = parse_elems(g, gens);
  }
  int n = static_cast<int>(cfg.param_long("n"));
  int min_level = static_cast<int>(cfg.param_long_or("min_level", 0));

  FolnerOutcome outcome = folner_search(c, q_reps, n, min_level);
  json result{{"subgroup_order", c.order()},
              {"tolerance_n", n},
              {"min_level", min_level},
              {"candidates_checked", outcome.candidates_checked},
              {"found", outcome.certificate.has_value()}};
  std::ostringstream csv;
  csv << "rep,portrait\n";
  if (outcome.certificate.has_value()) {
    const FolnerCertificate& cert = *outcome.certificate;
    result["level"] = cert.level;
    result["worst_ratio"] = frac(cert.worst_ratio);
    result["worst_rep"] = g.name(Elem{cert.worst_rep});
    json reps = json::array();
    for (std::size_t i = 0; i < cert.reps.size(); ++i) {
      std::string nm = g.name(Elem{cert.reps[i]});
      reps.push_back(nm);
      csv << i << "," << nm << "\n";
    }
    result["reps"] = reps;
    result["recheck_passed"] = folner_certificate_check(cert, c, q_reps, n);
  }
  write_artifact(report, "folner-search.csv", csv.str());
  return result;
}

json run_haar_ratio(const ExperimentConfig& cfg, RunReport& report) {
  MarkedGroup g = cfg.group->build();
  CosetUnion o = make_coset_union(g, static_cast<int>(cfg.param_long("o_level")),
                                  parse_elems(g, cfg.param("o_reps")));
  CosetUnion l = make_coset_union(g, static_cast<int>(cfg.param_long("l_level")),
                                  parse_elems(g, cfg.param("l_reps")));
  Rat ratio = haar_ratio(o, l);
  std::ostringstream csv;
  csv << "o_level,o_cosets,l_level,l_cosets,ratio\n";
  csv << o.level << "," << o.reps.size() << "," << l.level << "," << l.reps.size() << ","
      << frac(ratio) << "\n";
  write_artifact(report, "haar-ratio.csv", csv.str());
  return json{{"ratio", frac(ratio)},
              {"o", {{"level", o.level}, {"cosets", o.reps.size()}}},
              {"l", {{"level", l.level}, {"cosets", l.reps.size()}}}};
}

json run_cone_barycenter(const ExperimentConfig& cfg, RunReport& report) {
  auto read_file = [&](const std::string& key) {
    std::ifstream in(cfg.param_path(key));
    require(in.good(), Errc::IoError, "cannot open " + cfg.param_path(key));
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
  };
  ConvexBody c = body_from_text(read_file("body_file"));
  BodyMeasure nu = measure_from_text(read_file("measure_file"));
  DirectionSet dirs = make_direction_set(c.d, cfg.param_double_or("covering", 0.2));

  InvariantMeasureReport verdict = invariant_measure_test(nu, c, dirs);
  ConvexBody bary = barycenter(nu);
  write_artifact(report, "barycenter.txt", body_to_text(bary));

  std::ostringstream csv;
  csv << "direction";
  for (int i = 0; i < c.d; ++i) csv << ",b" << i;
  csv << ",support_reference,support_barycenter\n";
  for (std::size_t i = 0; i < dirs.dirs.size(); ++i) {
    csv << i;
    for (double x : dirs.dirs[i]) csv << "," << f17(x);
    csv << "," << f17(support_eval(c, dirs.dirs[i]).plus) << ","
        << f17(support_eval(bary, dirs.dirs[i]).plus) << "\n";
  }
  write_artifact(report, "cone-barycenter.csv", csv.str());

  const char* verdict_name = verdict.verdict == InvariantVerdict::Consistent ? "Consistent"
                             : verdict.verdict == InvariantVerdict::Violated
                                 ? "Violated"
                                 : "BarycenterProper";
  json result{{"verdict", verdict_name},
              {"atoms", nu.atoms.size()},
              {"barycenter_vertices", bary.verts.size()},
              {"support_gap", verdict.support_gap}};
  if (!verdict.witness.empty()) result["witness"] = verdict.witness;
  if (c.d == 2 && cfg.param_bool_or("svg", true)) {
    std::vector<std::pair<ConvexBody, std::string>> drawing{{c, "#000000"},
                                                            {bary, "#d62728"}};
    for (const BodyAtom& atom : nu.atoms) drawing.emplace_back(atom.body, "#1f77b4");
    write_artifact(report, "cone-barycenter.svg",
                   svg_bodies("Reference body, atoms and barycenter", drawing));
  }
  return result;
}

json run_radical_check(const ExperimentConfig& cfg, RunReport& report) {
  MarkedGroup g = cfg.group->build();
  std::ifstream in(cfg.param_path("file"));
  require(in.good(), Errc::IoError, "cannot open IRS file " + cfg.param_path("file"));
  IrsDistribution mu = parse_irs(g, in);
  AmenableIrsReport rep = amenable_irs_radical_check(mu);

  std::ostringstream csv;
  csv << "atom,weight,subgroup,amenable\n";
  for (std::size_t i = 0; i < mu.atoms().size(); ++i)
    csv << i << "," << frac(mu.atoms()[i].weight) << ","
        << subgroup_brief(mu.atoms()[i].subgroup) << ","
        << (amenable_flag(mu.atoms()[i].subgroup) ? "true" : "false") << "\n";
  write_artifact(report, "radical-check.csv", csv.str());
  return json{{"is_amenable_irs", rep.is_amenable_irs},
              {"radical", subgroup_brief(rep.radical)},
              {"contained_in_radical", rep.contained_in_radical},
              {"theorem_consistent", rep.theorem_consistent}};
}

}  // namespace

std::string RunReport::payload() const {
  json j{{"schema", schema},
         {"kind", kind_name(config.kind)},
         {"seed", config.seed},
         {"config", config.echo_lines()},
         {"results", results},
         {"artifacts", artifacts}};
  return j.dump(2) + "\n";
}

std::string RunReport::to_json() const {
  json j = json::parse(payload());
  j["wall_ms"] = wall_ms;
  return j.dump(2) + "\n";
}

RunReport run_experiment(const ExperimentConfig& cfg) {
  auto start = std::chrono::steady_clock::now();
  RunReport report;
  report.config = cfg;
  std::filesystem::create_directories(cfg.output_dir);
  switch (cfg.kind) {
    case ExperimentKind::SchreierSpectra:
      report.results = run_schreier_spectra(cfg, report);
      break;
    case ExperimentKind::BsConvergence:
      report.results = run_bs_convergence(cfg, report);
      break;
    case ExperimentKind::IrsCheck:
      report.results = run_irs_check(cfg, report);
      break;
    case ExperimentKind::FolnerSearch:
      report.results = run_folner_search(cfg, report);
      break;
    case ExperimentKind::HaarRatio:
      report.results = run_haar_ratio(cfg, report);
      break;
    case ExperimentKind::ConeBarycenter:
      report.results = run_cone_barycenter(cfg, report);
      break;
    case ExperimentKind::RadicalCheck:
      report.results = run_radical_check(cfg, report);
      break;
  }
  report.wall_ms = std::chrono::duration<double, std::milli>(
                       std::chrono::steady_clock::now() - start)
                       .count();
  std::filesystem::path path = std::filesystem::path(cfg.output_dir) / "report.json";
  std::ofstream out(path);
  require(out.good(), Errc::IoError, "cannot write " + path.string());
  out << report.to_json();
  report.artifacts.push_back("report.json");
  return report;
}

std::string export_dot(const std::string& spec) {
  std::vector<std::string> parts;
  std::string token;
  std::istringstream in(spec);
  while (std::getline(in, token, ':')) parts.push_back(token);
  require(!parts.empty(), Errc::ConfigInvalid, "empty graph spec");
  if (parts[0] == "cycle") {
    require(parts.size() == 2, Errc::ConfigInvalid, "expected cycle:<n>");
    return graph_to_dot(cycle_graph(std::stoi(parts[1])), {"a", "b"});
  }
  if (parts[0] == "random") {
    require(parts.size() == 4 || parts.size() == 5, Errc::ConfigInvalid,
            "expected random:<k>:<n>:<seed>[:<girth>]");
    int k = std::stoi(parts[1]);
    require(k >= 1 && k <= 26, Errc::ConfigInvalid, "rank out of range");
    SchreierGraph g =
        random_schreier_graph(k, std::stoi(parts[2]), std::stoull(parts[3]),
                              parts.size() == 5 ? std::stoi(parts[4]) : 0);
    std::vector<std::string> labels;
    for (int i = 0; i < k; ++i) labels.push_back(std::string(1, static_cast<char>('a' + i)));
    return graph_to_dot(g, labels);
  }
  fail(Errc::ConfigInvalid, "unknown graph spec '" + spec + "'");
}

std::string version_string() {
  return "irslab 1.0.0 (report schema: irslab-report v1)\n";
}

}  // namespace irslab
