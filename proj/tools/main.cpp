#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>

#include "CLI11.hpp"
#include "irslab/acceptance.hpp"
#include "irslab/config.hpp"
#include "irslab/runner.hpp"
#include "json.hpp"

namespace {

using namespace irslab;

bool is_config_error(Errc code) {
  return code == Errc::ConfigInvalid || code == Errc::ParseError || code == Errc::IoError;
}

int cmd_run(const std::string& path) {
  ExperimentConfig cfg;
  try {
    cfg = load_config(path);
  } catch (const Error& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  }
  try {
    RunReport report = run_experiment(cfg);
    std::cout << report.to_json();
    std::cerr << "report: "
              << (std::filesystem::path(cfg.output_dir) / "report.json").string() << "\n";
    return 0;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return is_config_error(e.code()) ? 2 : 1;
  }
}

int cmd_selftest(const std::string& filter) {
  std::vector<CriterionResult> results;
  try {
    results = acceptance_criteria(filter);
  } catch (const Error& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  }
  bool all_pass = true;
  for (const CriterionResult& r : results) {
    all_pass = all_pass && r.pass;
    std::printf("[%s] %2d %s: %s (%.2f s)\n", r.pass ? "PASS" : "FAIL", r.number,
                r.module.c_str(), r.name.c_str(), r.seconds);
    if (!r.pass) std::printf("       %s\n", r.detail.c_str());
  }
  std::printf("%zu/%zu criteria passed\n",
              static_cast<std::size_t>(
                  std::count_if(results.begin(), results.end(),
                                [](const CriterionResult& r) { return r.pass; })),
              results.size());

  const char* env = std::getenv("IRSLAB_OUT");
  std::filesystem::path out_dir = (env && *env) ? env : "irslab-out";
  std::error_code ec;
  std::filesystem::create_directories(out_dir, ec);
  nlohmann::ordered_json j{{"schema", "irslab-selftest v1"},
                           {"filter", filter},
                           {"all_pass", all_pass}};
  j["criteria"] = nlohmann::ordered_json::array();
  for (const CriterionResult& r : results)
    j["criteria"].push_back({{"number", r.number},
                             {"module", r.module},
                             {"name", r.name},
                             {"pass", r.pass},
                             {"detail", r.detail},
                             {"seconds", r.seconds},
                             {"payload", r.payload}});
  std::filesystem::path report_path = out_dir / "selftest-report.json";
  std::ofstream out(report_path);
  if (out.good()) {
    out << j.dump(2) << "\n";
    std::cerr << "report: " << report_path.string() << "\n";
  } else {
    std::cerr << "warning: cannot write " << report_path.string() << "\n";
  }
  return all_pass ? 0 : 1;
}

int cmd_export_dot(const std::string& spec) {
  try {
    std::cout << export_dot(spec);
    return 0;
  } catch (const Error& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"desk-scale experiments on subgroup spaces, spectra and invariant measures"};
  app.require_subcommand(1);

  std::string config_path;
  CLI::App* run_cmd = app.add_subcommand("run", "execute an experiment config file");
  run_cmd->add_option("config", config_path, "path to the config file")->required();

  std::string filter;
  CLI::App* self_cmd = app.add_subcommand("selftest", "run the bundled acceptance criteria");
  self_cmd->add_option("--filter", filter,
                       "restrict to one module (spectral, tdlc, irs, convex-cone, "
                       "subgroup-space, cli)");

  std::string graph_spec;
  CLI::App* dot_cmd =
      app.add_subcommand("export-dot", "emit a Schreier graph in DOT format");
  dot_cmd->add_option("graph", graph_spec,
                      "cycle:<n> or random:<k>:<n>:<seed>[:<girth>]")
      ->required();

  CLI::App* ver_cmd = app.add_subcommand("version", "print version and report schema");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  if (run_cmd->parsed()) return cmd_run(config_path);
  if (self_cmd->parsed()) return cmd_selftest(filter);
  if (dot_cmd->parsed()) return cmd_export_dot(graph_spec);
  if (ver_cmd->parsed()) {
    std::cout << version_string();
    return 0;
  }
  return 2;
}
