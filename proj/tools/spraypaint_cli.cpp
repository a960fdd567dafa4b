// Experiment runner: simulates the ST/A/B/C/D x pattern x velocity matrix and
// writes a comparison report plus per-cell traces.
//
//   spraypaint run --preset table1 --out results --jobs 4
//   spraypaint run --config my_experiment.json
//   spraypaint plotdata --trace results/trace_r0.16_L0.10_v0.100_A.csv --out plots
//   spraypaint config --preset table1 --solve-start > configs/table1.json
//
// SPRAYPAINT_OUTPUT_DIR overrides the config's output_dir (but not --out).

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "spraypaint/errors.hpp"
#include "spraypaint/experiment.hpp"

namespace fs = std::filesystem;
using namespace spraypaint;

namespace {

int cmd_run(const std::string& config_path, const std::string& preset_name,
            const std::string& out_dir, int jobs) {
  ExperimentConfig config = preset_name.empty() ? ExperimentConfig{} : preset(preset_name);
  if (!config_path.empty()) {
    std::ifstream in(config_path);
    if (!in) {
      std::cerr << "error: cannot open config '" << config_path << "'\n";
      return 2;
    }
    nlohmann::json j;
    try {
      in >> j;
    } catch (const nlohmann::json::parse_error& e) {
      std::cerr << "error: " << config_path << ": " << e.what() << '\n';
      return 2;
    }
    config = config_from_json(j, config);
  }
  if (const char* env = std::getenv("SPRAYPAINT_OUTPUT_DIR"); env != nullptr && *env != '\0') {
    config.output_dir = env;
  }
  if (!out_dir.empty()) config.output_dir = out_dir;
  config.validate();

  const ComparisonReport report = run_matrix(config, jobs);

  fs::create_directories(config.output_dir);
  const fs::path dir(config.output_dir);
  {
    std::ofstream json_out(dir / "report.json");
    json_out << report_to_json(report).dump(2) << '\n';
    std::ofstream table_out(dir / "report.txt");
    table_out << format_table(report);
    std::ofstream cfg_out(dir / "config.json");
    cfg_out << config_to_json(config).dump(2) << '\n';
  }
  std::cout << format_table(report);
  std::cout << "report: " << (dir / "report.json").string() << '\n';

  const auto violations = fov_violations(report);
  for (const std::string& v : violations) std::cerr << "check failed: " << v << '\n';
  return violations.empty() ? 0 : 1;
}

// Prints a preset as a config file, optionally with IK-solved start
// configurations so runs no longer depend on the solver.
int cmd_config(const std::string& preset_name, bool solve_start) {
  ExperimentConfig config = preset(preset_name);
  if (solve_start) {
    const Surface surface = make_surface(config.surface_name, config.surface_params);
    for (PatternSpec& spec : config.patterns) {
      LawnMowerPattern pattern;
      pattern.r = spec.r;
      pattern.L = spec.L;
      pattern.x0 = spec.x0;
      pattern.y0 = spec.y0;
      spec.q_init = start_configuration(pattern, surface, config.sim.k_bar_des);
    }
  }
  std::cout << config_to_json(config).dump(2) << '\n';
  return 0;
}

int cmd_plotdata(const std::string& trace, const std::string& out_dir) {
  for (const std::string& p : emit_plot_data(trace, out_dir)) std::cout << p << '\n';
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Set-based spray painting experiments"};
  app.require_subcommand(1);

  std::string config_path, preset_name, out_dir;
  int jobs = 0;
  CLI::App* run = app.add_subcommand("run", "run an experiment matrix");
  run->add_option("--config", config_path, "experiment config (JSON)")->check(CLI::ExistingFile);
  run->add_option("--preset", preset_name, "built-in matrix")
      ->check(CLI::IsMember({"table1", "table2"}));
  run->add_option("--out", out_dir, "output directory");
  run->add_option("--jobs", jobs, "worker threads (0 = all cores)")->check(CLI::NonNegativeNumber);

  std::string trace_path, plot_out;
  CLI::App* plot = app.add_subcommand("plotdata", "derive columnar plot data from a trace CSV");
  plot->add_option("--trace", trace_path, "trace CSV")->required()->check(CLI::ExistingFile);
  plot->add_option("--out", plot_out, "output directory")->required();

  std::string config_preset;
  bool solve_start = false;
  CLI::App* cfg = app.add_subcommand("config", "print a preset as a config file");
  cfg->add_option("--preset", config_preset, "built-in matrix")
      ->required()
      ->check(CLI::IsMember({"table1", "table2"}));
  cfg->add_flag("--solve-start", solve_start, "include IK-solved q_init per pattern");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*run) {
      if (config_path.empty() && preset_name.empty()) {
        std::cerr << "error: run needs --config and/or --preset\n";
        return 2;
      }
      return cmd_run(config_path, preset_name, out_dir, jobs);
    }
    if (*cfg) return cmd_config(config_preset, solve_start);
    return cmd_plotdata(trace_path, plot_out);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
}
