// Command-line driver for the convergence studies. Emits the per-level error
// tables as CSV (via --output) and prints a readable table to stdout.

#include <CLI11.hpp>

#include <iostream>
#include <string>

#include "fluxfem/study.hpp"

namespace {

bool parse_levels(const std::string& spec, int& lo, int& hi) {
  const auto pos = spec.find("..");
  try {
    if (pos == std::string::npos) {
      lo = hi = std::stoi(spec);
    } else {
      lo = std::stoi(spec.substr(0, pos));
      hi = std::stoi(spec.substr(pos + 2));
    }
  } catch (const std::exception&) {
    return false;
  }
  return lo <= hi && lo >= 0;
}

void add_common(CLI::App* cmd, fluxfem::ExperimentConfig& config, std::string& levels,
                std::string& grading) {
  cmd->add_option("--omega-degrees", config.omega_degrees,
                  "sector opening angle in degrees, in [90, 360)")
      ->required();
  cmd->add_option("--levels", levels, "level range a..b with h = 2^-level")->required();
  cmd->add_option("--grading", grading, "boundary_concentrated (default) or quasi_uniform");
  cmd->add_option("--output", config.output, "CSV output path");
  cmd->add_option("--dump-mesh", config.dump_mesh_path, "write the finest mesh (v/t/b records)");
  cmd->add_option("--dump-matrix", config.dump_matrix_path,
                  "write the finest stiffness matrix as i j value triplets");
  cmd->add_flag("--parallel-levels", config.parallel_levels, "run levels concurrently");
  cmd->add_option("--memory-guard", config.memory_guard_triangles,
                  "abort a level beyond this many triangles");
}

int run(const fluxfem::ExperimentConfig& config) {
  const fluxfem::ExperimentReport report = config.experiment == fluxfem::Experiment::flux
                                               ? fluxfem::run_flux_study(config)
                                               : fluxfem::run_control_study(config);
  fluxfem::emit_report(report, fluxfem::ReportFormat::markdown, std::cout);
  if (!config.output.empty())
    fluxfem::emit_report(report, fluxfem::ReportFormat::csv, config.output);
  if (report.any_failed()) {
    std::cerr << "warning: some levels failed; see the report comments\n";
    return 2;
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Boundary-concentrated FEM benchmarks: surface flux and Dirichlet control"};
  app.require_subcommand(1);

  fluxfem::ExperimentConfig flux_config, control_config;
  std::string flux_levels, control_levels;
  std::string flux_grading = "boundary_concentrated", control_grading = "boundary_concentrated";

  CLI::App* flux = app.add_subcommand("flux", "normal-derivative convergence study");
  add_common(flux, flux_config, flux_levels, flux_grading);

  CLI::App* control = app.add_subcommand("control", "Dirichlet boundary control study");
  add_common(control, control_config, control_levels, control_grading);
  control->add_option("--alpha", control_config.alpha, "regularization weight (default 1)");

  CLI11_PARSE(app, argc, argv);

  try {
    fluxfem::ExperimentConfig& config = flux->parsed() ? flux_config : control_config;
    const std::string& levels = flux->parsed() ? flux_levels : control_levels;
    const std::string& grading = flux->parsed() ? flux_grading : control_grading;
    config.experiment = flux->parsed() ? fluxfem::Experiment::flux : fluxfem::Experiment::control;

    if (!parse_levels(levels, config.level_min, config.level_max)) {
      std::cerr << "error: --levels expects 'a..b' or a single level\n";
      return 1;
    }
    if (grading == "boundary_concentrated") {
      config.grading = fluxfem::GradingMode::boundary_concentrated;
    } else if (grading == "quasi_uniform") {
      config.grading = fluxfem::GradingMode::quasi_uniform;
    } else {
      std::cerr << "error: unknown grading mode '" << grading << "'\n";
      return 1;
    }
    return run(config);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
}
