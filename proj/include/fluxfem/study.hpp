#pragma once

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "fluxfem/mesh.hpp"

namespace fluxfem {

enum class Experiment { flux, control };
enum class ReportFormat { csv, markdown };

struct ExperimentConfig {
  Experiment experiment = Experiment::flux;
  double omega_degrees = 90.0;
  int level_min = 4;
  int level_max = 7;
  GradingMode grading = GradingMode::boundary_concentrated;
  double alpha = 1.0;  // control only
  std::string output;
  std::string dump_mesh_path;
  std::string dump_matrix_path;
  bool parallel_levels = false;
  long memory_guard_triangles = 2000000;
};

/// One convergence level of the flux study. The EOC between levels i-1 and i
/// is log2(e_{i-1}/e_i) and is absent on the first row.
struct FluxRow {
  int level = 0;
  double h = 0.0;
  long n_elem = 0;
  long n_dof = 0;
  double err_classical = 0.0;
  double err_variational = 0.0;
  std::optional<double> eoc_classical;
  std::optional<double> eoc_variational;
  bool failed = false;
  std::string failure;
  // diagnostics kept out of the CSV
  double compatibility_residual = 0.0;
  int solver_iterations = 0;
  MeshAudit audit;
};

struct ControlRow {
  int level = 0;
  double h = 0.0;
  long n_elem = 0;
  long n_dof_total = 0;
  long n_dof_boundary = 0;
  double err_u = 0.0;
  double err_y = 0.0;
  std::optional<double> eoc_u;
  std::optional<double> eoc_y;
  int gmres_iters = 0;
  bool failed = false;
  std::string failure;
  double optimality_residual = 0.0;
  double state_residual = 0.0;
  double adjoint_residual = 0.0;
  MeshAudit audit;
};

struct ExperimentReport {
  ExperimentConfig config;
  double lambda_bar = 0.0;
  std::string generated_at;
  std::vector<FluxRow> flux_rows;
  std::vector<ControlRow> control_rows;

  bool any_failed() const;
};

ExperimentReport run_flux_study(const ExperimentConfig& config);
ExperimentReport run_control_study(const ExperimentConfig& config);

void emit_report(const ExperimentReport& report, ReportFormat format, std::ostream& out);
void emit_report(const ExperimentReport& report, ReportFormat format, const std::string& path);

/// Inverse of the CSV emitter (metadata comments + rows).
ExperimentReport parse_report(std::istream& in);
ExperimentReport parse_report_file(const std::string& path);

double eoc(double err_coarse, double err_fine);

}  // namespace fluxfem
