#include "fluxfem/study.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <future>
#include <iomanip>
#include <map>
#include <sstream>

#include "fluxfem/control.hpp"
#include "fluxfem/fem.hpp"
#include "fluxfem/flux.hpp"
#include "fluxfem/manufactured.hpp"

namespace fluxfem {

namespace {

constexpr double kPi = 3.14159265358979323846;

std::string utc_timestamp() {
  const auto now = std::chrono::system_clock::now();
  const std::time_t tt = std::chrono::system_clock::to_time_t(now);
  std::tm tm{};
  gmtime_r(&tt, &tm);
  char buf[32];
  std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

std::string fmt_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

std::string fmt_optional(const std::optional<double>& v) {
  return v ? fmt_double(*v) : std::string();
}

void dump_matrix_triplets(const SpMat& A, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open matrix dump file: " + path);
  out.precision(17);
  for (int col = 0; col < A.outerSize(); ++col) {
    for (SpMat::InnerIterator it(A, col); it; ++it) {
      out << it.row() << ' ' << it.col() << ' ' << it.value() << '\n';
    }
  }
}

FluxRow flux_level(const ExperimentConfig& config, const FluxBenchmark& bench, const Mesh& base,
                   int level) {
  FluxRow row;
  row.level = level;
  row.h = std::ldexp(1.0, -level);
  try {
    GradingPolicy policy;
    policy.mode = config.grading;
    policy.h_target = row.h;
    Mesh refined = refine_graded(base, policy);
    if (refined.n_triangles() > config.memory_guard_triangles)
      throw std::runtime_error("memory guard exceeded: " + std::to_string(refined.n_triangles()) +
                               " triangles");
    auto mesh = std::make_shared<const Mesh>(std::move(refined));
    row.n_elem = mesh->n_triangles();
    row.n_dof = mesh->n_vertices();
    row.audit = audit_mesh(*mesh);

    PoissonOperator op(mesh);
    const Vector load = assemble_load(*mesh, bench.f_rhs);
    // One factorization per level; at the finest graded levels (millions of
    // dofs) iterative solves to 1e-12 would dominate the study runtime.
    const FeFunction u_h =
        op.solve(load, Vector::Zero(mesh->n_boundary_vertices()), SolveBackend::ldlt);
    row.solver_iterations = op.last_iterations();

    const EdgeFlux classical = classical_flux(mesh, u_h);
    row.err_classical = flux_error_l2(*mesh, classical, bench.flux_exact);

    const BoundaryFunction variational = variational_flux(op, u_h, load);
    row.err_variational = flux_error_l2(*mesh, variational, bench.flux_exact);

    const double f_mass = load.sum();  // (f,1) by partition of unity
    row.compatibility_residual =
        std::abs(boundary_integral(*mesh, variational) + f_mass) / std::max(1.0, std::abs(f_mass));

    if (level == config.level_max) {
      if (!config.dump_mesh_path.empty()) dump_mesh(*mesh, config.dump_mesh_path);
      if (!config.dump_matrix_path.empty())
        dump_matrix_triplets(op.stiffness(), config.dump_matrix_path);
    }
  } catch (const std::exception& e) {
    row.failed = true;
    row.failure = e.what();
  }
  return row;
}

ControlRow control_level(const ExperimentConfig& config, const ControlBenchmark& bench,
                         const Mesh& base, int level) {
  ControlRow row;
  row.level = level;
  row.h = std::ldexp(1.0, -level);
  try {
    GradingPolicy policy;
    policy.mode = config.grading;
    policy.h_target = row.h;
    Mesh refined = refine_graded(base, policy);
    if (refined.n_triangles() > config.memory_guard_triangles)
      throw std::runtime_error("memory guard exceeded: " + std::to_string(refined.n_triangles()) +
                               " triangles");
    auto mesh = std::make_shared<const Mesh>(std::move(refined));
    row.n_elem = mesh->n_triangles();
    row.n_dof_total = mesh->n_vertices();
    row.n_dof_boundary = mesh->n_boundary_vertices();
    row.audit = audit_mesh(*mesh);

    ControlProblem problem;
    problem.mesh = mesh;
    problem.alpha = config.alpha;
    problem.f_state = bench.f_state;
    problem.y_desired = bench.y_desired;
    const ControlSolution sol = solve_control(problem);

    row.gmres_iters = sol.krylov.iterations;
    row.optimality_residual = sol.optimality_residual;
    row.state_residual = sol.state_residual;
    row.adjoint_residual = sol.adjoint_residual;
    const auto [err_u, err_y] = control_errors(sol, bench);
    row.err_u = err_u;
    row.err_y = err_y;

    if (level == config.level_max && !config.dump_mesh_path.empty())
      dump_mesh(*mesh, config.dump_mesh_path);
  } catch (const std::exception& e) {
    row.failed = true;
    row.failure = e.what();
  }
  return row;
}

template <typename Row, typename Fn>
std::vector<Row> run_levels(const ExperimentConfig& config, const Fn& fn) {
  std::vector<Row> rows;
  if (config.parallel_levels) {
    std::vector<std::future<Row>> futures;
    for (int level = config.level_min; level <= config.level_max; ++level)
      futures.push_back(std::async(std::launch::async, fn, level));
    for (auto& f : futures) rows.push_back(f.get());
  } else {
    for (int level = config.level_min; level <= config.level_max; ++level)
      rows.push_back(fn(level));
  }
  return rows;
}

}  // namespace

double eoc(double err_coarse, double err_fine) { return std::log2(err_coarse / err_fine); }

bool ExperimentReport::any_failed() const {
  for (const auto& r : flux_rows)
    if (r.failed) return true;
  for (const auto& r : control_rows)
    if (r.failed) return true;
  return false;
}

ExperimentReport run_flux_study(const ExperimentConfig& config) {
  if (config.level_min > config.level_max) throw std::invalid_argument("empty level range");
  ExperimentReport report;
  report.config = config;
  report.generated_at = utc_timestamp();

  const double omega = config.omega_degrees * kPi / 180.0;
  const FluxBenchmark bench = flux_bench(omega);
  report.lambda_bar = bench.domain.lambda_bar;
  const Mesh base = initial_mesh(bench.domain);

  report.flux_rows = run_levels<FluxRow>(
      config, [&](int level) { return flux_level(config, bench, base, level); });

  for (std::size_t i = 1; i < report.flux_rows.size(); ++i) {
    FluxRow& cur = report.flux_rows[i];
    const FluxRow& prev = report.flux_rows[i - 1];
    if (cur.failed || prev.failed) continue;
    cur.eoc_classical = eoc(prev.err_classical, cur.err_classical);
    cur.eoc_variational = eoc(prev.err_variational, cur.err_variational);
  }
  return report;
}

ExperimentReport run_control_study(const ExperimentConfig& config) {
  if (config.level_min > config.level_max) throw std::invalid_argument("empty level range");
  ExperimentReport report;
  report.config = config;
  report.generated_at = utc_timestamp();

  const double omega = config.omega_degrees * kPi / 180.0;
  const ControlBenchmark bench = control_bench(omega, config.alpha);
  report.lambda_bar = bench.domain.lambda_bar;
  const Mesh base = initial_mesh(bench.domain);

  report.control_rows = run_levels<ControlRow>(
      config, [&](int level) { return control_level(config, bench, base, level); });

  for (std::size_t i = 1; i < report.control_rows.size(); ++i) {
    ControlRow& cur = report.control_rows[i];
    const ControlRow& prev = report.control_rows[i - 1];
    if (cur.failed || prev.failed) continue;
    cur.eoc_u = eoc(prev.err_u, cur.err_u);
    cur.eoc_y = eoc(prev.err_y, cur.err_y);
  }
  return report;
}

namespace {

void emit_csv(const ExperimentReport& report, std::ostream& out) {
  const ExperimentConfig& c = report.config;
  out << "# experiment: " << (c.experiment == Experiment::flux ? "flux" : "control") << '\n';
  out << "# omega_degrees: " << fmt_double(c.omega_degrees) << '\n';
  out << "# lambda_bar: " << fmt_double(report.lambda_bar) << '\n';
  out << "# grading: "
      << (c.grading == GradingMode::boundary_concentrated ? "boundary_concentrated"
                                                          : "quasi_uniform")
      << '\n';
  if (c.experiment == Experiment::control) out << "# alpha: " << fmt_double(c.alpha) << '\n';
  out << "# generated_at: " << report.generated_at << '\n';
  for (const auto& r : report.flux_rows)
    if (r.failed) out << "# level " << r.level << " failed: " << r.failure << '\n';
  for (const auto& r : report.control_rows)
    if (r.failed) out << "# level " << r.level << " failed: " << r.failure << '\n';

  if (c.experiment == Experiment::flux) {
    out << "level,h,n_elem,n_dof,err_classical,eoc_classical,err_variational,eoc_variational\n";
    for (const auto& r : report.flux_rows) {
      out << r.level << ',' << fmt_double(r.h) << ',' << r.n_elem << ',' << r.n_dof << ',';
      if (r.failed) {
        out << ",,,\n";
        continue;
      }
      out << fmt_double(r.err_classical) << ',' << fmt_optional(r.eoc_classical) << ','
          << fmt_double(r.err_variational) << ',' << fmt_optional(r.eoc_variational) << '\n';
    }
  } else {
    out << "level,h,n_elem,n_dof_total,n_dof_boundary,err_u,eoc_u,err_y,eoc_y,gmres_iters\n";
    for (const auto& r : report.control_rows) {
      out << r.level << ',' << fmt_double(r.h) << ',' << r.n_elem << ',' << r.n_dof_total << ','
          << r.n_dof_boundary << ',';
      if (r.failed) {
        out << ",,,,\n";
        continue;
      }
      out << fmt_double(r.err_u) << ',' << fmt_optional(r.eoc_u) << ',' << fmt_double(r.err_y)
          << ',' << fmt_optional(r.eoc_y) << ',' << r.gmres_iters << '\n';
    }
  }
}

std::string fmt_err(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.3e", v);
  return buf;
}

std::string fmt_eoc(const std::optional<double>& v) {
  if (!v) return "-";
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.2f", *v);
  return buf;
}

void emit_markdown(const ExperimentReport& report, std::ostream& out) {
  const ExperimentConfig& c = report.config;
  out << "Experiment: " << (c.experiment == Experiment::flux ? "flux" : "control")
      << ", omega = " << c.omega_degrees << " deg, lambda = " << report.lambda_bar << ", "
      << (c.grading == GradingMode::boundary_concentrated ? "boundary-concentrated"
                                                          : "quasi-uniform")
      << " meshes\n\n";
  if (c.experiment == Experiment::flux) {
    out << "| level | h | elements | dofs | classical error (EOC) | variational error (EOC) |\n";
    out << "|---|---|---|---|---|---|\n";
    for (const auto& r : report.flux_rows) {
      out << "| " << r.level << " | 2^-" << r.level << " | " << r.n_elem << " | " << r.n_dof
          << " | ";
      if (r.failed)
        out << "failed | failed |\n";
      else
        out << fmt_err(r.err_classical) << " (" << fmt_eoc(r.eoc_classical) << ") | "
            << fmt_err(r.err_variational) << " (" << fmt_eoc(r.eoc_variational) << ") |\n";
    }
  } else {
    out << "| level | h | elements | dofs | boundary dofs | control error (EOC) | state error "
           "(EOC) | GMRES |\n";
    out << "|---|---|---|---|---|---|---|---|\n";
    for (const auto& r : report.control_rows) {
      out << "| " << r.level << " | 2^-" << r.level << " | " << r.n_elem << " | " << r.n_dof_total
          << " | " << r.n_dof_boundary << " | ";
      if (r.failed)
        out << "failed | failed | - |\n";
      else
        out << fmt_err(r.err_u) << " (" << fmt_eoc(r.eoc_u) << ") | " << fmt_err(r.err_y) << " ("
            << fmt_eoc(r.eoc_y) << ") | " << r.gmres_iters << " |\n";
    }
  }
}

}  // namespace

void emit_report(const ExperimentReport& report, ReportFormat format, std::ostream& out) {
  if (format == ReportFormat::csv)
    emit_csv(report, out);
  else
    emit_markdown(report, out);
}

void emit_report(const ExperimentReport& report, ReportFormat format, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open report file: " + path);
  emit_report(report, format, out);
}

namespace {

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> fields;
  std::string cur;
  for (char ch : line) {
    if (ch == ',') {
      fields.push_back(cur);
      cur.clear();
    } else {
      cur += ch;
    }
  }
  fields.push_back(cur);
  return fields;
}

std::optional<double> parse_optional(const std::string& s) {
  if (s.empty()) return std::nullopt;
  return std::stod(s);
}

}  // namespace

ExperimentReport parse_report(std::istream& in) {
  ExperimentReport report;
  std::map<std::string, std::string> meta;
  std::string line;
  bool header_seen = false;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    if (line[0] == '#') {
      const auto colon = line.find(':');
      if (colon != std::string::npos) {
        std::string key = line.substr(2, colon - 2);
        std::string value = line.substr(colon + 1);
        while (!value.empty() && value.front() == ' ') value.erase(value.begin());
        meta[key] = value;
      }
      continue;
    }
    if (!header_seen) {
      header_seen = true;  // column header line
      continue;
    }
    const auto f = split_csv_line(line);
    if (meta["experiment"] == "control") {
      ControlRow r;
      r.level = std::stoi(f.at(0));
      r.h = std::stod(f.at(1));
      r.n_elem = std::stol(f.at(2));
      r.n_dof_total = std::stol(f.at(3));
      r.n_dof_boundary = std::stol(f.at(4));
      if (f.at(5).empty()) {
        r.failed = true;
      } else {
        r.err_u = std::stod(f.at(5));
        r.eoc_u = parse_optional(f.at(6));
        r.err_y = std::stod(f.at(7));
        r.eoc_y = parse_optional(f.at(8));
        r.gmres_iters = std::stoi(f.at(9));
      }
      report.control_rows.push_back(r);
    } else {
      FluxRow r;
      r.level = std::stoi(f.at(0));
      r.h = std::stod(f.at(1));
      r.n_elem = std::stol(f.at(2));
      r.n_dof = std::stol(f.at(3));
      if (f.at(4).empty()) {
        r.failed = true;
      } else {
        r.err_classical = std::stod(f.at(4));
        r.eoc_classical = parse_optional(f.at(5));
        r.err_variational = std::stod(f.at(6));
        r.eoc_variational = parse_optional(f.at(7));
      }
      report.flux_rows.push_back(r);
    }
  }

  report.config.experiment = meta["experiment"] == "control" ? Experiment::control : Experiment::flux;
  if (meta.count("omega_degrees")) report.config.omega_degrees = std::stod(meta["omega_degrees"]);
  if (meta.count("lambda_bar")) report.lambda_bar = std::stod(meta["lambda_bar"]);
  if (meta.count("alpha")) report.config.alpha = std::stod(meta["alpha"]);
  if (meta.count("grading"))
    report.config.grading = meta["grading"] == "quasi_uniform" ? GradingMode::quasi_uniform
                                                               : GradingMode::boundary_concentrated;
  if (meta.count("generated_at")) report.generated_at = meta["generated_at"];
  if (!report.flux_rows.empty()) {
    report.config.level_min = report.flux_rows.front().level;
    report.config.level_max = report.flux_rows.back().level;
  } else if (!report.control_rows.empty()) {
    report.config.level_min = report.control_rows.front().level;
    report.config.level_max = report.control_rows.back().level;
  }
  return report;
}

ExperimentReport parse_report_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open report file: " + path);
  return parse_report(in);
}

}  // namespace fluxfem
