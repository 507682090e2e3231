#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>
#include <sstream>

#include "fluxfem/study.hpp"

using namespace fluxfem;

namespace {

ExperimentReport random_report(std::mt19937& rng) {
  std::uniform_real_distribution<double> uni(0.0, 1.0);
  std::uniform_int_distribution<int> nrows(0, 6);
  std::uniform_int_distribution<int> coin(0, 1);

  ExperimentReport r;
  r.config.experiment = coin(rng) ? Experiment::control : Experiment::flux;
  r.config.omega_degrees = 90.0 + 270.0 * uni(rng);
  r.config.grading =
      coin(rng) ? GradingMode::quasi_uniform : GradingMode::boundary_concentrated;
  r.config.alpha = 0.1 + uni(rng);
  r.lambda_bar = 180.0 / r.config.omega_degrees;
  r.generated_at = "2024-01-01T00:00:00Z";
  const int n = nrows(rng);
  for (int i = 0; i < n; ++i) {
    if (r.config.experiment == Experiment::flux) {
      FluxRow row;
      row.level = 3 + i;
      row.h = std::ldexp(1.0, -row.level);
      row.n_elem = 100 + static_cast<long>(uni(rng) * 1e6);
      row.n_dof = row.n_elem / 2;
      row.failed = uni(rng) < 0.15;
      if (!row.failed) {
        row.err_classical = std::exp(-uni(rng) * 20);
        row.err_variational = std::exp(-uni(rng) * 20);
        if (i > 0 && coin(rng)) {
          row.eoc_classical = 4 * uni(rng);
          row.eoc_variational = 4 * uni(rng);
        }
      }
      r.flux_rows.push_back(row);
    } else {
      ControlRow row;
      row.level = 3 + i;
      row.h = std::ldexp(1.0, -row.level);
      row.n_elem = 100 + static_cast<long>(uni(rng) * 1e6);
      row.n_dof_total = row.n_elem / 2;
      row.n_dof_boundary = 64 << i;
      row.failed = uni(rng) < 0.15;
      if (!row.failed) {
        row.err_u = std::exp(-uni(rng) * 20);
        row.err_y = std::exp(-uni(rng) * 20);
        if (i > 0 && coin(rng)) {
          row.eoc_u = 4 * uni(rng);
          row.eoc_y = 4 * uni(rng);
        }
        row.gmres_iters = static_cast<int>(uni(rng) * 100);
      }
      r.control_rows.push_back(row);
    }
  }
  return r;
}

bool same_opt(const std::optional<double>& a, const std::optional<double>& b) {
  if (a.has_value() != b.has_value()) return false;
  return !a || *a == *b;
}

}  // namespace

TEST_CASE("eoc definition") {
  CHECK(eoc(4e-2, 1e-2) == doctest::Approx(2.0).epsilon(1e-15));
  CHECK(eoc(1.0, 0.5) == doctest::Approx(1.0).epsilon(1e-15));
}

TEST_CASE("empty report emits a header-only file") {
  ExperimentReport empty;
  empty.generated_at = "2024-01-01T00:00:00Z";
  std::ostringstream os;
  emit_report(empty, ReportFormat::csv, os);
  std::istringstream is(os.str());
  std::string line;
  int data_lines = 0, header_lines = 0;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    if (line[0] == '#') continue;
    if (line.rfind("level,", 0) == 0)
      ++header_lines;
    else
      ++data_lines;
  }
  CHECK(header_lines == 1);
  CHECK(data_lines == 0);
}

TEST_CASE("three-row report: three data lines and a blank first EOC") {
  ExperimentReport r;
  r.config.experiment = Experiment::flux;
  r.generated_at = "2024-01-01T00:00:00Z";
  for (int i = 0; i < 3; ++i) {
    FluxRow row;
    row.level = 4 + i;
    row.h = std::ldexp(1.0, -row.level);
    row.n_elem = 10 * (i + 1);
    row.n_dof = 5 * (i + 1);
    row.err_classical = 1.0 / (i + 1);
    row.err_variational = 2.0 / (i + 1);
    if (i > 0) {
      row.eoc_classical = 1.0;
      row.eoc_variational = 1.0;
    }
    r.flux_rows.push_back(row);
  }
  std::ostringstream os;
  emit_report(r, ReportFormat::csv, os);
  std::istringstream is(os.str());
  std::string line;
  std::vector<std::string> data;
  while (std::getline(is, line)) {
    if (!line.empty() && line[0] != '#' && line.rfind("level,", 0) != 0) data.push_back(line);
  }
  REQUIRE(data.size() == 3);
  // the first data row has an empty eoc field: ",," after the error column
  CHECK(data[0].find(",,") != std::string::npos);
  CHECK(data[1].find(",,") == std::string::npos);
}

TEST_CASE("csv round-trip is lossless") {
  std::mt19937 rng(123u);
  for (int trial = 0; trial < 60; ++trial) {
    const ExperimentReport r = random_report(rng);
    std::ostringstream os;
    emit_report(r, ReportFormat::csv, os);
    std::istringstream is(os.str());
    const ExperimentReport back = parse_report(is);

    CHECK(back.config.experiment == r.config.experiment);
    CHECK(back.config.omega_degrees == r.config.omega_degrees);
    CHECK(back.config.grading == r.config.grading);
    CHECK(back.lambda_bar == r.lambda_bar);
    CHECK(back.generated_at == r.generated_at);
    REQUIRE(back.flux_rows.size() == r.flux_rows.size());
    REQUIRE(back.control_rows.size() == r.control_rows.size());
    for (std::size_t i = 0; i < r.flux_rows.size(); ++i) {
      const FluxRow &a = r.flux_rows[i], &b = back.flux_rows[i];
      CHECK(a.level == b.level);
      CHECK(a.h == b.h);
      CHECK(a.n_elem == b.n_elem);
      CHECK(a.n_dof == b.n_dof);
      CHECK(a.failed == b.failed);
      if (!a.failed) {
        CHECK(a.err_classical == b.err_classical);
        CHECK(a.err_variational == b.err_variational);
        CHECK(same_opt(a.eoc_classical, b.eoc_classical));
        CHECK(same_opt(a.eoc_variational, b.eoc_variational));
      }
    }
    for (std::size_t i = 0; i < r.control_rows.size(); ++i) {
      const ControlRow &a = r.control_rows[i], &b = back.control_rows[i];
      CHECK(a.level == b.level);
      CHECK(a.h == b.h);
      CHECK(a.n_elem == b.n_elem);
      CHECK(a.n_dof_total == b.n_dof_total);
      CHECK(a.n_dof_boundary == b.n_dof_boundary);
      CHECK(a.failed == b.failed);
      if (!a.failed) {
        CHECK(a.err_u == b.err_u);
        CHECK(a.err_y == b.err_y);
        CHECK(same_opt(a.eoc_u, b.eoc_u));
        CHECK(same_opt(a.eoc_y, b.eoc_y));
        CHECK(a.gmres_iters == b.gmres_iters);
      }
    }
  }
}

TEST_CASE("flux study end to end on a small range") {
  ExperimentConfig config;
  config.experiment = Experiment::flux;
  config.omega_degrees = 90.0;
  config.level_min = 2;
  config.level_max = 3;
  const ExperimentReport report = run_flux_study(config);
  REQUIRE(report.flux_rows.size() == 2);
  CHECK(report.lambda_bar == doctest::Approx(2.0).epsilon(1e-15));
  for (const FluxRow& row : report.flux_rows) {
    CHECK(!row.failed);
    CHECK(row.n_elem > 0);
    CHECK(row.err_classical > 0.0);
    CHECK(row.compatibility_residual <= 1e-9);
    CHECK(row.audit.conforming);
    CHECK(row.audit.grading_violations == 0);
  }
  CHECK(!report.flux_rows[0].eoc_classical.has_value());
  CHECK(report.flux_rows[1].eoc_classical.has_value());

  // determinism: a second run reproduces the error columns exactly
  const ExperimentReport again = run_flux_study(config);
  for (std::size_t i = 0; i < report.flux_rows.size(); ++i) {
    CHECK(again.flux_rows[i].err_classical == report.flux_rows[i].err_classical);
    CHECK(again.flux_rows[i].err_variational == report.flux_rows[i].err_variational);
  }
}

TEST_CASE("parallel levels produce the sequential rows") {
  ExperimentConfig config;
  config.experiment = Experiment::flux;
  config.omega_degrees = 120.0;
  config.level_min = 2;
  config.level_max = 3;
  const ExperimentReport seq = run_flux_study(config);
  config.parallel_levels = true;
  const ExperimentReport par = run_flux_study(config);
  REQUIRE(par.flux_rows.size() == seq.flux_rows.size());
  for (std::size_t i = 0; i < seq.flux_rows.size(); ++i) {
    CHECK(par.flux_rows[i].level == seq.flux_rows[i].level);
    const double rel = std::abs(par.flux_rows[i].err_classical - seq.flux_rows[i].err_classical) /
                       seq.flux_rows[i].err_classical;
    CHECK(rel <= 1e-10);
  }
}

TEST_CASE("single level reports one row without EOC") {
  ExperimentConfig config;
  config.experiment = Experiment::control;
  config.omega_degrees = 120.0;
  config.level_min = 2;
  config.level_max = 2;
  const ExperimentReport report = run_control_study(config);
  REQUIRE(report.control_rows.size() == 1);
  CHECK(!report.control_rows[0].eoc_u.has_value());
  CHECK(!report.control_rows[0].failed);
}

TEST_CASE("memory guard turns a level into a failure row") {
  ExperimentConfig config;
  config.experiment = Experiment::flux;
  config.omega_degrees = 90.0;
  config.level_min = 3;
  config.level_max = 3;
  config.memory_guard_triangles = 10;
  const ExperimentReport report = run_flux_study(config);
  REQUIRE(report.flux_rows.size() == 1);
  CHECK(report.flux_rows[0].failed);
  CHECK(report.any_failed());
  CHECK(report.flux_rows[0].failure.find("memory guard") != std::string::npos);

  std::ostringstream os;
  emit_report(report, ReportFormat::csv, os);
  CHECK(os.str().find("failed:") != std::string::npos);
}
