#include <pybind11/eigen.h>
#include <pybind11/functional.h>
#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <memory>
#include <sstream>

#include "fluxfem/control.hpp"
#include "fluxfem/fem.hpp"
#include "fluxfem/flux.hpp"
#include "fluxfem/manufactured.hpp"
#include "fluxfem/mesh.hpp"
#include "fluxfem/study.hpp"

namespace py = pybind11;
using namespace fluxfem;

namespace {

GradingMode grading_from_string(const std::string& s) {
  if (s == "boundary_concentrated") return GradingMode::boundary_concentrated;
  if (s == "quasi_uniform") return GradingMode::quasi_uniform;
  throw std::invalid_argument("unknown grading mode: " + s);
}

py::array_t<double> vertices_array(const Mesh& mesh) {
  py::array_t<double> arr({mesh.n_vertices(), 2});
  auto a = arr.mutable_unchecked<2>();
  for (int i = 0; i < mesh.n_vertices(); ++i) {
    a(i, 0) = mesh.vertices[i].x;
    a(i, 1) = mesh.vertices[i].y;
  }
  return arr;
}

py::array_t<int> triangles_array(const Mesh& mesh) {
  py::array_t<int> arr({mesh.n_triangles(), 3});
  auto a = arr.mutable_unchecked<2>();
  for (int t = 0; t < mesh.n_triangles(); ++t)
    for (int i = 0; i < 3; ++i) a(t, i) = mesh.triangles[t].v[i];
  return arr;
}

BoundaryField wrap_boundary_field(const py::object& f) {
  return [f](const Vec2& p, const Vec2& n) {
    return f(p.x, p.y, n.x, n.y).cast<double>();
  };
}

py::dict report_to_dict(const ExperimentReport& report) {
  py::dict d;
  d["experiment"] = report.config.experiment == Experiment::flux ? "flux" : "control";
  d["omega_degrees"] = report.config.omega_degrees;
  d["lambda_bar"] = report.lambda_bar;
  d["grading"] = report.config.grading == GradingMode::boundary_concentrated
                     ? "boundary_concentrated"
                     : "quasi_uniform";
  py::list rows;
  for (const auto& r : report.flux_rows) {
    py::dict row;
    row["level"] = r.level;
    row["h"] = r.h;
    row["n_elem"] = r.n_elem;
    row["n_dof"] = r.n_dof;
    row["failed"] = r.failed;
    if (!r.failed) {
      row["err_classical"] = r.err_classical;
      row["err_variational"] = r.err_variational;
      if (r.eoc_classical) row["eoc_classical"] = *r.eoc_classical;
      if (r.eoc_variational) row["eoc_variational"] = *r.eoc_variational;
      row["compatibility_residual"] = r.compatibility_residual;
    }
    rows.append(row);
  }
  for (const auto& r : report.control_rows) {
    py::dict row;
    row["level"] = r.level;
    row["h"] = r.h;
    row["n_elem"] = r.n_elem;
    row["n_dof_total"] = r.n_dof_total;
    row["n_dof_boundary"] = r.n_dof_boundary;
    row["failed"] = r.failed;
    if (!r.failed) {
      row["err_u"] = r.err_u;
      row["err_y"] = r.err_y;
      if (r.eoc_u) row["eoc_u"] = *r.eoc_u;
      if (r.eoc_y) row["eoc_y"] = *r.eoc_y;
      row["gmres_iters"] = r.gmres_iters;
      row["optimality_residual"] = r.optimality_residual;
    }
    rows.append(row);
  }
  d["rows"] = rows;
  return d;
}

ExperimentConfig make_config(Experiment experiment, double omega_degrees, int level_min,
                             int level_max, const std::string& grading, double alpha) {
  ExperimentConfig config;
  config.experiment = experiment;
  config.omega_degrees = omega_degrees;
  config.level_min = level_min;
  config.level_max = level_max;
  config.grading = grading_from_string(grading);
  config.alpha = alpha;
  return config;
}

}  // namespace

PYBIND11_MODULE(_fluxfem, m) {
  m.doc() = "Linear FEM on boundary-concentrated meshes";

  py::class_<SectorDomain>(m, "SectorDomain")
      .def_readonly("omega", &SectorDomain::omega)
      .def_readonly("lambda_bar", &SectorDomain::lambda_bar)
      .def_property_readonly("corner_list",
                             [](const SectorDomain& d) {
                               py::list out;
                               for (const Vec2& c : d.corner_list)
                                 out.append(py::make_tuple(c.x, c.y));
                               return out;
                             })
      .def("area", &SectorDomain::area)
      .def("boundary_length", &SectorDomain::boundary_length)
      .def("distance_to_boundary",
           [](const SectorDomain& d, double x, double y) { return d.distance_to_boundary({x, y}); });

  m.def("sector_domain", &make_sector_domain, py::arg("omega"));

  py::class_<Mesh, std::shared_ptr<Mesh>>(m, "Mesh")
      .def_property_readonly("n_vertices", &Mesh::n_vertices)
      .def_property_readonly("n_triangles", &Mesh::n_triangles)
      .def_property_readonly("n_boundary_vertices", &Mesh::n_boundary_vertices)
      .def_readonly("level_h", &Mesh::level_h)
      .def_readonly("domain", &Mesh::domain)
      .def_property_readonly("vertices", &vertices_array)
      .def_property_readonly("triangles", &triangles_array)
      .def_property_readonly("refinement_edges",
                             [](const Mesh& mesh) {
                               std::vector<int> r(mesh.triangles.size());
                               for (std::size_t t = 0; t < mesh.triangles.size(); ++t)
                                 r[t] = mesh.triangles[t].ref_edge;
                               return r;
                             })
      .def_property_readonly("boundary_vertices",
                             [](const Mesh& mesh) { return mesh.boundary_vertices; })
      .def_property_readonly("boundary_edges",
                             [](const Mesh& mesh) {
                               py::list out;
                               for (const BoundaryEdge& e : mesh.boundary_edges)
                                 out.append(py::make_tuple(e.a, e.b));
                               return out;
                             })
      .def("triangle_area", &Mesh::triangle_area)
      .def("triangle_diameter", &Mesh::triangle_diameter)
      .def("total_area",
           [](const Mesh& mesh) {
             double a = 0.0;
             for (int t = 0; t < mesh.n_triangles(); ++t) a += mesh.triangle_area(t);
             return a;
           })
      .def("dump", [](const Mesh& mesh, const std::string& path) { dump_mesh(mesh, path); })
      .def("__repr__", [](const Mesh& mesh) {
        std::ostringstream os;
        os << "<Mesh h=" << mesh.level_h << " triangles=" << mesh.n_triangles()
           << " vertices=" << mesh.n_vertices() << ">";
        return os.str();
      });

  m.def(
      "initial_mesh",
      [](double omega) { return std::make_shared<Mesh>(initial_mesh(make_sector_domain(omega))); },
      py::arg("omega"));
  m.def(
      "bisect",
      [](const std::shared_ptr<Mesh>& mesh, const std::vector<int>& marked) {
        return std::make_shared<Mesh>(bisect(*mesh, marked));
      },
      py::arg("mesh"), py::arg("marked"));
  m.def(
      "refine_graded",
      [](const std::shared_ptr<Mesh>& mesh, double h_target, const std::string& grading,
         double c_upper) {
        GradingPolicy policy;
        policy.mode = grading_from_string(grading);
        policy.h_target = h_target;
        policy.c_upper = c_upper;
        return std::make_shared<Mesh>(refine_graded(*mesh, policy));
      },
      py::arg("mesh"), py::arg("h_target"), py::arg("grading") = "boundary_concentrated",
      py::arg("c_upper") = 1.0);
  m.def(
      "element_distance_to_boundary",
      [](const std::shared_ptr<Mesh>& mesh, int t) { return element_distance_to_boundary(*mesh, t); },
      py::arg("mesh"), py::arg("t"));

  py::class_<FeFunction>(m, "FeFunction")
      .def_property_readonly("values", [](const FeFunction& u) { return u.values; })
      .def_property_readonly("mesh", [](const FeFunction& u) {
        return std::const_pointer_cast<Mesh>(u.mesh);
      });

  py::class_<EdgeFlux>(m, "EdgeFlux")
      .def_property_readonly("per_edge", [](const EdgeFlux& f) { return f.per_edge; });

  py::class_<BoundaryFunction>(m, "BoundaryFunction")
      .def_property_readonly("values", [](const BoundaryFunction& f) { return f.values; });

  m.def(
      "solve_dirichlet",
      [](const std::shared_ptr<Mesh>& mesh, const ScalarField& f, const ScalarField& g) {
        PoissonOperator op(mesh);
        return op.solve_field(f, boundary_values_from_field(*mesh, g));
      },
      py::arg("mesh"), py::arg("f"), py::arg("g"),
      "P1 Poisson solve with Dirichlet data g evaluated at boundary vertices");

  m.def(
      "classical_flux",
      [](const std::shared_ptr<Mesh>& mesh, const FeFunction& u) {
        return classical_flux(std::shared_ptr<const Mesh>(mesh), u);
      },
      py::arg("mesh"), py::arg("u"));

  m.def(
      "variational_flux",
      [](const std::shared_ptr<Mesh>& mesh, const FeFunction& u, const ScalarField& f) {
        return variational_flux(*mesh, u, f);
      },
      py::arg("mesh"), py::arg("u"), py::arg("f"));

  m.def(
      "flux_error_l2",
      [](const std::shared_ptr<Mesh>& mesh, const EdgeFlux& approx, const py::object& exact) {
        return flux_error_l2(*mesh, approx, wrap_boundary_field(exact));
      },
      py::arg("mesh"), py::arg("approx"), py::arg("exact"),
      "exact is called as exact(x, y, nx, ny)");
  m.def(
      "flux_error_l2",
      [](const std::shared_ptr<Mesh>& mesh, const BoundaryFunction& approx,
         const py::object& exact) {
        return flux_error_l2(*mesh, approx, wrap_boundary_field(exact));
      },
      py::arg("mesh"), py::arg("approx"), py::arg("exact"));

  py::class_<FluxBenchmark>(m, "FluxBenchmark")
      .def_readonly("domain", &FluxBenchmark::domain)
      .def("u_exact", [](const FluxBenchmark& b, double x, double y) { return b.u_exact(x, y); })
      .def("f_rhs", [](const FluxBenchmark& b, double x, double y) { return b.f_rhs(x, y); })
      .def("grad_u",
           [](const FluxBenchmark& b, double x, double y) {
             const Vec2 g = b.grad_u(x, y);
             return py::make_tuple(g.x, g.y);
           })
      .def("flux_exact", [](const FluxBenchmark& b, double x, double y, double nx, double ny) {
        return b.flux_exact({x, y}, {nx, ny});
      });
  m.def("flux_bench", &flux_bench, py::arg("omega"));

  py::class_<ControlBenchmark>(m, "ControlBenchmark")
      .def_readonly("domain", &ControlBenchmark::domain)
      .def_readonly("alpha", &ControlBenchmark::alpha)
      .def("y_exact", [](const ControlBenchmark& b, double x, double y) { return b.y_exact(x, y); })
      .def("p_exact", [](const ControlBenchmark& b, double x, double y) { return b.p_exact(x, y); })
      .def("f_state", [](const ControlBenchmark& b, double x, double y) { return b.f_state(x, y); })
      .def("y_desired",
           [](const ControlBenchmark& b, double x, double y) { return b.y_desired(x, y); })
      .def("u_exact", [](const ControlBenchmark& b, double x, double y, double nx, double ny) {
        return b.u_exact({x, y}, {nx, ny});
      });
  m.def("control_bench", &control_bench, py::arg("omega"), py::arg("alpha") = 1.0);

  py::class_<ControlSolution>(m, "ControlSolution")
      .def_readonly("u_h", &ControlSolution::u_h)
      .def_readonly("y_h", &ControlSolution::y_h)
      .def_readonly("p_h", &ControlSolution::p_h)
      .def_readonly("optimality_residual", &ControlSolution::optimality_residual)
      .def_property_readonly("gmres_iters",
                             [](const ControlSolution& s) { return s.krylov.iterations; });

  m.def(
      "solve_control",
      [](const std::shared_ptr<Mesh>& mesh, double alpha, const ScalarField& f_state,
         const ScalarField& y_desired) {
        ControlProblem problem;
        problem.mesh = mesh;
        problem.alpha = alpha;
        problem.f_state = f_state;
        problem.y_desired = y_desired;
        return solve_control(problem);
      },
      py::arg("mesh"), py::arg("alpha"), py::arg("f_state"), py::arg("y_desired"));

  m.def(
      "control_errors",
      [](const ControlSolution& sol, const ControlBenchmark& bench) {
        return control_errors(sol, bench);
      },
      py::arg("solution"), py::arg("bench"));

  m.def(
      "run_flux_study",
      [](double omega_degrees, int level_min, int level_max, const std::string& grading) {
        return report_to_dict(run_flux_study(
            make_config(Experiment::flux, omega_degrees, level_min, level_max, grading, 1.0)));
      },
      py::arg("omega_degrees"), py::arg("level_min"), py::arg("level_max"),
      py::arg("grading") = "boundary_concentrated");

  m.def(
      "run_control_study",
      [](double omega_degrees, int level_min, int level_max, const std::string& grading,
         double alpha) {
        return report_to_dict(run_control_study(
            make_config(Experiment::control, omega_degrees, level_min, level_max, grading, alpha)));
      },
      py::arg("omega_degrees"), py::arg("level_min"), py::arg("level_max"),
      py::arg("grading") = "boundary_concentrated", py::arg("alpha") = 1.0);
}
