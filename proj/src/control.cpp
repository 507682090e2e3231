#include "fluxfem/control.hpp"

#include <Eigen/SparseCholesky>

#include <cmath>
#include <sstream>

#include "fluxfem/quadrature.hpp"

namespace fluxfem {

namespace {

const EdgeRule& edge_rule_for(const Mesh& mesh, const BoundaryEdge& be) {
  static const EdgeRule base = gauss_legendre_01(5);
  static const EdgeRule fine = gauss_legendre_01(10);
  if (mesh.is_reentrant_corner_vertex(be.a) || mesh.is_reentrant_corner_vertex(be.b)) return fine;
  return base;
}

Vector restrict_to_boundary(const Mesh& mesh, const Vector& full) {
  Vector r(mesh.n_boundary_vertices());
  for (int i = 0; i < mesh.n_boundary_vertices(); ++i) r[i] = full[mesh.boundary_vertices[i]];
  return r;
}

double interior_max_abs(const Mesh& mesh, const Vector& full) {
  double m = 0.0;
  for (int v = 0; v < mesh.n_vertices(); ++v) {
    if (!mesh.boundary_vertex_flags[v]) m = std::max(m, std::abs(full[v]));
  }
  return m;
}

}  // namespace

FeFunction discrete_harmonic_extension(std::shared_ptr<const Mesh> mesh, const BoundaryFunction& g,
                                       const ScalarField& f) {
  PoissonOperator op(std::move(mesh));
  return op.solve_field(f, g.values);
}

BoundaryFunction l2_boundary_projection(std::shared_ptr<const Mesh> mesh_ptr,
                                        const BoundaryField& v) {
  const Mesh& mesh = *mesh_ptr;
  Vector m = Vector::Zero(mesh.n_boundary_vertices());
  for (const BoundaryEdge& be : mesh.boundary_edges) {
    const Vec2 a = mesh.vertices[be.a], b = mesh.vertices[be.b];
    const double len = (b - a).norm();
    const EdgeRule& rule = edge_rule_for(mesh, be);
    double ma = 0.0, mb = 0.0;
    for (std::size_t q = 0; q < rule.points.size(); ++q) {
      const double t = rule.points[q];
      const double val = v(a + t * (b - a), be.normal);
      ma += rule.weights[q] * val * (1.0 - t);
      mb += rule.weights[q] * val * t;
    }
    m[mesh.boundary_index[be.a]] += len * ma;
    m[mesh.boundary_index[be.b]] += len * mb;
  }

  const SpMat M = boundary_mass_matrix(mesh);
  Eigen::SimplicialLDLT<SpMat> chol(M);
  BoundaryFunction q;
  q.mesh = std::move(mesh_ptr);
  q.values = chol.solve(m);
  return q;
}

BoundaryFunction adjoint_flux(std::shared_ptr<const Mesh> mesh_ptr, const FeFunction& p_h,
                              const FeFunction& y_h, const ScalarField& y_desired) {
  const Mesh& mesh = *mesh_ptr;
  const SpMat K = assemble_stiffness(mesh);
  const SpMat M = assemble_mass(mesh);
  const Vector rhs_adj = M * y_h.values - assemble_load(mesh, y_desired);
  const Vector residual = K * p_h.values - rhs_adj;

  const Vector r = restrict_to_boundary(mesh, residual);
  const double interior = interior_max_abs(mesh, residual);
  if (interior > 1e-10 * std::max({1.0, r.norm(), rhs_adj.norm()}))
    throw std::runtime_error("inconsistent adjoint/state pair: interior rows do not vanish");

  const SpMat Mb = boundary_mass_matrix(mesh);
  Eigen::SimplicialLDLT<SpMat> chol(Mb);
  BoundaryFunction d;
  d.mesh = std::move(mesh_ptr);
  d.values = chol.solve(r);
  return d;
}

ReducedControlOperator::ReducedControlOperator(std::shared_ptr<const Mesh> mesh, double alpha)
    : mesh_(std::move(mesh)),
      alpha_(alpha),
      poisson_(std::make_shared<PoissonOperator>(mesh_)),
      boundary_mass_(boundary_mass_matrix(*mesh_)) {}

Vector ReducedControlOperator::adjoint_flux_moment(const Vector& u, const Vector& load_state,
                                                   const Vector& load_desired, FeFunction* y_out,
                                                   FeFunction* p_out) const {
  const Mesh& mesh = *mesh_;
  FeFunction y = poisson_->solve(load_state, u, SolveBackend::ldlt);
  const Vector rhs_adj = poisson_->apply_mass(y.values) - load_desired;
  FeFunction p = poisson_->solve(rhs_adj, Vector::Zero(mesh.n_boundary_vertices()),
                                 SolveBackend::ldlt);
  const Vector residual = poisson_->apply_stiffness(p.values) - rhs_adj;
  Vector r = restrict_to_boundary(mesh, residual);
  if (y_out) *y_out = std::move(y);
  if (p_out) *p_out = std::move(p);
  return r;
}

Vector ReducedControlOperator::apply(const Vector& u) const {
  const Vector zero = Vector::Zero(mesh_->n_vertices());
  const Vector r = adjoint_flux_moment(u, zero, zero);
  return alpha_ * (boundary_mass_ * u) - r;
}

Vector ReducedControlOperator::affine_rhs(const ScalarField& f_state,
                                          const ScalarField& y_desired) const {
  const Vector load_state = assemble_load(*mesh_, f_state);
  const Vector load_desired = assemble_load(*mesh_, y_desired);
  const Vector u0 = Vector::Zero(mesh_->n_boundary_vertices());
  return adjoint_flux_moment(u0, load_state, load_desired);
}

ControlSolution solve_control(const ControlProblem& problem, const GmresOptions& opts) {
  const auto& mesh_ptr = problem.mesh;
  const Mesh& mesh = *mesh_ptr;
  if (!(problem.alpha > 0.0)) throw std::invalid_argument("alpha must be positive");

  ReducedControlOperator reduced(mesh_ptr, problem.alpha);
  const Vector load_state = assemble_load(mesh, problem.f_state);
  const Vector load_desired = assemble_load(mesh, problem.y_desired);
  const Vector b =
      reduced.adjoint_flux_moment(Vector::Zero(mesh.n_boundary_vertices()), load_state,
                                  load_desired);

  GmresResult krylov = gmres([&](const Vector& u) { return reduced.apply(u); }, b, opts);
  if (!krylov.converged) {
    std::ostringstream msg;
    msg << "gmres stagnated after " << krylov.iterations << " iterations (residual "
        << krylov.rel_residual << ")";
    SolverError err(msg.str(), krylov.rel_residual, krylov.iterations);
    err.history = krylov.history;
    throw err;
  }

  ControlSolution sol;
  sol.krylov = std::move(krylov);
  sol.u_h.mesh = mesh_ptr;
  sol.u_h.values = sol.krylov.x;

  const Vector r = reduced.adjoint_flux_moment(sol.u_h.values, load_state, load_desired, &sol.y_h,
                                               &sol.p_h);
  const Vector opt_residual = problem.alpha * (reduced.boundary_mass() * sol.u_h.values) - r;
  const double rnorm = r.norm();
  sol.optimality_residual = rnorm > 0.0 ? opt_residual.norm() / rnorm : opt_residual.norm();
  if (rnorm > 0.0 && sol.optimality_residual > 1e-9)
    throw SolverError("optimality residual above contract", sol.optimality_residual,
                      sol.krylov.iterations);

  // relative interior residuals of the final triple, for the consistency checks
  auto interior_norm = [&](const Vector& full) {
    double acc = 0.0;
    for (int v = 0; v < mesh.n_vertices(); ++v) {
      if (!mesh.boundary_vertex_flags[v]) acc += full[v] * full[v];
    }
    return std::sqrt(acc);
  };
  const Vector state_res = reduced.poisson().apply_stiffness(sol.y_h.values) - load_state;
  const Vector adj_rhs = reduced.poisson().apply_mass(sol.y_h.values) - load_desired;
  const Vector adjoint_res = reduced.poisson().apply_stiffness(sol.p_h.values) - adj_rhs;
  sol.state_residual = interior_norm(state_res) / std::max(1e-300, load_state.norm());
  sol.adjoint_residual = interior_norm(adjoint_res) / std::max(1e-300, adj_rhs.norm());
  return sol;
}

std::pair<double, double> control_errors(const ControlSolution& sol,
                                         const ControlBenchmark& bench) {
  const Mesh& mesh = *sol.u_h.mesh;
  const double err_u = flux_error_l2(mesh, sol.u_h, bench.u_exact);
  const double err_y = l2_error(mesh, sol.y_h, bench.y_exact);
  return {err_u, err_y};
}

double l2_error(const Mesh& mesh, const FeFunction& u, const ScalarField& exact,
                const QuadratureRule& quad, const QuadratureRule& corner_quad) {
  const int origin = mesh.origin_vertex();
  double total = 0.0;
  for (int t = 0; t < mesh.n_triangles(); ++t) {
    const auto& v = mesh.triangles[t].v;
    const Vec2 p0 = mesh.vertices[v[0]], p1 = mesh.vertices[v[1]], p2 = mesh.vertices[v[2]];
    const bool corner = v[0] == origin || v[1] == origin || v[2] == origin;
    const QuadratureRule& rule = corner ? corner_quad : quad;
    const double area = mesh.triangle_area(t);
    double acc = 0.0;
    for (std::size_t q = 0; q < rule.points.size(); ++q) {
      const auto& l = rule.points[q];
      const double x = l[0] * p0.x + l[1] * p1.x + l[2] * p2.x;
      const double y = l[0] * p0.y + l[1] * p1.y + l[2] * p2.y;
      const double uh = l[0] * u.values[v[0]] + l[1] * u.values[v[1]] + l[2] * u.values[v[2]];
      const double diff = uh - exact(x, y);
      acc += rule.weights[q] * diff * diff;
    }
    total += area * acc;
  }
  return std::sqrt(total);
}

}  // namespace fluxfem
