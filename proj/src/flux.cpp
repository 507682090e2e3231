#include "fluxfem/flux.hpp"

#include <Eigen/SparseCholesky>

#include <cmath>
#include <sstream>

#include "fluxfem/quadrature.hpp"

namespace fluxfem {

namespace {

// 5-point Gauss per edge; 10 points on the two edges meeting the reentrant
// corner, where the exact flux has an integrable pole.
const EdgeRule& edge_rule(const Mesh& mesh, const BoundaryEdge& be) {
  static const EdgeRule base = gauss_legendre_01(5);
  static const EdgeRule fine = gauss_legendre_01(10);
  if (mesh.is_reentrant_corner_vertex(be.a) || mesh.is_reentrant_corner_vertex(be.b)) return fine;
  return base;
}

Vec2 p1_gradient(const Mesh& mesh, const FeFunction& u, int t) {
  const auto& v = mesh.triangles[t].v;
  const Vec2 p0 = mesh.vertices[v[0]], p1 = mesh.vertices[v[1]], p2 = mesh.vertices[v[2]];
  const double inv2a = 1.0 / (2.0 * mesh.triangle_area(t));
  // grad phi_i = rot90(edge opposite i) / (2A)
  const Vec2 e0 = p2 - p1, e1 = p0 - p2, e2 = p1 - p0;
  const double c0 = u.values[v[0]] * inv2a, c1 = u.values[v[1]] * inv2a,
               c2 = u.values[v[2]] * inv2a;
  return {-(c0 * e0.y + c1 * e1.y + c2 * e2.y), c0 * e0.x + c1 * e1.x + c2 * e2.x};
}

}  // namespace

BoundaryFunction zero_boundary_function(std::shared_ptr<const Mesh> mesh) {
  BoundaryFunction bf;
  bf.values = Vector::Zero(mesh->n_boundary_vertices());
  bf.mesh = std::move(mesh);
  return bf;
}

EdgeFlux classical_flux(const Mesh& mesh, const FeFunction& u_h) {
  EdgeFlux flux;
  flux.mesh = u_h.mesh;
  flux.per_edge.resize(static_cast<Eigen::Index>(mesh.boundary_edges.size()));
  for (std::size_t e = 0; e < mesh.boundary_edges.size(); ++e) {
    const BoundaryEdge& be = mesh.boundary_edges[e];
    flux.per_edge[static_cast<Eigen::Index>(e)] = p1_gradient(mesh, u_h, be.tri).dot(be.normal);
  }
  return flux;
}

EdgeFlux classical_flux(std::shared_ptr<const Mesh> mesh, const FeFunction& u_h) {
  return classical_flux(*mesh, u_h);
}

SpMat boundary_mass_matrix(const Mesh& mesh) {
  const int n = mesh.n_boundary_vertices();
  std::vector<Eigen::Triplet<double>> trip;
  trip.reserve(4 * mesh.boundary_edges.size());
  for (const BoundaryEdge& be : mesh.boundary_edges) {
    const double len = (mesh.vertices[be.b] - mesh.vertices[be.a]).norm();
    const int ia = mesh.boundary_index[be.a];
    const int ib = mesh.boundary_index[be.b];
    trip.emplace_back(ia, ia, len / 3.0);
    trip.emplace_back(ib, ib, len / 3.0);
    trip.emplace_back(ia, ib, len / 6.0);
    trip.emplace_back(ib, ia, len / 6.0);
  }
  SpMat M(n, n);
  M.setFromTriplets(trip.begin(), trip.end());
  return M;
}

namespace {

BoundaryFunction variational_flux_impl(std::shared_ptr<const Mesh> mesh_ptr,
                                       const Vector& stiffness_times_u, const Vector& load) {
  const Mesh& mesh = *mesh_ptr;
  const Vector residual = stiffness_times_u - load;

  double interior_max = 0.0;
  for (int v = 0; v < mesh.n_vertices(); ++v) {
    if (!mesh.boundary_vertex_flags[v]) interior_max = std::max(interior_max, std::abs(residual[v]));
  }

  Vector r(mesh.n_boundary_vertices());
  for (int i = 0; i < mesh.n_boundary_vertices(); ++i) r[i] = residual[mesh.boundary_vertices[i]];

  if (interior_max > 1e-8 * std::max(1.0, r.norm()))
    throw std::runtime_error(
        "interior Galerkin residual too large for a variational flux; "
        "u_h does not solve the discrete problem for this f");

  const SpMat M = boundary_mass_matrix(mesh);
  Eigen::SimplicialLDLT<SpMat> chol(M);
  if (chol.info() != Eigen::Success) throw std::runtime_error("boundary mass factorization failed");
  BoundaryFunction d;
  d.mesh = std::move(mesh_ptr);
  d.values = chol.solve(r);
  const double res = (M * d.values - r).norm();
  if (res > 1e-12 * std::max(1.0, r.norm()))
    throw std::runtime_error("boundary mass solve missed its accuracy target");
  return d;
}

}  // namespace

BoundaryFunction variational_flux(const Mesh& mesh, const FeFunction& u_h, const ScalarField& f) {
  return variational_flux_impl(u_h.mesh, assemble_stiffness(mesh) * u_h.values,
                               assemble_load(mesh, f));
}

BoundaryFunction variational_flux(const PoissonOperator& op, const FeFunction& u_h,
                                  const Vector& load) {
  return variational_flux_impl(op.mesh_ptr(), op.apply_stiffness(u_h.values), load);
}

double flux_error_l2(const Mesh& mesh, const EdgeEvaluator& approx, const BoundaryField& exact) {
  double total = 0.0;
  for (std::size_t e = 0; e < mesh.boundary_edges.size(); ++e) {
    const BoundaryEdge& be = mesh.boundary_edges[e];
    const Vec2 a = mesh.vertices[be.a], b = mesh.vertices[be.b];
    const double len = (b - a).norm();
    const EdgeRule& rule = edge_rule(mesh, be);
    double acc = 0.0;
    for (std::size_t q = 0; q < rule.points.size(); ++q) {
      const double t = rule.points[q];
      const Vec2 p = a + t * (b - a);
      const double ex = exact(p, be.normal);
      if (!std::isfinite(ex)) {
        std::ostringstream msg;
        msg << "non-finite exact flux on boundary edge " << e << " at (" << p.x << ", " << p.y
            << ")";
        throw std::runtime_error(msg.str());
      }
      const double diff = approx(static_cast<int>(e), t) - ex;
      acc += rule.weights[q] * diff * diff;
    }
    total += len * acc;
  }
  return std::sqrt(total);
}

double flux_error_l2(const Mesh& mesh, const EdgeFlux& approx, const BoundaryField& exact) {
  return flux_error_l2(
      mesh, [&](int e, double) { return approx.per_edge[e]; }, exact);
}

double flux_error_l2(const Mesh& mesh, const BoundaryFunction& approx, const BoundaryField& exact) {
  return flux_error_l2(mesh,
                       [&](int e, double t) {
                         const BoundaryEdge& be = mesh.boundary_edges[e];
                         const double va = approx.values[mesh.boundary_index[be.a]];
                         const double vb = approx.values[mesh.boundary_index[be.b]];
                         return (1.0 - t) * va + t * vb;
                       },
                       exact);
}

double boundary_integral(const Mesh& mesh, const BoundaryFunction& v) {
  const SpMat M = boundary_mass_matrix(mesh);
  return (M * v.values).sum();
}

}  // namespace fluxfem
