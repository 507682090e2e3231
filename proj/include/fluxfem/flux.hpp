#pragma once

#include <memory>

#include "fluxfem/fem.hpp"
#include "fluxfem/fields.hpp"
#include "fluxfem/mesh.hpp"

namespace fluxfem {

/// Elementwise-constant normal derivative, one value per boundary edge
/// (order of mesh.boundary_edges).
struct EdgeFlux {
  std::shared_ptr<const Mesh> mesh;
  Vector per_edge;
};

/// Member of the boundary trace space: one coefficient per boundary vertex
/// (order of mesh.boundary_vertices).
struct BoundaryFunction {
  std::shared_ptr<const Mesh> mesh;
  Vector values;
};

BoundaryFunction zero_boundary_function(std::shared_ptr<const Mesh> mesh);

/// grad(u_h)|_T . n per boundary edge.
EdgeFlux classical_flux(const Mesh& mesh, const FeFunction& u_h);
EdgeFlux classical_flux(std::shared_ptr<const Mesh> mesh, const FeFunction& u_h);

/// Boundary mass matrix over trace dofs; per-edge block (|E|/6) [[2,1],[1,2]].
SpMat boundary_mass_matrix(const Mesh& mesh);

/// Trace-space normal derivative d defined by
///   (d, w_h)_Gamma = (grad u_h, grad w_h) - (f, w_h)   for all w_h,
/// realized as the boundary mass solve against the boundary rows of
/// K u_h - b(f). Interior rows are verified to vanish (they do whenever u_h
/// is the Galerkin solution for f); gross violations throw.
BoundaryFunction variational_flux(const Mesh& mesh, const FeFunction& u_h, const ScalarField& f);

/// Same computation reusing an assembled operator and load vector.
BoundaryFunction variational_flux(const PoissonOperator& op, const FeFunction& u_h,
                                  const Vector& load);

/// Evaluation of a flux approximation along one boundary edge; t in [0,1] is
/// the parameter from edge.a to edge.b.
using EdgeEvaluator = std::function<double(int edge_index, double t)>;

/// sqrt( sum_E int_E (approx - exact)^2 ds ) with Gauss quadrature per edge;
/// edges touching a reentrant corner get a finer rule since the exact flux may
/// blow up there. Non-finite exact values throw, naming the edge.
double flux_error_l2(const Mesh& mesh, const EdgeEvaluator& approx, const BoundaryField& exact);
double flux_error_l2(const Mesh& mesh, const EdgeFlux& approx, const BoundaryField& exact);
double flux_error_l2(const Mesh& mesh, const BoundaryFunction& approx, const BoundaryField& exact);

/// int_Gamma of a trace-space function (exact, via the boundary mass matrix).
double boundary_integral(const Mesh& mesh, const BoundaryFunction& v);

}  // namespace fluxfem
