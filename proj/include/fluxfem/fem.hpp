#pragma once

#include <Eigen/Sparse>
#include <Eigen/SparseCholesky>

#include <memory>
#include <optional>
#include <stdexcept>
#include <string>

#include "fluxfem/fields.hpp"
#include "fluxfem/mesh.hpp"
#include "fluxfem/quadrature.hpp"

namespace fluxfem {

using SpMat = Eigen::SparseMatrix<double>;
using Vector = Eigen::VectorXd;

class SolverError : public std::runtime_error {
 public:
  SolverError(const std::string& what, double achieved_residual, int iterations)
      : std::runtime_error(what), residual(achieved_residual), iterations(iterations) {}
  double residual;
  int iterations;
  std::vector<double> history;  // per-iteration residuals when available
};

/// Piecewise-linear function given by one coefficient per mesh vertex.
struct FeFunction {
  std::shared_ptr<const Mesh> mesh;
  Vector values;

  double evaluate(int tri, const std::array<double, 3>& bary) const;
};

/// Constrained Poisson system: stiffness restricted to interior vertices with
/// the Dirichlet columns moved to the right-hand side.
struct SparseSystem {
  SpMat matrix;                 // free x free, SPD
  Vector rhs;                   // free
  Vector dirichlet_values;      // one value per boundary vertex (mesh order)
  std::vector<int> free_index;  // vertex id -> free dof id, -1 if constrained
  std::vector<int> free_vertices;
};

/// Full vertex-indexed stiffness matrix, no constraints applied.
/// Throws on degenerate elements.
SpMat assemble_stiffness(const Mesh& mesh);

/// Full vertex-indexed mass matrix (exact for P1).
SpMat assemble_mass(const Mesh& mesh);

/// Load vector b_i = sum_T int_T f phi_i. Uses `quad` on every element except
/// those touching the origin corner, where `corner_quad` controls the error
/// from the singular factors of the benchmark data. Throws std::runtime_error
/// naming the element if f evaluates non-finite at a quadrature point.
Vector assemble_load(const Mesh& mesh, const ScalarField& f,
                     const QuadratureRule& quad = QuadratureRule::degree4(),
                     const QuadratureRule& corner_quad = QuadratureRule::degree10());

/// (f, phi_i) over all vertices plus the plain integral of f (same quadrature).
double integrate(const Mesh& mesh, const ScalarField& f,
                 const QuadratureRule& quad = QuadratureRule::degree4(),
                 const QuadratureRule& corner_quad = QuadratureRule::degree10());

SparseSystem build_dirichlet_system(const Mesh& mesh, const SpMat& stiffness,
                                    const Vector& load, const Vector& boundary_values);

struct CgResult {
  Vector x;
  int iterations = 0;
  double rel_residual = 0.0;
  bool converged = false;
};

/// Jacobi-preconditioned conjugate gradients;
/// stops at ||Ax-b|| <= rtol*||b||, iteration cap 20*sqrt(n) by default.
CgResult cg_solve(const SpMat& A, const Vector& b, double rtol = 1e-12, int max_iter = -1);

Vector dense_solve(const SpMat& A, const Vector& b);

enum class SolveBackend { automatic, cg, dense, ldlt };

/// Dirichlet data evaluated at boundary vertices.
Vector boundary_values_from_field(const Mesh& mesh, const ScalarField& g);

/// Poisson solve with u = g on Gamma. The residual contract
/// ||A u - b|| <= 1e-12 ||b|| holds on the interior block; violation throws
/// SolverError with the achieved residual. automatic uses the dense path
/// below 500 dofs and CG otherwise.
FeFunction solve_dirichlet(const Mesh& mesh, const ScalarField& f, const ScalarField& g,
                           SolveBackend backend = SolveBackend::automatic);

/// Stiffness-matrix product over all vertex dofs, no constraints.
Vector apply_stiffness(const Mesh& mesh, const FeFunction& u);

/// Assembles once and serves repeated solves on the same mesh. The sparse
/// factorization is computed lazily on the first ldlt solve and reused, which
/// is what makes the optimal-control iteration cheap.
class PoissonOperator {
 public:
  explicit PoissonOperator(std::shared_ptr<const Mesh> mesh);

  const Mesh& mesh() const { return *mesh_; }
  std::shared_ptr<const Mesh> mesh_ptr() const { return mesh_; }
  const SpMat& stiffness() const { return stiffness_; }
  const SpMat& mass() const { return mass_; }

  Vector apply_stiffness(const Vector& vertex_values) const { return stiffness_ * vertex_values; }
  Vector apply_mass(const Vector& vertex_values) const { return mass_ * vertex_values; }

  /// Solves the interior block given a full-length rhs vector (entries at
  /// boundary vertices are ignored) and per-boundary-vertex values.
  FeFunction solve(const Vector& rhs_full, const Vector& boundary_values,
                   SolveBackend backend = SolveBackend::automatic) const;

  FeFunction solve_field(const ScalarField& f, const Vector& boundary_values,
                         SolveBackend backend = SolveBackend::automatic) const;

  int last_iterations() const { return last_iterations_; }

 private:
  std::shared_ptr<const Mesh> mesh_;
  SpMat stiffness_;
  SpMat mass_;
  SpMat interior_;                 // free x free block
  std::vector<int> free_index_;
  std::vector<int> free_vertices_;
  mutable std::optional<Eigen::SimplicialLDLT<SpMat>> ldlt_;
  mutable int last_iterations_ = 0;
};

}  // namespace fluxfem
