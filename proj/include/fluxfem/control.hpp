#pragma once

#include <memory>
#include <utility>

#include "fluxfem/fem.hpp"
#include "fluxfem/flux.hpp"
#include "fluxfem/krylov.hpp"
#include "fluxfem/manufactured.hpp"

namespace fluxfem {

struct ControlProblem {
  std::shared_ptr<const Mesh> mesh;
  double alpha = 1.0;
  ScalarField f_state;
  ScalarField y_desired;
};

struct ControlSolution {
  BoundaryFunction u_h;
  FeFunction y_h;
  FeFunction p_h;
  GmresResult krylov;
  double optimality_residual = 0.0;  // ||alpha M u - M d|| / ||M d||
  double state_residual = 0.0;       // interior residual norms of the final triple
  double adjoint_residual = 0.0;
};

/// Poisson solve with trace g and source f; with f = 0 this is the discrete
/// harmonic extension (the energy-minimal extension of g).
FeFunction discrete_harmonic_extension(std::shared_ptr<const Mesh> mesh, const BoundaryFunction& g,
                                       const ScalarField& f = zero_field());

/// L2(Gamma)-projection onto the trace space.
BoundaryFunction l2_boundary_projection(std::shared_ptr<const Mesh> mesh, const BoundaryField& v);

/// Variational normal derivative of the adjoint state:
///   (d, v_h)_Gamma = (grad v_h, grad p_h) - (y_h - y_d, v_h)  for all v_h.
/// Interior rows of the defining residual must vanish; a violation means the
/// pair (p_h, y_h) is not an adjoint/state pair and throws.
BoundaryFunction adjoint_flux(std::shared_ptr<const Mesh> mesh, const FeFunction& p_h,
                              const FeFunction& y_h, const ScalarField& y_desired);

/// Reduced optimality operator u -> alpha M_Gamma u - (linearized adjoint-flux
/// moment). Symmetric positive definite; exposed for the solver and for the
/// spectral consistency probes in the tests.
class ReducedControlOperator {
 public:
  ReducedControlOperator(std::shared_ptr<const Mesh> mesh, double alpha);

  /// Linear part: the affine contribution of (f_state, y_desired) is split off
  /// by affine_rhs so Krylov iterations see an exactly linear map.
  Vector apply(const Vector& u) const;

  /// Right-hand side: boundary moment of the adjoint flux at u = 0.
  Vector affine_rhs(const ScalarField& f_state, const ScalarField& y_desired) const;

  const SpMat& boundary_mass() const { return boundary_mass_; }
  const PoissonOperator& poisson() const { return *poisson_; }
  double alpha() const { return alpha_; }

  /// Boundary rows of K p - rhs_adj for the state/adjoint pair generated by u.
  Vector adjoint_flux_moment(const Vector& u, const Vector& load_state,
                             const Vector& load_desired, FeFunction* y_out = nullptr,
                             FeFunction* p_out = nullptr) const;

 private:
  std::shared_ptr<const Mesh> mesh_;
  double alpha_;
  std::shared_ptr<PoissonOperator> poisson_;
  SpMat boundary_mass_;
};

/// Solves the discrete optimality system by restarted GMRES on the reduced
/// control equation; inner Poisson solves reuse one sparse factorization.
ControlSolution solve_control(const ControlProblem& problem, const GmresOptions& opts = {});

/// (||u - u_h||_{L2(Gamma)}, ||y - y_h||_{L2(Omega)}) against the benchmark.
std::pair<double, double> control_errors(const ControlSolution& sol,
                                         const ControlBenchmark& bench);

/// Element-wise L2(Omega) error of a finite element function against a field.
double l2_error(const Mesh& mesh, const FeFunction& u, const ScalarField& exact,
                const QuadratureRule& quad = QuadratureRule::degree4(),
                const QuadratureRule& corner_quad = QuadratureRule::degree10());

}  // namespace fluxfem
