#pragma once

#include "fluxfem/fields.hpp"
#include "fluxfem/geometry.hpp"

namespace fluxfem {

/// Exact data for the surface-flux benchmark
///   u = r^lambda sin(lambda phi) (1-x1^2)(1-x2^2),  lambda = pi/omega,
/// which vanishes on the whole sector boundary. The harmonic factor carries
/// the corner singularity; everything else is polynomial.
struct FluxBenchmark {
  SectorDomain domain;
  ScalarField u_exact;
  ScalarField f_rhs;        // -Laplace(u); behaves like r^(lambda-1) at the origin
  VectorField grad_u;
  BoundaryField flux_exact; // grad_u . n
};

FluxBenchmark flux_bench(double omega);

/// Exact data for the Dirichlet boundary control benchmark. The adjoint has
/// the same product structure as the flux benchmark's solution (scaled by
/// alpha so that alpha*u = dn p stays consistent for alpha != 1), the state is
///   y = -lambda r^(lambda-1) (1-x1^2)(1-x2^2)
///       + 2 r^lambda sin(lambda phi) (x1^2+x2^2-2),
/// whose trace on Gamma equals the optimal control.
struct ControlBenchmark {
  SectorDomain domain;
  double alpha = 1.0;
  ScalarField y_exact;
  ScalarField p_exact;
  ScalarField f_state;      // -Laplace(y); behaves like r^(lambda-3) at the origin
  ScalarField y_desired;    // y + Laplace(p)
  VectorField grad_p;
  BoundaryField u_exact;    // alpha^{-1} grad_p . n = trace of y
};

ControlBenchmark control_bench(double omega, double alpha = 1.0);

}  // namespace fluxfem
