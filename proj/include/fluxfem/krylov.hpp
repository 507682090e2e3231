#pragma once

#include <functional>
#include <vector>

#include "fluxfem/fem.hpp"

namespace fluxfem {

struct GmresOptions {
  int restart = 50;
  double rtol = 1e-10;
  int max_iter = 500;
};

struct GmresResult {
  Vector x;
  int iterations = 0;
  double rel_residual = 0.0;
  bool converged = false;
  std::vector<double> history;  // residual norm after each iteration
};

/// Restarted GMRES with Givens rotations for a matrix given as a callback.
GmresResult gmres(const std::function<Vector(const Vector&)>& apply, const Vector& b,
                  const GmresOptions& opts = {});

}  // namespace fluxfem
