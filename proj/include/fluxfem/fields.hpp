#pragma once

#include <functional>

#include "fluxfem/geometry.hpp"

namespace fluxfem {

using ScalarField = std::function<double(double, double)>;

/// Scalar data on the boundary; the outward unit normal of the edge under
/// evaluation is supplied so flux-type fields (grad u . n) fit the same slot.
using BoundaryField = std::function<double(const Vec2& point, const Vec2& normal)>;

using VectorField = std::function<Vec2(double, double)>;

inline ScalarField zero_field() {
  return [](double, double) { return 0.0; };
}

}  // namespace fluxfem
