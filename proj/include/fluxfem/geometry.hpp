#pragma once

#include <cmath>
#include <stdexcept>
#include <vector>

namespace fluxfem {

struct Vec2 {
  double x = 0.0;
  double y = 0.0;

  Vec2() = default;
  Vec2(double x_, double y_) : x(x_), y(y_) {}

  Vec2 operator+(const Vec2& o) const { return {x + o.x, y + o.y}; }
  Vec2 operator-(const Vec2& o) const { return {x - o.x, y - o.y}; }
  Vec2 operator*(double s) const { return {x * s, y * s}; }
  double dot(const Vec2& o) const { return x * o.x + y * o.y; }
  double cross(const Vec2& o) const { return x * o.y - y * o.x; }
  double norm() const { return std::hypot(x, y); }
};

inline Vec2 operator*(double s, const Vec2& v) { return v * s; }

/// Circular sector of opening angle omega clipped to the square (-1,1)^2.
/// The origin is the corner with the largest interior angle; its singular
/// exponent pi/omega drives every convergence rate in the benchmarks.
struct SectorDomain {
  double omega = 0.0;
  double lambda_bar = 0.0;              // pi / omega
  std::vector<Vec2> corner_list;        // counter-clockwise, corner_list[0] = origin

  double area() const;
  double boundary_length() const;

  /// Exact distance from p to the boundary polygon.
  double distance_to_boundary(const Vec2& p) const;

  /// True if the corner at the origin is reentrant (omega > pi).
  bool has_reentrant_corner() const { return omega > 3.14159265358979323846 + 1e-15; }
};

/// Builds Omega_omega for omega in [pi/2, 2*pi). Throws std::invalid_argument
/// outside that range.
SectorDomain make_sector_domain(double omega);

double point_segment_distance(const Vec2& p, const Vec2& a, const Vec2& b);

}  // namespace fluxfem
