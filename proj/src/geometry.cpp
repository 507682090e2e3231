#include "fluxfem/geometry.hpp"

#include <algorithm>
#include <cmath>

namespace fluxfem {

namespace {
constexpr double kPi = 3.14159265358979323846;
}

double point_segment_distance(const Vec2& p, const Vec2& a, const Vec2& b) {
  const Vec2 ab = b - a;
  const double len2 = ab.dot(ab);
  if (len2 == 0.0) return (p - a).norm();
  double t = (p - a).dot(ab) / len2;
  t = std::clamp(t, 0.0, 1.0);
  return (p - (a + t * ab)).norm();
}

double SectorDomain::area() const {
  double twice = 0.0;
  const std::size_t n = corner_list.size();
  for (std::size_t i = 0; i < n; ++i) {
    const Vec2& a = corner_list[i];
    const Vec2& b = corner_list[(i + 1) % n];
    twice += a.cross(b);
  }
  return 0.5 * twice;
}

double SectorDomain::boundary_length() const {
  double len = 0.0;
  const std::size_t n = corner_list.size();
  for (std::size_t i = 0; i < n; ++i)
    len += (corner_list[(i + 1) % n] - corner_list[i]).norm();
  return len;
}

double SectorDomain::distance_to_boundary(const Vec2& p) const {
  double d = std::numeric_limits<double>::infinity();
  const std::size_t n = corner_list.size();
  for (std::size_t i = 0; i < n; ++i)
    d = std::min(d, point_segment_distance(p, corner_list[i], corner_list[(i + 1) % n]));
  return d;
}

SectorDomain make_sector_domain(double omega) {
  if (!(omega >= kPi / 2 - 1e-12 && omega < 2 * kPi)) {
    throw std::invalid_argument("sector angle must lie in [pi/2, 2*pi)");
  }

  SectorDomain dom;
  dom.omega = omega;
  dom.lambda_bar = kPi / omega;

  // Walk the square boundary CCW from (1,0) and keep the corners of (-1,1)^2
  // that lie strictly inside the angular range, then close with the point
  // where the ray phi = omega leaves the square.
  const Vec2 square_corners[4] = {{1, 1}, {-1, 1}, {-1, -1}, {1, -1}};
  const double corner_angles[4] = {kPi / 4, 3 * kPi / 4, 5 * kPi / 4, 7 * kPi / 4};

  dom.corner_list.push_back({0, 0});
  dom.corner_list.push_back({1, 0});
  for (int i = 0; i < 4; ++i) {
    if (corner_angles[i] < omega - 1e-12) dom.corner_list.push_back(square_corners[i]);
  }

  const double c = std::cos(omega), s = std::sin(omega);
  const double scale = 1.0 / std::max(std::abs(c), std::abs(s));
  Vec2 exit{c * scale, s * scale};
  // snap onto the square so later point-on-segment checks are exact
  if (std::abs(std::abs(exit.x) - 1.0) < 1e-14) exit.x = exit.x > 0 ? 1.0 : -1.0;
  if (std::abs(std::abs(exit.y) - 1.0) < 1e-14) exit.y = exit.y > 0 ? 1.0 : -1.0;
  if (std::abs(exit.x) < 1e-14) exit.x = 0.0;
  if (std::abs(exit.y) < 1e-14) exit.y = 0.0;
  if ((exit - dom.corner_list.back()).norm() > 1e-12) dom.corner_list.push_back(exit);

  return dom;
}

}  // namespace fluxfem
