#include "fluxfem/manufactured.hpp"

#include <cmath>
#include <stdexcept>

namespace fluxfem {

namespace {

constexpr double kPi = 3.14159265358979323846;

// Polar angle in [0, 2*pi) so the branch cut never crosses a sector with
// opening in [pi/2, 2*pi).
inline double polar_angle(double x, double y) {
  double phi = std::atan2(y, x);
  if (phi < 0.0) phi += 2.0 * kPi;
  return phi;
}

[[noreturn]] void reject_origin() {
  throw std::domain_error("field evaluation at the singular corner (0,0)");
}

// s = r^lambda sin(lambda*phi), harmonic; gradient from the derivative of
// the analytic power z^lambda.
struct Singular {
  double lambda;

  double value(double x, double y) const {
    const double r = std::hypot(x, y);
    if (r == 0.0) return 0.0;
    return std::pow(r, lambda) * std::sin(lambda * polar_angle(x, y));
  }
  Vec2 grad(double x, double y) const {
    const double r = std::hypot(x, y);
    if (r == 0.0) {
      if (lambda > 1.0) return {0.0, 0.0};
      reject_origin();
    }
    const double phi = polar_angle(x, y);
    const double c = lambda * std::pow(r, lambda - 1.0);
    return {c * std::sin((lambda - 1.0) * phi), c * std::cos((lambda - 1.0) * phi)};
  }
};

inline double gfac(double x, double y) { return (1.0 - x * x) * (1.0 - y * y); }
inline Vec2 grad_gfac(double x, double y) {
  return {-2.0 * x * (1.0 - y * y), -2.0 * y * (1.0 - x * x)};
}
inline double lap_gfac(double x, double y) { return -2.0 * (1.0 - y * y) - 2.0 * (1.0 - x * x); }

}  // namespace

FluxBenchmark flux_bench(double omega) {
  FluxBenchmark bench;
  bench.domain = make_sector_domain(omega);
  const Singular s{bench.domain.lambda_bar};

  bench.u_exact = [s](double x, double y) { return s.value(x, y) * gfac(x, y); };

  bench.grad_u = [s](double x, double y) -> Vec2 {
    const Vec2 gs = s.grad(x, y);
    const Vec2 gg = grad_gfac(x, y);
    const double sv = s.value(x, y), gv = gfac(x, y);
    return {gv * gs.x + sv * gg.x, gv * gs.y + sv * gg.y};
  };

  bench.f_rhs = [s](double x, double y) {
    const Vec2 gs = s.grad(x, y);
    const Vec2 gg = grad_gfac(x, y);
    return -(2.0 * gs.dot(gg) + s.value(x, y) * lap_gfac(x, y));
  };

  bench.flux_exact = [grad = bench.grad_u](const Vec2& p, const Vec2& n) {
    return grad(p.x, p.y).dot(n);
  };

  return bench;
}

ControlBenchmark control_bench(double omega, double alpha) {
  if (!(alpha > 0.0)) throw std::invalid_argument("regularization weight must be positive");

  ControlBenchmark bench;
  bench.domain = make_sector_domain(omega);
  bench.alpha = alpha;
  const Singular s{bench.domain.lambda_bar};
  const double lam = bench.domain.lambda_bar;

  bench.p_exact = [s, alpha](double x, double y) { return alpha * s.value(x, y) * gfac(x, y); };

  bench.grad_p = [s, alpha](double x, double y) -> Vec2 {
    const Vec2 gs = s.grad(x, y);
    const Vec2 gg = grad_gfac(x, y);
    const double sv = s.value(x, y), gv = gfac(x, y);
    return {alpha * (gv * gs.x + sv * gg.x), alpha * (gv * gs.y + sv * gg.y)};
  };

  auto lap_p = [s, alpha](double x, double y) {
    const Vec2 gs = s.grad(x, y);
    const Vec2 gg = grad_gfac(x, y);
    return alpha * (2.0 * gs.dot(gg) + s.value(x, y) * lap_gfac(x, y));
  };

  bench.y_exact = [s, lam](double x, double y) {
    const double r = std::hypot(x, y);
    if (r == 0.0 && lam <= 1.0) reject_origin();
    const double q = x * x + y * y - 2.0;
    return -lam * std::pow(r, lam - 1.0) * gfac(x, y) + 2.0 * s.value(x, y) * q;
  };

  // -Laplace(y) from the product rule around the radial factor; the harmonic
  // factor contributes only through x.grad(s) = lambda*s.
  bench.f_state = [s, lam](double x, double y) {
    const double r = std::hypot(x, y);
    if (r == 0.0) reject_origin();
    const double rpow = std::pow(r, lam - 3.0);
    const Vec2 gg = grad_gfac(x, y);
    const double xdotgg = x * gg.x + y * gg.y;
    return lam * (lam - 1.0) * (lam - 1.0) * rpow * gfac(x, y) +
           2.0 * lam * (lam - 1.0) * rpow * xdotgg +
           lam * rpow * r * r * lap_gfac(x, y) -
           8.0 * (lam + 1.0) * s.value(x, y);
  };

  bench.y_desired = [y = bench.y_exact, lap_p](double x, double y_) {
    return y(x, y_) + lap_p(x, y_);
  };

  bench.u_exact = [grad = bench.grad_p, alpha](const Vec2& p, const Vec2& n) {
    return grad(p.x, p.y).dot(n) / alpha;
  };

  return bench;
}

}  // namespace fluxfem
