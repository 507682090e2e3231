#include "fluxfem/quadrature.hpp"

#include <cmath>
#include <stdexcept>

namespace fluxfem {

namespace {

void push_orbit3(QuadratureRule& r, double w, double a) {
  const double c = 1.0 - 2.0 * a;
  r.points.push_back({a, a, c});
  r.points.push_back({a, c, a});
  r.points.push_back({c, a, a});
  for (int i = 0; i < 3; ++i) r.weights.push_back(w);
}

void push_orbit6(QuadratureRule& r, double w, double a, double b) {
  const double c = 1.0 - a - b;
  r.points.push_back({a, b, c});
  r.points.push_back({a, c, b});
  r.points.push_back({b, a, c});
  r.points.push_back({b, c, a});
  r.points.push_back({c, a, b});
  r.points.push_back({c, b, a});
  for (int i = 0; i < 6; ++i) r.weights.push_back(w);
}

QuadratureRule make_degree4() {
  QuadratureRule r;
  r.degree = 4;
  push_orbit3(r, 0.223381589678011, 0.445948490915965);
  push_orbit3(r, 0.109951743655322, 0.091576213509771);
  return r;
}

QuadratureRule make_degree10() {
  QuadratureRule r;
  r.degree = 10;
  r.points.push_back({1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0});
  r.weights.push_back(0.090817990382754);
  push_orbit3(r, 0.036725957756467, 0.485577633383657);
  push_orbit3(r, 0.045321059435528, 0.109481575485037);
  push_orbit6(r, 0.072757916845420, 0.141707219414880, 0.307939838764121);
  push_orbit6(r, 0.028327242531057, 0.025003534762686, 0.246672560639903);
  push_orbit6(r, 0.009421666963733, 0.009540815400299, 0.066803251012200);
  return r;
}

}  // namespace

const QuadratureRule& QuadratureRule::degree4() {
  static const QuadratureRule r = make_degree4();
  return r;
}

const QuadratureRule& QuadratureRule::degree10() {
  static const QuadratureRule r = make_degree10();
  return r;
}

EdgeRule gauss_legendre_01(int n) {
  if (n < 1) throw std::invalid_argument("gauss_legendre_01 needs n >= 1");
  EdgeRule rule;
  rule.points.resize(n);
  rule.weights.resize(n);
  const double pi = 3.14159265358979323846;
  for (int i = 0; i < n; ++i) {
    // Newton iteration on P_n from the Chebyshev initial guess.
    double x = std::cos(pi * (i + 0.75) / (n + 0.5));
    double dp = 0.0;
    for (int iter = 0; iter < 100; ++iter) {
      double p0 = 1.0, p1 = x;
      for (int k = 2; k <= n; ++k) {
        const double p2 = ((2 * k - 1) * x * p1 - (k - 1) * p0) / k;
        p0 = p1;
        p1 = p2;
      }
      dp = n * (x * p1 - p0) / (x * x - 1.0);
      const double dx = p1 / dp;
      x -= dx;
      if (std::abs(dx) < 1e-15) break;
    }
    {
      double p0 = 1.0, p1 = x;
      for (int k = 2; k <= n; ++k) {
        const double p2 = ((2 * k - 1) * x * p1 - (k - 1) * p0) / k;
        p0 = p1;
        p1 = p2;
      }
      dp = n * (x * p1 - p0) / (x * x - 1.0);
    }
    const double w = 2.0 / ((1.0 - x * x) * dp * dp);
    // nodes come out in descending order; store ascending on [0,1]
    rule.points[n - 1 - i] = 0.5 * (x + 1.0);
    rule.weights[n - 1 - i] = 0.5 * w;
  }
  return rule;
}

}  // namespace fluxfem
