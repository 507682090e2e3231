#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "fluxfem/quadrature.hpp"

using namespace fluxfem;

namespace {

// exact integral of x^a y^b over conv{(0,0),(1,0),(0,1)}: a! b! / (a+b+2)!
double exact_monomial(int a, int b) {
  auto fact = [](int n) {
    double f = 1.0;
    for (int i = 2; i <= n; ++i) f *= i;
    return f;
  };
  return fact(a) * fact(b) / fact(a + b + 2);
}

double quad_monomial(const QuadratureRule& rule, int a, int b) {
  double acc = 0.0;
  for (std::size_t q = 0; q < rule.points.size(); ++q) {
    const auto& l = rule.points[q];
    acc += rule.weights[q] * std::pow(l[1], a) * std::pow(l[2], b);
  }
  return 0.5 * acc;  // reference area
}

}  // namespace

TEST_CASE("triangle rules integrate monomials up to their degree") {
  for (const QuadratureRule* rule : {&QuadratureRule::degree4(), &QuadratureRule::degree10()}) {
    double wsum = 0.0;
    for (double w : rule->weights) {
      CHECK(w > 0.0);
      wsum += w;
    }
    CHECK(wsum == doctest::Approx(1.0).epsilon(1e-14));
    for (int a = 0; a <= rule->degree; ++a) {
      for (int b = 0; a + b <= rule->degree; ++b) {
        CHECK(quad_monomial(*rule, a, b) ==
              doctest::Approx(exact_monomial(a, b)).epsilon(1e-13));
      }
    }
  }
  CHECK(QuadratureRule::degree4().points.size() == 6);
  CHECK(QuadratureRule::degree10().points.size() == 25);
}

TEST_CASE("triangle rules avoid the vertices") {
  for (const QuadratureRule* rule : {&QuadratureRule::degree4(), &QuadratureRule::degree10()}) {
    for (const auto& l : rule->points) {
      for (int i = 0; i < 3; ++i) {
        CHECK(l[i] > 1e-4);
        CHECK(l[i] < 1.0 - 1e-4);
      }
    }
  }
}

TEST_CASE("Gauss-Legendre on [0,1] is exact to degree 2n-1") {
  for (int n : {1, 2, 3, 5, 10}) {
    const EdgeRule rule = gauss_legendre_01(n);
    REQUIRE(rule.points.size() == static_cast<std::size_t>(n));
    for (int d = 0; d <= 2 * n - 1; ++d) {
      double acc = 0.0;
      for (int q = 0; q < n; ++q) acc += rule.weights[q] * std::pow(rule.points[q], d);
      CHECK(acc == doctest::Approx(1.0 / (d + 1)).epsilon(1e-14));
    }
    // degree 2n fails, so the rule is not accidentally overpowered
    double acc = 0.0;
    for (int q = 0; q < n; ++q) acc += rule.weights[q] * std::pow(rule.points[q], 2 * n);
    CHECK(std::abs(acc - 1.0 / (2 * n + 1)) > 1e-12);
  }
}
