#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <Eigen/Dense>

#include <cmath>
#include <random>

#include "fluxfem/control.hpp"
#include "fluxfem/fem.hpp"
#include "fluxfem/manufactured.hpp"
#include "fluxfem/mesh.hpp"

using namespace fluxfem;

namespace {

constexpr double kPi = 3.14159265358979323846;

std::shared_ptr<const Mesh> square_mesh(int uniform_sweeps) {
  Mesh mesh = initial_mesh(make_sector_domain(kPi / 2));
  for (int i = 0; i < uniform_sweeps; ++i) {
    std::vector<int> all(mesh.n_triangles());
    for (int t = 0; t < mesh.n_triangles(); ++t) all[t] = t;
    mesh = bisect(mesh, all);
  }
  return std::make_shared<const Mesh>(std::move(mesh));
}

// smallest Ritz value of a 20-step Lanczos run, the positivity probe
double smallest_ritz(const SpMat& A, unsigned seed) {
  const int n = static_cast<int>(A.rows());
  const int steps = std::min(20, n);
  std::mt19937 rng(seed);
  std::normal_distribution<double> normal;
  Vector v(n);
  for (int i = 0; i < n; ++i) v[i] = normal(rng);
  v /= v.norm();
  Vector v_prev = Vector::Zero(n);
  Eigen::MatrixXd T = Eigen::MatrixXd::Zero(steps, steps);
  double beta = 0.0;
  int m = 0;
  for (int k = 0; k < steps; ++k) {
    Vector w = A * v - beta * v_prev;
    const double alpha = w.dot(v);
    w -= alpha * v;
    T(k, k) = alpha;
    m = k + 1;
    beta = w.norm();
    if (beta < 1e-14) break;
    if (k + 1 < steps) {
      T(k, k + 1) = beta;
      T(k + 1, k) = beta;
    }
    v_prev = v;
    v = w / beta;
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(T.topLeftCorner(m, m));
  return eig.eigenvalues().minCoeff();
}

}  // namespace

TEST_CASE("local stiffness matrix on the unit right triangle") {
  const SectorDomain dom = make_sector_domain(kPi / 2);
  const Mesh mesh =
      mesh_from_triangles(dom, {{0, 0}, {1, 0}, {0, 1}}, {std::array<int, 3>{0, 1, 2}});
  const SpMat K = assemble_stiffness(mesh);
  const double expected[3][3] = {{1.0, -0.5, -0.5}, {-0.5, 0.5, 0.0}, {-0.5, 0.0, 0.5}};
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j)
      CHECK(std::abs(K.coeff(i, j) - expected[i][j]) <= 1e-14);
}

TEST_CASE("stiffness row sums vanish and the matrix is exactly symmetric") {
  const auto mesh = square_mesh(4);
  const SpMat K = assemble_stiffness(*mesh);
  const Vector ones = Vector::Ones(mesh->n_vertices());
  CHECK((K * ones).lpNorm<Eigen::Infinity>() <= 1e-13);
  const SpMat diff = SpMat(K.transpose()) - K;
  CHECK(Eigen::Map<const Vector>(diff.valuePtr(), diff.nonZeros()).lpNorm<Eigen::Infinity>() ==
        0.0);
}

TEST_CASE("degenerate elements are rejected") {
  const SectorDomain dom = make_sector_domain(kPi / 2);
  CHECK_THROWS(mesh_from_triangles(dom, {{0, 0}, {1, 0}, {2, 0}}, {std::array<int, 3>{0, 1, 2}}));
}

TEST_CASE("load assembly") {
  const auto mesh = square_mesh(3);

  SUBCASE("f = 1 integrates to the domain area") {
    const Vector b = assemble_load(*mesh, [](double, double) { return 1.0; });
    CHECK(b.sum() == doctest::Approx(1.0).epsilon(1e-14));
  }
  SUBCASE("f = 0 gives the zero vector") {
    const Vector b = assemble_load(*mesh, zero_field());
    CHECK(b.lpNorm<Eigen::Infinity>() == 0.0);
  }
  SUBCASE("f = x integrates to 1/2 on the unit square") {
    const auto coarse = square_mesh(0);
    const Vector b = assemble_load(*coarse, [](double x, double) { return x; });
    CHECK(b.sum() == doctest::Approx(0.5).epsilon(1e-14));
  }
  SUBCASE("non-finite f names the element") {
    const ScalarField bad = [](double x, double y) {
      return (x > 0.4 && y > 0.4) ? std::numeric_limits<double>::quiet_NaN() : 1.0;
    };
    CHECK_THROWS_WITH_AS(assemble_load(*mesh, bad), doctest::Contains("element"),
                         std::runtime_error);
  }
}

TEST_CASE("solve_dirichlet reproduces affine functions exactly") {
  const auto mesh = square_mesh(4);
  const ScalarField affine = [](double x, double y) { return 1.0 + 2.0 * x - y; };
  const FeFunction u = solve_dirichlet(*mesh, zero_field(), affine);
  for (int v = 0; v < mesh->n_vertices(); ++v) {
    const Vec2 p = mesh->vertices[v];
    CHECK(std::abs(u.values[v] - affine(p.x, p.y)) <= 1e-11);
  }
}

TEST_CASE("solve_dirichlet with zero data returns zero") {
  const auto mesh = square_mesh(3);
  const FeFunction u = solve_dirichlet(*mesh, zero_field(), zero_field());
  CHECK(u.values.lpNorm<Eigen::Infinity>() <= 1e-14);
}

TEST_CASE("cg and dense backends agree and satisfy the residual contract") {
  const auto mesh = square_mesh(6);  // 128 elements, 49 interior dofs
  const FluxBenchmark bench = flux_bench(kPi / 2);
  PoissonOperator op(mesh);
  const Vector load = assemble_load(*mesh, bench.f_rhs);
  const Vector zero_bc = Vector::Zero(mesh->n_boundary_vertices());
  const FeFunction u_cg = op.solve(load, zero_bc, SolveBackend::cg);
  const FeFunction u_dense = op.solve(load, zero_bc, SolveBackend::dense);
  const FeFunction u_ldlt = op.solve(load, zero_bc, SolveBackend::ldlt);
  CHECK((u_cg.values - u_dense.values).lpNorm<Eigen::Infinity>() <= 1e-10);
  CHECK((u_ldlt.values - u_dense.values).lpNorm<Eigen::Infinity>() <= 1e-12);
  CHECK(op.last_iterations() == 0);  // ldlt path reports no iterations

  // Galerkin equations at interior vertices
  const Vector residual = op.apply_stiffness(u_cg.values) - load;
  double interior_max = 0.0;
  for (int v = 0; v < mesh->n_vertices(); ++v)
    if (!mesh->boundary_vertex_flags[v]) interior_max = std::max(interior_max, std::abs(residual[v]));
  CHECK(interior_max <= 1e-10);
}

TEST_CASE("manufactured Poisson problem converges at second order in L2") {
  const FluxBenchmark bench = flux_bench(kPi / 2);
  std::vector<double> errors;
  for (int level = 2; level <= 4; ++level) {
    GradingPolicy policy;
    policy.mode = GradingMode::quasi_uniform;
    policy.h_target = std::ldexp(1.0, -level);
    auto mesh = std::make_shared<const Mesh>(
        refine_graded(initial_mesh(make_sector_domain(kPi / 2)), policy));
    const FeFunction u = solve_dirichlet(*mesh, bench.f_rhs, zero_field());
    errors.push_back(l2_error(*mesh, u, bench.u_exact));
  }
  for (std::size_t i = 1; i < errors.size(); ++i) {
    const double rate = std::log2(errors[i - 1] / errors[i]);
    CHECK(rate > 1.8);
    CHECK(rate < 2.3);
  }
}

TEST_CASE("apply_stiffness") {
  const auto mesh = square_mesh(2);

  SUBCASE("constant functions are in the kernel") {
    FeFunction c;
    c.mesh = mesh;
    c.values = Vector::Constant(mesh->n_vertices(), 3.25);
    CHECK(apply_stiffness(*mesh, c).lpNorm<Eigen::Infinity>() <= 1e-13);
  }

  SUBCASE("matches the dense product on a random vector") {
    const auto coarse = square_mesh(0);
    std::mt19937 rng(3u);
    std::normal_distribution<double> normal;
    FeFunction u;
    u.mesh = coarse;
    u.values.resize(coarse->n_vertices());
    for (int i = 0; i < coarse->n_vertices(); ++i) u.values[i] = normal(rng);
    const Eigen::MatrixXd dense = Eigen::MatrixXd(assemble_stiffness(*coarse));
    const Vector expected = dense * u.values;
    const Vector got = apply_stiffness(*coarse, u);
    CHECK((expected - got).lpNorm<Eigen::Infinity>() <= 1e-13);
  }
}

TEST_CASE("interior stiffness block is positive definite (Lanczos probe)") {
  const auto mesh = square_mesh(8);
  const SpMat K = assemble_stiffness(*mesh);
  const Vector load = Vector::Zero(mesh->n_vertices());
  const SparseSystem sys =
      build_dirichlet_system(*mesh, K, load, Vector::Zero(mesh->n_boundary_vertices()));
  CHECK(sys.matrix.rows() == mesh->n_vertices() - mesh->n_boundary_vertices());
  for (unsigned seed = 1; seed <= 20; ++seed) {
    CHECK(smallest_ritz(sys.matrix, seed) > 0.0);
  }
}

TEST_CASE("discrete harmonic solutions minimize energy among trace-matching functions") {
  const auto mesh = square_mesh(3);
  const ScalarField w = [](double x, double y) { return x * x - y * y + 0.3 * x * y; };
  const FeFunction u_h = solve_dirichlet(*mesh, zero_field(), w);
  FeFunction interp;
  interp.mesh = mesh;
  interp.values.resize(mesh->n_vertices());
  for (int v = 0; v < mesh->n_vertices(); ++v)
    interp.values[v] = w(mesh->vertices[v].x, mesh->vertices[v].y);
  const SpMat K = assemble_stiffness(*mesh);
  const double e_h = u_h.values.dot(K * u_h.values);
  const double e_i = interp.values.dot(K * interp.values);
  CHECK(e_h <= e_i + 1e-10);
}

TEST_CASE("quadrature upgrade keeps singular corner loads finite") {
  // r^(-1/2) is integrable; the load must assemble without blowing up
  const auto mesh = square_mesh(3);
  const ScalarField singular = [](double x, double y) {
    return 1.0 / std::sqrt(std::hypot(x, y));
  };
  const Vector b = assemble_load(*mesh, singular);
  CHECK(std::isfinite(b.sum()));
  CHECK(b.sum() > 0.0);
}
