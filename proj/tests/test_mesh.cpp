#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <set>

#include "fluxfem/mesh.hpp"

using namespace fluxfem;

namespace {

constexpr double kPi = 3.14159265358979323846;

double total_area(const Mesh& mesh) {
  double a = 0.0;
  for (int t = 0; t < mesh.n_triangles(); ++t) a += mesh.triangle_area(t);
  return a;
}

std::vector<int> all_triangles(const Mesh& mesh) {
  std::vector<int> idx(mesh.n_triangles());
  std::iota(idx.begin(), idx.end(), 0);
  return idx;
}

// reference bisection oracle: count elements after N uniform sweeps by the
// halving rule for compatible right-isosceles pairs
long expected_uniform_count(long initial, int sweeps) {
  long n = initial;
  for (int i = 0; i < sweeps; ++i) n *= 2;
  return n;
}

}  // namespace

TEST_CASE("sector domains carry the paper geometry") {
  const double angles[] = {kPi / 2, 2 * kPi / 3, 3 * kPi / 4, 5 * kPi / 4, 3 * kPi / 2,
                           7 * kPi / 4};
  const double areas[] = {1.0, 1.0 + 0.5 / std::sqrt(3.0), 1.5, 2.5, 3.0, 3.5};
  for (int i = 0; i < 6; ++i) {
    const SectorDomain dom = make_sector_domain(angles[i]);
    CHECK(dom.lambda_bar == doctest::Approx(kPi / angles[i]).epsilon(1e-15));
    CHECK(dom.corner_list[0].x == 0.0);
    CHECK(dom.corner_list[0].y == 0.0);
    // counter-clockwise and positively oriented
    CHECK(dom.area() > 0.0);
    CHECK(dom.area() == doctest::Approx(areas[i]).epsilon(1e-14));
  }

  CHECK_THROWS_AS(make_sector_domain(kPi / 4), std::invalid_argument);
  CHECK_THROWS_AS(make_sector_domain(2 * kPi), std::invalid_argument);
}

TEST_CASE("initial meshes reproduce the published element counts") {
  const std::map<double, int> counts = {{kPi / 2, 2},     {2 * kPi / 3, 3}, {3 * kPi / 4, 3},
                                        {5 * kPi / 4, 5}, {3 * kPi / 2, 6}, {7 * kPi / 4, 7}};
  for (const auto& [omega, count] : counts) {
    const Mesh mesh = initial_mesh(make_sector_domain(omega));
    CHECK(mesh.n_triangles() == count);
    const MeshAudit a = audit_mesh(mesh);
    CHECK(a.conforming);
    CHECK(a.oriented);
    CHECK(a.normals_outward);
    CHECK(a.area_defect < 1e-12);
  }
}

TEST_CASE("unit square initial mesh covers (0,1)^2") {
  const Mesh mesh = initial_mesh(make_sector_domain(kPi / 2));
  CHECK(mesh.n_triangles() == 2);
  CHECK(total_area(mesh) == doctest::Approx(1.0).epsilon(1e-15));
}

TEST_CASE("bisect: empty marking is the identity") {
  const Mesh mesh = initial_mesh(make_sector_domain(kPi / 2));
  const Mesh same = bisect(mesh, {});
  CHECK(same.n_vertices() == mesh.n_vertices());
  CHECK(same.n_triangles() == mesh.n_triangles());
  for (int t = 0; t < mesh.n_triangles(); ++t) {
    CHECK(same.triangles[t].v == mesh.triangles[t].v);
    CHECK(same.triangles[t].ref_edge == mesh.triangles[t].ref_edge);
  }
}

TEST_CASE("bisect: marking one square triangle splits its compatible partner too") {
  const Mesh mesh = initial_mesh(make_sector_domain(kPi / 2));
  const Mesh ref = bisect(mesh, {0});
  CHECK(ref.n_triangles() == 4);  // shared refinement edge forces the pair
  const MeshAudit a = audit_mesh(ref);
  CHECK(a.conforming);
  CHECK(a.oriented);
  CHECK(total_area(ref) == doctest::Approx(1.0).epsilon(1e-14));
}

TEST_CASE("bisect: repeated uniform marking doubles the element count") {
  Mesh mesh = initial_mesh(make_sector_domain(kPi / 2));
  for (int sweep = 1; sweep <= 6; ++sweep) {
    mesh = bisect(mesh, all_triangles(mesh));
    CHECK(mesh.n_triangles() == expected_uniform_count(2, sweep));
    CHECK(total_area(mesh) == doctest::Approx(1.0).epsilon(1e-13));
  }
  const MeshAudit a = audit_mesh(mesh);
  CHECK(a.conforming);
  CHECK(a.oriented);
  CHECK(a.normals_outward);
}

TEST_CASE("bisect: invalid index throws") {
  const Mesh mesh = initial_mesh(make_sector_domain(kPi / 2));
  CHECK_THROWS_AS(bisect(mesh, {17}), std::out_of_range);
}

TEST_CASE("newest-vertex bisection keeps the minimum angle bounded") {
  // at most four similarity classes per initial element: the minimum angle
  // must stagnate after a few sweeps
  for (double omega : {kPi / 2, 2 * kPi / 3, 3 * kPi / 2}) {
    Mesh mesh = initial_mesh(make_sector_domain(omega));
    const double initial_min = audit_mesh(mesh).min_angle;
    std::vector<double> min_angles;
    for (int sweep = 0; sweep < 8; ++sweep) {
      mesh = bisect(mesh, all_triangles(mesh));
      min_angles.push_back(audit_mesh(mesh).min_angle);
    }
    for (double a : min_angles) CHECK(a >= initial_min / 2.0 - 1e-12);
    // stagnation: the last five sweeps do not change the minimum angle
    for (std::size_t i = 4; i < min_angles.size(); ++i)
      CHECK(min_angles[i] == doctest::Approx(min_angles[3]).epsilon(1e-12));
  }
}

TEST_CASE("element_distance_to_boundary") {
  Mesh mesh = initial_mesh(make_sector_domain(kPi / 2));
  for (int i = 0; i < 4; ++i) mesh = bisect(mesh, all_triangles(mesh));

  SUBCASE("boundary-flagged elements report exactly zero") {
    int boundary_elements = 0;
    for (int t = 0; t < mesh.n_triangles(); ++t) {
      const auto& v = mesh.triangles[t].v;
      const bool touches = mesh.boundary_vertex_flags[v[0]] || mesh.boundary_vertex_flags[v[1]] ||
                           mesh.boundary_vertex_flags[v[2]];
      if (touches) {
        ++boundary_elements;
        CHECK(element_distance_to_boundary(mesh, t) == 0.0);
      }
    }
    CHECK(boundary_elements > 0);
  }

  SUBCASE("interior elements match a brute-force point-to-segment search") {
    for (int t = 0; t < mesh.n_triangles(); ++t) {
      const double rho = element_distance_to_boundary(mesh, t);
      if (rho == 0.0) continue;
      double brute = std::numeric_limits<double>::infinity();
      const auto& poly = mesh.domain.corner_list;
      for (int i = 0; i < 3; ++i) {
        const Vec2 p = mesh.vertices[mesh.triangles[t].v[i]];
        for (std::size_t s = 0; s < poly.size(); ++s)
          brute = std::min(brute,
                           point_segment_distance(p, poly[s], poly[(s + 1) % poly.size()]));
      }
      CHECK(rho == doctest::Approx(brute).epsilon(1e-12));
    }
  }

  SUBCASE("hand-checked triangle in the unit square") {
    // {(0.5,0.5),(0.6,0.5),(0.5,0.6)}: nearest square edge is 0.4 away
    double d = std::numeric_limits<double>::infinity();
    const auto& poly = mesh.domain.corner_list;
    for (const Vec2 p : {Vec2{0.5, 0.5}, Vec2{0.6, 0.5}, Vec2{0.5, 0.6}}) {
      double dp = std::numeric_limits<double>::infinity();
      for (std::size_t s = 0; s < poly.size(); ++s)
        dp = std::min(dp, point_segment_distance(p, poly[s], poly[(s + 1) % poly.size()]));
      d = std::min(d, dp);
    }
    CHECK(d == doctest::Approx(0.4).epsilon(1e-14));
  }
}

TEST_CASE("refine_graded: quasi-uniform with h_target = level_h is the identity") {
  const Mesh mesh = initial_mesh(make_sector_domain(kPi / 2));
  GradingPolicy policy;
  policy.mode = GradingMode::quasi_uniform;
  policy.h_target = mesh.level_h;
  const Mesh same = refine_graded(mesh, policy);
  CHECK(same.n_vertices() == mesh.n_vertices());
  CHECK(same.n_triangles() == mesh.n_triangles());
}

TEST_CASE("refine_graded: boundary-concentrated meshes satisfy the grading bound") {
  for (double omega : {kPi / 2, 3 * kPi / 2}) {
    const Mesh base = initial_mesh(make_sector_domain(omega));
    for (int level = 3; level <= 4; ++level) {
      GradingPolicy policy;
      policy.h_target = std::ldexp(1.0, -level);
      const Mesh mesh = refine_graded(base, policy);
      const MeshAudit a = audit_mesh(mesh);
      CHECK(a.conforming);
      CHECK(a.oriented);
      CHECK(a.normals_outward);
      CHECK(a.grading_violations == 0);
      CHECK(a.area_defect < 1e-12);
      CHECK(a.measured_c_lower > 0.0);
      // boundary elements live on the h^2 scale
      CHECK(a.measured_c_lower >= 0.2);
      CHECK(a.measured_c_upper <= 1.0 + 1e-12);
    }
  }
}

TEST_CASE("refine_graded: element count follows the h^-2 |ln h| law") {
  const Mesh base = initial_mesh(make_sector_domain(kPi / 2));
  std::vector<double> constants;
  for (int level = 3; level <= 6; ++level) {
    GradingPolicy policy;
    policy.h_target = std::ldexp(1.0, -level);
    const Mesh mesh = refine_graded(base, policy);
    const double h = policy.h_target;
    constants.push_back(mesh.n_triangles() * h * h / std::abs(std::log(h)));
  }
  const auto [lo, hi] = std::minmax_element(constants.begin(), constants.end());
  CHECK(*hi / *lo < 4.0);
}

TEST_CASE("mesh dump format") {
  const Mesh mesh = initial_mesh(make_sector_domain(kPi / 2));
  std::ostringstream os;
  dump_mesh(mesh, os);
  const std::string text = os.str();
  CHECK(text.find("v 0 0\n") == 0);
  CHECK(text.find("t 0 1 2") != std::string::npos);
  CHECK(text.find("b 0 1") != std::string::npos);
  // one record per vertex, triangle and boundary edge
  const auto count = [&](char c) {
    long n = 0;
    std::istringstream is(text);
    std::string line;
    while (std::getline(is, line))
      if (!line.empty() && line[0] == c) ++n;
    return n;
  };
  CHECK(count('v') == mesh.n_vertices());
  CHECK(count('t') == mesh.n_triangles());
  CHECK(count('b') == static_cast<long>(mesh.boundary_edges.size()));
}
