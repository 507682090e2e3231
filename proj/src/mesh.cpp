#include "fluxfem/mesh.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <limits>
#include <ostream>
#include <sstream>
#include <stdexcept>

namespace fluxfem {

namespace {

constexpr double kPi = 3.14159265358979323846;

inline std::uint64_t edge_key(int a, int b) {
  if (a > b) std::swap(a, b);
  return (static_cast<std::uint64_t>(a) << 32) | static_cast<std::uint32_t>(b);
}

// Deterministic edge numbering: returns per-triangle edge ids and the edge
// endpoint list. Edge i of triangle t is opposite local vertex i.
struct EdgeTable {
  std::vector<std::array<int, 3>> tri_edges;
  std::vector<std::array<int, 2>> edges;            // min,max vertex ids
  std::vector<std::array<int, 2>> incident;         // up to two incident triangles
  std::vector<std::array<int, 2>> incident_local;   // local edge index within those
};

EdgeTable build_edge_table(const Mesh& mesh) {
  struct Rec {
    std::uint64_t key;
    int tri;
    int local;
  };
  std::vector<Rec> recs;
  recs.reserve(3 * mesh.triangles.size());
  for (int t = 0; t < mesh.n_triangles(); ++t) {
    const auto& v = mesh.triangles[t].v;
    for (int i = 0; i < 3; ++i) {
      recs.push_back({edge_key(v[(i + 1) % 3], v[(i + 2) % 3]), t, i});
    }
  }
  std::sort(recs.begin(), recs.end(), [](const Rec& a, const Rec& b) {
    if (a.key != b.key) return a.key < b.key;
    return a.tri < b.tri;
  });

  EdgeTable tab;
  tab.tri_edges.assign(mesh.triangles.size(), {-1, -1, -1});
  for (std::size_t i = 0; i < recs.size();) {
    std::size_t j = i;
    while (j < recs.size() && recs[j].key == recs[i].key) ++j;
    if (j - i > 2) throw std::runtime_error("non-manifold edge in triangulation");
    const int id = static_cast<int>(tab.edges.size());
    tab.edges.push_back({static_cast<int>(recs[i].key >> 32),
                         static_cast<int>(recs[i].key & 0xffffffffu)});
    std::array<int, 2> inc = {-1, -1}, incl = {-1, -1};
    for (std::size_t k = i; k < j; ++k) {
      inc[k - i] = recs[k].tri;
      incl[k - i] = recs[k].local;
      tab.tri_edges[recs[k].tri][recs[k].local] = id;
    }
    tab.incident.push_back(inc);
    tab.incident_local.push_back(incl);
    i = j;
  }
  return tab;
}

double signed_area(const Vec2& a, const Vec2& b, const Vec2& c) {
  return 0.5 * (b - a).cross(c - a);
}

// Rebuilds boundary edges, flags and corner ids from the triangle list.
void finalize(Mesh& mesh) {
  const EdgeTable tab = build_edge_table(mesh);

  mesh.boundary_edges.clear();
  mesh.boundary_vertex_flags.assign(mesh.vertices.size(), 0);
  for (std::size_t e = 0; e < tab.edges.size(); ++e) {
    if (tab.incident[e][1] != -1) continue;
    const int t = tab.incident[e][0];
    const int local = tab.incident_local[e][0];
    const auto& v = mesh.triangles[t].v;
    BoundaryEdge be;
    be.a = v[(local + 1) % 3];
    be.b = v[(local + 2) % 3];
    be.tri = t;
    const Vec2 tang = mesh.vertices[be.b] - mesh.vertices[be.a];
    const double len = tang.norm();
    be.normal = {tang.y / len, -tang.x / len};
    mesh.boundary_edges.push_back(be);
    mesh.boundary_vertex_flags[be.a] = 1;
    mesh.boundary_vertex_flags[be.b] = 1;
  }
  std::sort(mesh.boundary_edges.begin(), mesh.boundary_edges.end(),
            [](const BoundaryEdge& x, const BoundaryEdge& y) {
              return std::tie(x.a, x.b) < std::tie(y.a, y.b);
            });

  mesh.boundary_vertices.clear();
  mesh.boundary_index.assign(mesh.vertices.size(), -1);
  for (int v = 0; v < mesh.n_vertices(); ++v) {
    if (mesh.boundary_vertex_flags[v]) {
      mesh.boundary_index[v] = static_cast<int>(mesh.boundary_vertices.size());
      mesh.boundary_vertices.push_back(v);
    }
  }
}

int longest_edge_index(const Mesh& mesh, const Triangle& tri) {
  double len[3];
  for (int i = 0; i < 3; ++i) {
    len[i] = (mesh.vertices[tri.v[(i + 2) % 3]] - mesh.vertices[tri.v[(i + 1) % 3]]).norm();
  }
  int best = 0;
  for (int i = 1; i < 3; ++i) {
    if (len[i] > len[best] * (1.0 + 1e-12)) {
      best = i;
    } else if (len[i] > len[best] * (1.0 - 1e-12) && tri.v[i] < tri.v[best]) {
      best = i;  // tie: smaller opposite-vertex id
    }
  }
  return best;
}

}  // namespace

double Mesh::triangle_area(int t) const {
  const auto& v = triangles[t].v;
  return signed_area(vertices[v[0]], vertices[v[1]], vertices[v[2]]);
}

double Mesh::triangle_diameter(int t) const {
  const auto& v = triangles[t].v;
  double d = 0.0;
  for (int i = 0; i < 3; ++i)
    d = std::max(d, (vertices[v[(i + 1) % 3]] - vertices[v[i]]).norm());
  return d;
}

Vec2 Mesh::centroid(int t) const {
  const auto& v = triangles[t].v;
  return (vertices[v[0]] + vertices[v[1]] + vertices[v[2]]) * (1.0 / 3.0);
}

Mesh initial_mesh(const SectorDomain& domain) {
  Mesh mesh;
  mesh.domain = domain;
  mesh.level_h = 1.0;

  // Boundary fan points: polygon corners merged with the axis crossings of
  // the square boundary, ordered by polar angle.
  struct Pt {
    double angle;
    Vec2 p;
  };
  std::vector<Pt> arc;
  for (std::size_t i = 1; i < domain.corner_list.size(); ++i) {
    const Vec2& c = domain.corner_list[i];
    double ang = std::atan2(c.y, c.x);
    if (ang < -1e-12) ang += 2 * kPi;
    arc.push_back({ang, c});
  }
  const Pt crossings[3] = {{kPi / 2, {0, 1}}, {kPi, {-1, 0}}, {3 * kPi / 2, {0, -1}}};
  for (const Pt& c : crossings) {
    if (c.angle < domain.omega - 1e-12) arc.push_back(c);
  }
  std::sort(arc.begin(), arc.end(), [](const Pt& a, const Pt& b) { return a.angle < b.angle; });

  mesh.vertices.push_back({0, 0});
  for (const Pt& pt : arc) mesh.vertices.push_back(pt.p);

  for (std::size_t i = 1; i + 1 < mesh.vertices.size(); ++i) {
    Triangle tri;
    tri.v = {0, static_cast<int>(i), static_cast<int>(i + 1)};
    if (signed_area(mesh.vertices[tri.v[0]], mesh.vertices[tri.v[1]], mesh.vertices[tri.v[2]]) <= 0)
      throw std::runtime_error("fan triangulation produced a degenerate element");
    tri.ref_edge = longest_edge_index(mesh, tri);
    mesh.triangles.push_back(tri);
  }

  finalize(mesh);

  mesh.corner_vertices.clear();
  for (const Vec2& c : domain.corner_list) {
    for (int v = 0; v < mesh.n_vertices(); ++v) {
      if ((mesh.vertices[v] - c).norm() < 1e-14) {
        mesh.corner_vertices.push_back(v);
        break;
      }
    }
  }
  if (mesh.corner_vertices.size() != domain.corner_list.size() || mesh.corner_vertices[0] != 0)
    throw std::runtime_error("corner bookkeeping failed");
  return mesh;
}

Mesh mesh_from_triangles(const SectorDomain& domain, std::vector<Vec2> vertices,
                         std::vector<std::array<int, 3>> triangles, double level_h) {
  Mesh mesh;
  mesh.domain = domain;
  mesh.level_h = level_h;
  mesh.vertices = std::move(vertices);
  for (const auto& tv : triangles) {
    Triangle tri;
    tri.v = tv;
    if (signed_area(mesh.vertices[tv[0]], mesh.vertices[tv[1]], mesh.vertices[tv[2]]) <= 0)
      throw std::invalid_argument("triangles must be positively oriented");
    tri.ref_edge = longest_edge_index(mesh, tri);
    mesh.triangles.push_back(tri);
  }
  finalize(mesh);
  for (const Vec2& c : domain.corner_list) {
    for (int v = 0; v < mesh.n_vertices(); ++v) {
      if ((mesh.vertices[v] - c).norm() < 1e-14) {
        mesh.corner_vertices.push_back(v);
        break;
      }
    }
  }
  if (mesh.corner_vertices.empty() || (mesh.vertices[mesh.corner_vertices[0]]).norm() > 1e-14)
    throw std::invalid_argument("vertex list must contain the origin corner");
  return mesh;
}

Mesh bisect(const Mesh& mesh, const std::vector<int>& marked) {
  for (int t : marked) {
    if (t < 0 || t >= mesh.n_triangles()) throw std::out_of_range("marked triangle index out of range");
  }
  if (marked.empty()) return mesh;

  const EdgeTable tab = build_edge_table(mesh);
  std::vector<char> edge_marked(tab.edges.size(), 0);

  // Mark the refinement edges of the marked triangles, then close: a triangle
  // with any marked edge must also have its refinement edge marked.
  std::vector<int> work;
  work.reserve(mesh.triangles.size());
  for (int t : marked) {
    const int e = tab.tri_edges[t][mesh.triangles[t].ref_edge];
    if (!edge_marked[e]) {
      edge_marked[e] = 1;
      work.push_back(e);
    }
  }
  while (!work.empty()) {
    const int e = work.back();
    work.pop_back();
    for (int side = 0; side < 2; ++side) {
      const int t = tab.incident[e][side];
      if (t < 0) continue;
      const int re = tab.tri_edges[t][mesh.triangles[t].ref_edge];
      if (!edge_marked[re]) {
        edge_marked[re] = 1;
        work.push_back(re);
      }
    }
  }

  Mesh out;
  out.domain = mesh.domain;
  out.level_h = mesh.level_h;
  out.corner_vertices = mesh.corner_vertices;
  out.vertices = mesh.vertices;

  std::vector<int> midpoint(tab.edges.size(), -1);
  for (std::size_t e = 0; e < tab.edges.size(); ++e) {
    if (!edge_marked[e]) continue;
    const Vec2 m = (mesh.vertices[tab.edges[e][0]] + mesh.vertices[tab.edges[e][1]]) * 0.5;
    midpoint[e] = out.n_vertices();
    out.vertices.push_back(m);
  }

  out.triangles.reserve(mesh.triangles.size() * 2);

  // ge[i]: id of the original mesh edge that edge i of the current (sub)triangle
  // coincides with, or -1 for edges created during splitting.
  auto emit = [&](auto&& self, std::array<int, 3> w, int r, std::array<int, 3> ge) -> void {
    const int e = ge[r];
    if (e < 0 || !edge_marked[e]) {
      Triangle tri;
      tri.v = w;
      tri.ref_edge = r;
      out.triangles.push_back(tri);
      return;
    }
    const int m = midpoint[e];
    self(self, {w[r], w[(r + 1) % 3], m}, 2, {-1, -1, ge[(r + 2) % 3]});
    self(self, {w[r], m, w[(r + 2) % 3]}, 1, {-1, ge[(r + 1) % 3], -1});
  };
  for (int t = 0; t < mesh.n_triangles(); ++t) {
    const Triangle& tri = mesh.triangles[t];
    emit(emit, tri.v, tri.ref_edge, tab.tri_edges[t]);
  }

  finalize(out);
  return out;
}

double element_distance_to_boundary(const Mesh& mesh, int t) {
  if (t < 0 || t >= mesh.n_triangles()) throw std::out_of_range("triangle index out of range");
  const auto& v = mesh.triangles[t].v;
  for (int i = 0; i < 3; ++i) {
    if (mesh.boundary_vertex_flags[v[i]]) return 0.0;
  }
  double d = std::numeric_limits<double>::infinity();
  for (int i = 0; i < 3; ++i) d = std::min(d, mesh.domain.distance_to_boundary(mesh.vertices[v[i]]));
  return d;
}

Mesh refine_graded(const Mesh& mesh, const GradingPolicy& policy) {
  if (!(policy.h_target > 0.0 && policy.h_target <= 1.0))
    throw std::invalid_argument("h_target must lie in (0, 1]");
  if (policy.h_target > mesh.level_h * (1.0 + 1e-12))
    throw std::invalid_argument("h_target exceeds the current mesh level");

  const double ratio = mesh.level_h / policy.h_target;
  const int sweeps_pairs = static_cast<int>(std::llround(std::log2(ratio)));
  if (std::abs(std::ldexp(1.0, -sweeps_pairs) * mesh.level_h - policy.h_target) >
      1e-9 * policy.h_target)
    throw std::invalid_argument("h_target must be level_h / 2^N");

  Mesh m = mesh;
  std::vector<int> all;
  for (int sweep = 0; sweep < 2 * sweeps_pairs; ++sweep) {
    all.resize(m.n_triangles());
    for (int t = 0; t < m.n_triangles(); ++t) all[t] = t;
    m = bisect(m, all);
  }
  m.level_h = policy.h_target;
  if (policy.mode == GradingMode::quasi_uniform) return m;

  const double h = policy.h_target;
  for (int pass = 0;; ++pass) {
    if (pass >= policy.max_passes)
      throw std::runtime_error("grading fixpoint did not terminate within the pass cap");
    std::vector<int> marked;
    for (int t = 0; t < m.n_triangles(); ++t) {
      const double rho = element_distance_to_boundary(m, t);
      const double bound = policy.c_upper * std::max(h * h, h * std::sqrt(rho));
      if (m.triangle_diameter(t) > bound * (1.0 + 1e-12)) marked.push_back(t);
    }
    if (marked.empty()) break;
    m = bisect(m, marked);
  }
  return m;
}

MeshAudit audit_mesh(const Mesh& mesh, double c_upper) {
  MeshAudit a;
  const EdgeTable tab = build_edge_table(mesh);

  a.conforming = true;
  for (std::size_t e = 0; e < tab.edges.size(); ++e) {
    if (tab.incident[e][1] == -1) {
      const Vec2& p = mesh.vertices[tab.edges[e][0]];
      const Vec2& q = mesh.vertices[tab.edges[e][1]];
      if (mesh.domain.distance_to_boundary(p) > 1e-12 ||
          mesh.domain.distance_to_boundary(q) > 1e-12)
        a.conforming = false;  // single-sided edge not on Gamma: hanging node
    }
  }

  a.oriented = true;
  a.normals_outward = true;
  a.min_angle = std::numeric_limits<double>::infinity();
  double total_area = 0.0, area_comp = 0.0;  // Kahan: plain summation drifts
  for (int t = 0; t < mesh.n_triangles(); ++t) {  // above 1e-12 past ~1e6 elements
    const double area = mesh.triangle_area(t);
    if (area <= 0.0) a.oriented = false;
    const double y = area - area_comp;
    const double s = total_area + y;
    area_comp = (s - total_area) - y;
    total_area = s;
    const auto& v = mesh.triangles[t].v;
    for (int i = 0; i < 3; ++i) {
      const Vec2 e1 = mesh.vertices[v[(i + 1) % 3]] - mesh.vertices[v[i]];
      const Vec2 e2 = mesh.vertices[v[(i + 2) % 3]] - mesh.vertices[v[i]];
      const double ang = std::atan2(std::abs(e1.cross(e2)), e1.dot(e2));
      a.min_angle = std::min(a.min_angle, ang);
    }
  }
  a.area_defect = std::abs(total_area - mesh.domain.area());

  for (const BoundaryEdge& be : mesh.boundary_edges) {
    const Vec2 mid = (mesh.vertices[be.a] + mesh.vertices[be.b]) * 0.5;
    if (be.normal.dot(mesh.centroid(be.tri) - mid) >= 0.0) a.normals_outward = false;
  }

  const double h = mesh.level_h;
  a.measured_c_lower = std::numeric_limits<double>::infinity();
  a.measured_c_upper = 0.0;
  for (int t = 0; t < mesh.n_triangles(); ++t) {
    const double rho = element_distance_to_boundary(mesh, t);
    const double bound = c_upper * std::max(h * h, h * std::sqrt(rho));
    const double hT = mesh.triangle_diameter(t);
    if (hT > bound * (1.0 + 1e-12)) ++a.grading_violations;
    a.measured_c_upper = std::max(a.measured_c_upper, hT / bound);
    if (rho == 0.0) a.measured_c_lower = std::min(a.measured_c_lower, hT / (h * h));
  }
  return a;
}

void dump_mesh(const Mesh& mesh, std::ostream& out) {
  out.precision(17);
  for (const Vec2& v : mesh.vertices) out << "v " << v.x << ' ' << v.y << '\n';
  for (const Triangle& t : mesh.triangles)
    out << "t " << t.v[0] << ' ' << t.v[1] << ' ' << t.v[2] << ' ' << t.ref_edge << '\n';
  for (const BoundaryEdge& e : mesh.boundary_edges) out << "b " << e.a << ' ' << e.b << '\n';
}

void dump_mesh(const Mesh& mesh, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open mesh dump file: " + path);
  dump_mesh(mesh, out);
}

}  // namespace fluxfem
