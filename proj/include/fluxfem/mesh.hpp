#pragma once

#include <array>
#include <cstdint>
#include <iosfwd>
#include <memory>
#include <string>
#include <vector>

#include "fluxfem/geometry.hpp"

namespace fluxfem {

/// Triangle with a designated refinement edge. Edge i is the edge opposite
/// local vertex i, i.e. (v[(i+1)%3], v[(i+2)%3]).
struct Triangle {
  std::array<int, 3> v{};
  int ref_edge = 0;
};

struct BoundaryEdge {
  int a = -1;          // oriented so the domain lies to the left (CCW walk)
  int b = -1;
  Vec2 normal;         // unit outward normal of the parent triangle
  int tri = -1;        // parent triangle index
};

enum class GradingMode { boundary_concentrated, quasi_uniform };

struct GradingPolicy {
  GradingMode mode = GradingMode::boundary_concentrated;
  double h_target = 1.0;
  double c_upper = 1.0;
  int max_passes = 200;
};

/// Conforming triangulation of a sector domain. Instances are immutable after
/// construction; refinement returns a new mesh.
struct Mesh {
  SectorDomain domain;
  std::vector<Vec2> vertices;
  std::vector<Triangle> triangles;
  std::vector<BoundaryEdge> boundary_edges;
  std::vector<char> boundary_vertex_flags;   // 1 if the vertex lies on Gamma
  std::vector<int> boundary_vertices;        // ascending vertex ids
  std::vector<int> boundary_index;           // vertex id -> position in boundary_vertices, -1 interior
  std::vector<int> corner_vertices;          // vertex ids of the polygon corners, origin first
  double level_h = 1.0;                      // nominal mesh parameter 2^(-N)

  int n_vertices() const { return static_cast<int>(vertices.size()); }
  int n_triangles() const { return static_cast<int>(triangles.size()); }
  int n_boundary_vertices() const { return static_cast<int>(boundary_vertices.size()); }

  double triangle_area(int t) const;
  double triangle_diameter(int t) const;
  Vec2 centroid(int t) const;
  int origin_vertex() const { return corner_vertices.front(); }

  /// True if vertex v coincides with the reentrant corner (origin, omega > pi).
  bool is_reentrant_corner_vertex(int v) const {
    return domain.has_reentrant_corner() && v == origin_vertex();
  }
};

/// Coarse fan triangulation of the sector from the origin. Fan points are the
/// polygon corners plus the points where the square boundary crosses the
/// coordinate axes inside the sector, which reproduces the element counts
/// 2, 3, 3, 5, 6, 7 for omega = pi/2, 2pi/3, 3pi/4, 5pi/4, 3pi/2, 7pi/4.
/// Every initial refinement edge is the longest edge (ties: smallest opposite
/// vertex index).
Mesh initial_mesh(const SectorDomain& domain);

/// Mesh from raw arrays, for tests and custom geometries. Triangles must be
/// positively oriented; refinement edges are initialized to the longest edge.
/// The vertex list must contain the domain origin (0,0); other polygon
/// corners may be absent when the raw mesh covers only part of the domain.
Mesh mesh_from_triangles(const SectorDomain& domain, std::vector<Vec2> vertices,
                         std::vector<std::array<int, 3>> triangles, double level_h = 1.0);

/// Newest-vertex bisection of the marked triangles with recursive closure.
/// marked may be empty; invalid indices throw std::out_of_range.
Mesh bisect(const Mesh& mesh, const std::vector<int>& marked);

/// Global sweeps down to policy.h_target followed by the boundary-concentrated
/// grading fixpoint: every element must satisfy
///   h_T <= c_upper * max(h^2, h * sqrt(rho_T)),  rho_T = dist(T, Gamma).
/// quasi_uniform mode applies the global sweeps only. Throws if the fixpoint
/// loop exceeds policy.max_passes.
Mesh refine_graded(const Mesh& mesh, const GradingPolicy& policy);

/// min over the triangle's vertices of the distance to Gamma; exactly zero if
/// a vertex carries the boundary flag.
double element_distance_to_boundary(const Mesh& mesh, int t);

/// Structural checks used by the test- and acceptance suites.
struct MeshAudit {
  bool conforming = false;
  bool oriented = false;           // all signed areas positive
  bool normals_outward = false;
  double area_defect = 0.0;        // |sum of element areas - |Omega||
  double min_angle = 0.0;          // radians
  int grading_violations = 0;      // against h_T <= c_upper*max(h^2, h*sqrt(rho))
  double measured_c_lower = 0.0;   // min h_T / h^2 over boundary elements
  double measured_c_upper = 0.0;   // max h_T / bound over all elements
};
MeshAudit audit_mesh(const Mesh& mesh, double c_upper = 1.0);

/// Text dump, one record per line: "v x y", "t i j k r", "b i j" (0-based).
void dump_mesh(const Mesh& mesh, std::ostream& out);
void dump_mesh(const Mesh& mesh, const std::string& path);

}  // namespace fluxfem
