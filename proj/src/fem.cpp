#include "fluxfem/fem.hpp"

#include <Eigen/Dense>

#include <cmath>
#include <sstream>
#include <vector>

namespace fluxfem {

namespace {

struct ElementGeometry {
  Vec2 edge[3];  // edge[i] = p[(i+2)%3] - p[(i+1)%3], opposite vertex i
  double area;
};

ElementGeometry element_geometry(const Mesh& mesh, int t) {
  const auto& v = mesh.triangles[t].v;
  const Vec2 p0 = mesh.vertices[v[0]], p1 = mesh.vertices[v[1]], p2 = mesh.vertices[v[2]];
  ElementGeometry g;
  g.edge[0] = p2 - p1;
  g.edge[1] = p0 - p2;
  g.edge[2] = p1 - p0;
  g.area = 0.5 * (p1 - p0).cross(p2 - p0);
  return g;
}

bool touches_origin_corner(const Mesh& mesh, int t) {
  const int origin = mesh.origin_vertex();
  const auto& v = mesh.triangles[t].v;
  return v[0] == origin || v[1] == origin || v[2] == origin;
}

}  // namespace

double FeFunction::evaluate(int tri, const std::array<double, 3>& bary) const {
  const auto& v = mesh->triangles[tri].v;
  return bary[0] * values[v[0]] + bary[1] * values[v[1]] + bary[2] * values[v[2]];
}

SpMat assemble_stiffness(const Mesh& mesh) {
  std::vector<Eigen::Triplet<double>> trip;
  trip.reserve(9 * mesh.triangles.size());
  for (int t = 0; t < mesh.n_triangles(); ++t) {
    const ElementGeometry g = element_geometry(mesh, t);
    if (!(g.area > 1e-300)) {
      std::ostringstream msg;
      msg << "degenerate element " << t << " (area " << g.area << ")";
      throw std::runtime_error(msg.str());
    }
    const auto& v = mesh.triangles[t].v;
    const double scale = 1.0 / (4.0 * g.area);
    for (int i = 0; i < 3; ++i) {
      for (int j = 0; j < 3; ++j) {
        trip.emplace_back(v[i], v[j], scale * g.edge[i].dot(g.edge[j]));
      }
    }
  }
  SpMat K(mesh.n_vertices(), mesh.n_vertices());
  K.setFromTriplets(trip.begin(), trip.end());
  return K;
}

SpMat assemble_mass(const Mesh& mesh) {
  std::vector<Eigen::Triplet<double>> trip;
  trip.reserve(9 * mesh.triangles.size());
  for (int t = 0; t < mesh.n_triangles(); ++t) {
    const double area = mesh.triangle_area(t);
    const auto& v = mesh.triangles[t].v;
    for (int i = 0; i < 3; ++i) {
      for (int j = 0; j < 3; ++j) {
        trip.emplace_back(v[i], v[j], area / 12.0 * (i == j ? 2.0 : 1.0));
      }
    }
  }
  SpMat M(mesh.n_vertices(), mesh.n_vertices());
  M.setFromTriplets(trip.begin(), trip.end());
  return M;
}

Vector assemble_load(const Mesh& mesh, const ScalarField& f, const QuadratureRule& quad,
                     const QuadratureRule& corner_quad) {
  Vector b = Vector::Zero(mesh.n_vertices());
  for (int t = 0; t < mesh.n_triangles(); ++t) {
    const auto& v = mesh.triangles[t].v;
    const Vec2 p0 = mesh.vertices[v[0]], p1 = mesh.vertices[v[1]], p2 = mesh.vertices[v[2]];
    const double area = mesh.triangle_area(t);
    const QuadratureRule& rule = touches_origin_corner(mesh, t) ? corner_quad : quad;
    double acc[3] = {0.0, 0.0, 0.0};
    for (std::size_t q = 0; q < rule.points.size(); ++q) {
      const auto& l = rule.points[q];
      const double x = l[0] * p0.x + l[1] * p1.x + l[2] * p2.x;
      const double y = l[0] * p0.y + l[1] * p1.y + l[2] * p2.y;
      const double val = f(x, y);
      if (!std::isfinite(val)) {
        std::ostringstream msg;
        msg << "non-finite load integrand on element " << t << " at (" << x << ", " << y << ")";
        throw std::runtime_error(msg.str());
      }
      const double wv = rule.weights[q] * val;
      acc[0] += wv * l[0];
      acc[1] += wv * l[1];
      acc[2] += wv * l[2];
    }
    for (int i = 0; i < 3; ++i) b[v[i]] += area * acc[i];
  }
  return b;
}

double integrate(const Mesh& mesh, const ScalarField& f, const QuadratureRule& quad,
                 const QuadratureRule& corner_quad) {
  double total = 0.0;
  for (int t = 0; t < mesh.n_triangles(); ++t) {
    const auto& v = mesh.triangles[t].v;
    const Vec2 p0 = mesh.vertices[v[0]], p1 = mesh.vertices[v[1]], p2 = mesh.vertices[v[2]];
    const double area = mesh.triangle_area(t);
    const QuadratureRule& rule = touches_origin_corner(mesh, t) ? corner_quad : quad;
    double acc = 0.0;
    for (std::size_t q = 0; q < rule.points.size(); ++q) {
      const auto& l = rule.points[q];
      acc += rule.weights[q] *
             f(l[0] * p0.x + l[1] * p1.x + l[2] * p2.x, l[0] * p0.y + l[1] * p1.y + l[2] * p2.y);
    }
    total += area * acc;
  }
  return total;
}

SparseSystem build_dirichlet_system(const Mesh& mesh, const SpMat& stiffness, const Vector& load,
                                    const Vector& boundary_values) {
  SparseSystem sys;
  sys.dirichlet_values = boundary_values;
  sys.free_index.assign(mesh.n_vertices(), -1);
  for (int v = 0; v < mesh.n_vertices(); ++v) {
    if (!mesh.boundary_vertex_flags[v]) {
      sys.free_index[v] = static_cast<int>(sys.free_vertices.size());
      sys.free_vertices.push_back(v);
    }
  }
  const int nfree = static_cast<int>(sys.free_vertices.size());

  Vector g_ext = Vector::Zero(mesh.n_vertices());
  for (int i = 0; i < mesh.n_boundary_vertices(); ++i)
    g_ext[mesh.boundary_vertices[i]] = boundary_values[i];
  const Vector shifted = load - stiffness * g_ext;

  sys.rhs.resize(nfree);
  for (int i = 0; i < nfree; ++i) sys.rhs[i] = shifted[sys.free_vertices[i]];

  std::vector<Eigen::Triplet<double>> trip;
  trip.reserve(stiffness.nonZeros());
  for (int col = 0; col < stiffness.outerSize(); ++col) {
    const int jc = sys.free_index[col];
    if (jc < 0) continue;
    for (SpMat::InnerIterator it(stiffness, col); it; ++it) {
      const int ir = sys.free_index[static_cast<int>(it.row())];
      if (ir >= 0) trip.emplace_back(ir, jc, it.value());
    }
  }
  sys.matrix.resize(nfree, nfree);
  sys.matrix.setFromTriplets(trip.begin(), trip.end());
  return sys;
}

CgResult cg_solve(const SpMat& A, const Vector& b, double rtol, int max_iter) {
  const int n = static_cast<int>(A.rows());
  CgResult res;
  res.x = Vector::Zero(n);
  const double bnorm = b.norm();
  if (bnorm == 0.0) {
    res.converged = true;
    return res;
  }
  if (max_iter < 0) max_iter = static_cast<int>(20.0 * std::sqrt(static_cast<double>(n))) + 10;

  Vector inv_diag(n);
  for (int i = 0; i < n; ++i) {
    const double d = A.coeff(i, i);
    inv_diag[i] = d > 0.0 ? 1.0 / d : 1.0;
  }

  Vector r = b;
  Vector z = inv_diag.asDiagonal() * r;
  Vector p = z;
  double rz = r.dot(z);
  for (int k = 0; k < max_iter; ++k) {
    const Vector Ap = A * p;
    const double alpha = rz / p.dot(Ap);
    res.x += alpha * p;
    r -= alpha * Ap;
    ++res.iterations;
    if (r.norm() <= rtol * bnorm) {
      const Vector true_res = b - A * res.x;  // recurrence drift guard
      res.rel_residual = true_res.norm() / bnorm;
      if (res.rel_residual <= rtol) {
        res.converged = true;
        return res;
      }
      r = true_res;
      z = inv_diag.asDiagonal() * r;
      rz = r.dot(z);
      p = z;
      continue;
    }
    z = inv_diag.asDiagonal() * r;
    const double rz_new = r.dot(z);
    p = z + (rz_new / rz) * p;
    rz = rz_new;
  }
  res.rel_residual = (b - A * res.x).norm() / bnorm;
  res.converged = res.rel_residual <= rtol;
  return res;
}

Vector dense_solve(const SpMat& A, const Vector& b) {
  const Eigen::MatrixXd dense = Eigen::MatrixXd(A);
  return dense.ldlt().solve(b);
}

Vector boundary_values_from_field(const Mesh& mesh, const ScalarField& g) {
  Vector vals(mesh.n_boundary_vertices());
  for (int i = 0; i < mesh.n_boundary_vertices(); ++i) {
    const Vec2& p = mesh.vertices[mesh.boundary_vertices[i]];
    vals[i] = g(p.x, p.y);
  }
  return vals;
}

FeFunction solve_dirichlet(const Mesh& mesh, const ScalarField& f, const ScalarField& g,
                           SolveBackend backend) {
  auto holder = std::make_shared<Mesh>(mesh);
  PoissonOperator op(holder);
  return op.solve_field(f, boundary_values_from_field(mesh, g), backend);
}

Vector apply_stiffness(const Mesh& mesh, const FeFunction& u) {
  return assemble_stiffness(mesh) * u.values;
}

PoissonOperator::PoissonOperator(std::shared_ptr<const Mesh> mesh)
    : mesh_(std::move(mesh)),
      stiffness_(assemble_stiffness(*mesh_)),
      mass_(assemble_mass(*mesh_)) {
  free_index_.assign(mesh_->n_vertices(), -1);
  for (int v = 0; v < mesh_->n_vertices(); ++v) {
    if (!mesh_->boundary_vertex_flags[v]) {
      free_index_[v] = static_cast<int>(free_vertices_.size());
      free_vertices_.push_back(v);
    }
  }
  const int nfree = static_cast<int>(free_vertices_.size());
  std::vector<Eigen::Triplet<double>> trip;
  trip.reserve(stiffness_.nonZeros());
  for (int col = 0; col < stiffness_.outerSize(); ++col) {
    const int jc = free_index_[col];
    if (jc < 0) continue;
    for (SpMat::InnerIterator it(stiffness_, col); it; ++it) {
      const int ir = free_index_[static_cast<int>(it.row())];
      if (ir >= 0) trip.emplace_back(ir, jc, it.value());
    }
  }
  interior_.resize(nfree, nfree);
  interior_.setFromTriplets(trip.begin(), trip.end());
}

FeFunction PoissonOperator::solve(const Vector& rhs_full, const Vector& boundary_values,
                                  SolveBackend backend) const {
  const Mesh& mesh = *mesh_;
  const int nfree = static_cast<int>(free_vertices_.size());

  Vector g_ext = Vector::Zero(mesh.n_vertices());
  for (int i = 0; i < mesh.n_boundary_vertices(); ++i)
    g_ext[mesh.boundary_vertices[i]] = boundary_values[i];
  const Vector shifted = rhs_full - stiffness_ * g_ext;
  Vector rhs(nfree);
  for (int i = 0; i < nfree; ++i) rhs[i] = shifted[free_vertices_[i]];

  if (backend == SolveBackend::automatic)
    backend = nfree < 500 ? SolveBackend::dense : SolveBackend::cg;

  Vector x;
  last_iterations_ = 0;
  switch (backend) {
    case SolveBackend::cg: {
      const CgResult res = cg_solve(interior_, rhs);
      last_iterations_ = res.iterations;
      if (!res.converged) {
        std::ostringstream msg;
        msg << "cg failed to reach 1e-12 within " << res.iterations
            << " iterations (residual " << res.rel_residual << ")";
        throw SolverError(msg.str(), res.rel_residual, res.iterations);
      }
      x = res.x;
      break;
    }
    case SolveBackend::dense:
      x = dense_solve(interior_, rhs);
      break;
    case SolveBackend::ldlt: {
      if (!ldlt_) {
        ldlt_.emplace();
        ldlt_->compute(interior_);
        if (ldlt_->info() != Eigen::Success)
          throw SolverError("sparse factorization failed", 0.0, 0);
      }
      x = ldlt_->solve(rhs);
      for (int refine = 0; refine < 2; ++refine) {
        const Vector r = rhs - interior_ * x;
        if (r.norm() <= 1e-13 * rhs.norm()) break;
        x += ldlt_->solve(r);
      }
      break;
    }
    default:
      throw std::logic_error("unreachable solve backend");
  }

  const double bnorm = rhs.norm();
  if (bnorm > 0.0) {
    const double rel = (rhs - interior_ * x).norm() / bnorm;
    if (rel > 1e-11)
      throw SolverError("interior residual above contract", rel, last_iterations_);
  }

  FeFunction u;
  u.mesh = mesh_;
  u.values = g_ext;
  for (int i = 0; i < nfree; ++i) u.values[free_vertices_[i]] = x[i];
  return u;
}

FeFunction PoissonOperator::solve_field(const ScalarField& f, const Vector& boundary_values,
                                        SolveBackend backend) const {
  return solve(assemble_load(*mesh_, f), boundary_values, backend);
}

}  // namespace fluxfem
