#include "fluxfem/krylov.hpp"

#include <cmath>

namespace fluxfem {

GmresResult gmres(const std::function<Vector(const Vector&)>& apply, const Vector& b,
                  const GmresOptions& opts) {
  const int n = static_cast<int>(b.size());
  GmresResult res;
  res.x = Vector::Zero(n);
  const double bnorm = b.norm();
  if (bnorm == 0.0) {
    res.converged = true;
    return res;
  }
  const int m = opts.restart;

  while (res.iterations < opts.max_iter) {
    Vector r = b - apply(res.x);
    double beta = r.norm();
    if (beta <= opts.rtol * bnorm) {
      res.converged = true;
      res.rel_residual = beta / bnorm;
      return res;
    }

    std::vector<Vector> V;
    V.reserve(m + 1);
    V.push_back(r / beta);
    Eigen::MatrixXd H = Eigen::MatrixXd::Zero(m + 1, m);
    std::vector<double> cs(m, 0.0), sn(m, 0.0);
    Vector g = Vector::Zero(m + 1);
    g[0] = beta;

    int k = 0;
    for (; k < m && res.iterations < opts.max_iter; ++k) {
      Vector w = apply(V[k]);
      for (int i = 0; i <= k; ++i) {  // modified Gram-Schmidt
        H(i, k) = w.dot(V[i]);
        w -= H(i, k) * V[i];
      }
      H(k + 1, k) = w.norm();
      if (H(k + 1, k) > 1e-14 * beta) {
        V.push_back(w / H(k + 1, k));
      } else {
        V.push_back(Vector::Zero(n));  // lucky breakdown, exact solution in span
      }

      for (int i = 0; i < k; ++i) {
        const double t = cs[i] * H(i, k) + sn[i] * H(i + 1, k);
        H(i + 1, k) = -sn[i] * H(i, k) + cs[i] * H(i + 1, k);
        H(i, k) = t;
      }
      const double denom = std::hypot(H(k, k), H(k + 1, k));
      cs[k] = H(k, k) / denom;
      sn[k] = H(k + 1, k) / denom;
      H(k, k) = denom;
      H(k + 1, k) = 0.0;
      g[k + 1] = -sn[k] * g[k];
      g[k] = cs[k] * g[k];

      ++res.iterations;
      const double rel = std::abs(g[k + 1]) / bnorm;
      res.history.push_back(rel);
      if (rel <= opts.rtol) {
        ++k;
        break;
      }
    }

    Vector y(k);
    for (int i = k - 1; i >= 0; --i) {
      double s = g[i];
      for (int j = i + 1; j < k; ++j) s -= H(i, j) * y[j];
      y[i] = s / H(i, i);
    }
    for (int i = 0; i < k; ++i) res.x += y[i] * V[i];

    const double true_rel = (b - apply(res.x)).norm() / bnorm;
    res.rel_residual = true_rel;
    if (true_rel <= opts.rtol) {
      res.converged = true;
      return res;
    }
  }
  return res;
}

}  // namespace fluxfem
