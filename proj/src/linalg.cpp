#include "tnvqe/linalg.hpp"

#include <algorithm>
#include <vector>

#include "tnvqe/errors.hpp"

namespace tnvqe {

void canonicalize_phases(Eigen::MatrixXcd& u, Eigen::MatrixXcd& v) {
  for (Eigen::Index k = 0; k < v.cols(); ++k) {
    Eigen::Index best = 0;
    double best_abs = -1.0;
    for (Eigen::Index i = 0; i < v.rows(); ++i) {
      const double a = std::abs(v(i, k));
      if (a > best_abs) {
        best_abs = a;
        best = i;
      }
    }
    if (best_abs <= 0.0) continue;
    const std::complex<double> phase = std::conj(v(best, k)) / best_abs;
    v.col(k) *= phase;
    u.col(k) *= phase;
  }
}

TruncatedSvd truncated_svd(const Eigen::MatrixXcd& m, int chi_max, double cutoff) {
  Eigen::BDCSVD<Eigen::MatrixXcd> svd(m, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const Eigen::VectorXd& sv = svd.singularValues();
  const Eigen::Index full = sv.size();
  Eigen::Index keep = 0;
  const double s_max = full > 0 ? sv(0) : 0.0;
  while (keep < full && sv(keep) >= cutoff * s_max && sv(keep) > 0.0) ++keep;
  keep = std::clamp<Eigen::Index>(keep, 1, std::max<Eigen::Index>(1, std::min<Eigen::Index>(full, chi_max)));
  TruncatedSvd out;
  out.u = svd.matrixU().leftCols(keep);
  out.s = sv.head(keep);
  out.v = svd.matrixV().leftCols(keep);
  out.discarded_weight = sv.tail(full - keep).squaredNorm();
  canonicalize_phases(out.u, out.v);
  return out;
}


EigenPair lanczos_lowest(const LinearMap& apply, Eigen::VectorXcd start, double tol, int max_krylov,
                         int max_restarts) {
  const double n0 = start.norm();
  if (!(n0 > 0.0)) throw DomainError("Lanczos start vector is zero");
  EigenPair out;
  out.vector = start / n0;
  const Eigen::Index dim = start.size();
  const int m = static_cast<int>(std::min<Eigen::Index>(std::max(max_krylov, 2), dim));
  Eigen::VectorXcd w(dim), r(dim);
  for (int restart = 0; restart <= max_restarts; ++restart) {
    std::vector<Eigen::VectorXcd> basis{out.vector};
    std::vector<double> alpha, beta;
    for (int j = 0; j < m; ++j) {
      apply(basis[j], w);
      ++out.iterations;
      const double a = basis[j].dot(w).real();
      alpha.push_back(a);
      // Two passes of classical Gram-Schmidt against the whole basis.
      for (int pass = 0; pass < 2; ++pass) {
        for (const auto& v : basis) w -= v.dot(w) * v;
      }
      const double b = w.norm();
      if (j + 1 == m || b <= 1e-14 * std::max(1.0, std::abs(a))) break;
      beta.push_back(b);
      basis.push_back(w / b);
    }
    const int k = static_cast<int>(alpha.size());
    Eigen::MatrixXd t = Eigen::MatrixXd::Zero(k, k);
    for (int i = 0; i < k; ++i) {
      t(i, i) = alpha[i];
      if (i + 1 < k) t(i, i + 1) = t(i + 1, i) = beta[i];
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(t);
    const Eigen::VectorXd y = eig.eigenvectors().col(0);
    Eigen::VectorXcd x = Eigen::VectorXcd::Zero(dim);
    for (int i = 0; i < k; ++i) x += y(i) * basis[i];
    x.normalize();
    apply(x, r);
    ++out.iterations;
    out.value = x.dot(r).real();
    r -= out.value * x;
    out.vector = std::move(x);
    out.residual = r.norm();
    if (out.residual < tol) {
      out.converged = true;
      return out;
    }
  }
  return out;
}

}  // namespace tnvqe
