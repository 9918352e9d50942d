#pragma once

#include <functional>

#include <Eigen/Dense>

namespace tnvqe {

struct TruncatedSvd {
  Eigen::MatrixXcd u;          // rows x k, orthonormal columns
  Eigen::VectorXd s;           // k singular values, descending
  Eigen::MatrixXcd v;          // cols x k, orthonormal columns; m ~ u s v^H
  double discarded_weight = 0.0;  // sum of squared discarded singular values
};

// Thin SVD keeping singular values s_k >= cutoff * s_max, then at most
// chi_max of them (always at least one). Each right singular vector is
// rotated so its largest-magnitude entry (first on ties) is real positive,
// and the matching left vector absorbs the same phase; this makes the
// factors reproducible for identical input bits.
TruncatedSvd truncated_svd(const Eigen::MatrixXcd& m, int chi_max, double cutoff);

// Fixes the phase convention above in place on an existing factorization.
void canonicalize_phases(Eigen::MatrixXcd& u, Eigen::MatrixXcd& v);

using LinearMap = std::function<void(const Eigen::VectorXcd& in, Eigen::VectorXcd& out)>;

struct EigenPair {
  double value = 0.0;
  Eigen::VectorXcd vector;
  double residual = 0.0;  // ||A x - value x|| for the normalized vector
  int iterations = 0;     // applications of A
  bool converged = false;
};

// Lowest eigenpair of a Hermitian map by explicitly restarted Lanczos with
// full reorthogonalization, started from `start` (any non-zero vector).
EigenPair lanczos_lowest(const LinearMap& apply, Eigen::VectorXcd start, double tol,
                         int max_krylov = 40, int max_restarts = 100);

}  // namespace tnvqe
