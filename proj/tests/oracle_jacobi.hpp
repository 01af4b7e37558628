// Copyright 2026 The MDGCL Authors
// SPDX-License-Identifier: Apache-2.0
//
// Test-only oracle: cyclic two-sided Jacobi eigendecomposition of the
// Gram matrix X^T X. Independent of the one-sided SVD used by the
// library; singular values are the square roots of the eigenvalues.

#ifndef MDGCL_TESTS_ORACLE_JACOBI_HPP
#define MDGCL_TESTS_ORACLE_JACOBI_HPP

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <vector>

namespace mdgcl_test {

// Eigenvalues of a symmetric matrix, descending, by cyclic Jacobi
// rotations on the full matrix.
inline std::vector<double> jacobi_eigenvalues(Eigen::MatrixXd s) {
  const int n = static_cast<int>(s.rows());
  for (int sweep = 0; sweep < 100; ++sweep) {
    double off = 0.0;
    for (int p = 0; p < n; ++p)
      for (int q = p + 1; q < n; ++q) off += s(p, q) * s(p, q);
    if (off < 1e-30) break;
    for (int p = 0; p < n - 1; ++p) {
      for (int q = p + 1; q < n; ++q) {
        if (s(p, q) == 0.0) continue;
        const double theta = (s(q, q) - s(p, p)) / (2.0 * s(p, q));
        const double t =
            (theta >= 0.0 ? 1.0 : -1.0) / (std::abs(theta) + std::sqrt(1.0 + theta * theta));
        const double c = 1.0 / std::sqrt(1.0 + t * t);
        const double sn = c * t;
        Eigen::MatrixXd rot = Eigen::MatrixXd::Identity(n, n);
        rot(p, p) = c;
        rot(q, q) = c;
        rot(p, q) = sn;
        rot(q, p) = -sn;
        s = rot.transpose() * s * rot;
      }
    }
  }
  std::vector<double> eig(n);
  for (int i = 0; i < n; ++i) eig[i] = s(i, i);
  std::sort(eig.begin(), eig.end(), std::greater<>());
  return eig;
}

// Singular values of X (descending), via the Gram-matrix oracle.
inline std::vector<double> oracle_singular_values(const Eigen::MatrixXd& x) {
  auto eig = jacobi_eigenvalues(x.transpose() * x);
  // Eigenvalues that are zero in exact arithmetic come back as O(eps)
  // noise; taking square roots would inflate that to O(sqrt(eps)), so
  // clamp below a rank tolerance first.
  const double lmax = eig.empty() ? 0.0 : std::max(0.0, eig.front());
  const double tol = std::max(x.rows(), x.cols()) * 1e-15 * lmax;
  for (auto& e : eig) e = e > tol ? std::sqrt(e) : 0.0;
  return eig;
}

// Optimal rank-k Frobenius approximation error (Eckart-Young):
// sqrt(sum of squared singular values past the first k).
inline double oracle_rank_k_error(const Eigen::MatrixXd& x, int k) {
  const auto sv = oracle_singular_values(x);
  double sum = 0.0;
  for (std::size_t i = k; i < sv.size(); ++i) sum += sv[i] * sv[i];
  return std::sqrt(sum);
}

}  // namespace mdgcl_test

#endif  // MDGCL_TESTS_ORACLE_JACOBI_HPP
