// Copyright 2026 The MDGCL Authors
// SPDX-License-Identifier: Apache-2.0
//
// Feature dimension unification: truncated SVD fitted per graph, applied
// as X * V_k. The SVD is a one-sided (Hestenes) Jacobi iteration, fully
// deterministic: singular values sorted nonincreasing with stable ties,
// and a fixed sign convention per column.

#ifndef MDGCL_DIMRED_HPP
#define MDGCL_DIMRED_HPP

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <vector>

#include "mdgcl/errors.hpp"
#include "mdgcl/graph.hpp"

namespace mdgcl {

struct DimMap {
  int source_dim = 0;
  int target_dim = 0;
  Matrix projection;               // source_dim x target_dim, zero past rank
  std::vector<double> singular_values;  // length target_dim, zero-padded
};

namespace detail {

// In each column the entry of largest magnitude is made nonnegative;
// ties broken by the lowest row index.
inline void fix_column_sign(Eigen::Ref<Matrix> m, int col) {
  int arg = 0;
  double best = -1.0;
  for (int i = 0; i < m.rows(); ++i) {
    const double a = std::abs(m(i, col));
    if (a > best) {
      best = a;
      arg = i;
    }
  }
  if (m(arg, col) < 0.0) m.col(col) = -m.col(col);
}

}  // namespace detail

inline DimMap fit_map(const Matrix& x, int target_dim) {
  const int n = static_cast<int>(x.rows());
  const int d = static_cast<int>(x.cols());
  if (n < 1 || d < 1 || target_dim < 1)
    throw ValidationError("fit_map requires n >= 1, d >= 1, target_dim >= 1");

  Matrix a = x;                       // columns converge to u_j * sigma_j
  Matrix v = Matrix::Identity(d, d);  // accumulates right singular vectors

  const double eps = std::numeric_limits<double>::epsilon();
  const int max_sweeps = 64;
  for (int sweep = 0; sweep < max_sweeps; ++sweep) {
    bool rotated = false;
    for (int p = 0; p < d - 1; ++p) {
      for (int q = p + 1; q < d; ++q) {
        const double alpha = a.col(p).squaredNorm();
        const double beta = a.col(q).squaredNorm();
        const double gamma = a.col(p).dot(a.col(q));
        if (std::abs(gamma) <= eps * std::sqrt(alpha * beta) || gamma == 0.0) continue;
        rotated = true;
        const double zeta = (beta - alpha) / (2.0 * gamma);
        const double t = (zeta >= 0.0 ? 1.0 : -1.0) / (std::abs(zeta) + std::sqrt(1.0 + zeta * zeta));
        const double c = 1.0 / std::sqrt(1.0 + t * t);
        const double s = c * t;
        for (int i = 0; i < n; ++i) {
          const double ap = a(i, p), aq = a(i, q);
          a(i, p) = c * ap - s * aq;
          a(i, q) = s * ap + c * aq;
        }
        for (int i = 0; i < d; ++i) {
          const double vp = v(i, p), vq = v(i, q);
          v(i, p) = c * vp - s * vq;
          v(i, q) = s * vp + c * vq;
        }
      }
    }
    if (!rotated) break;
  }

  std::vector<double> sigma(d);
  for (int j = 0; j < d; ++j) sigma[j] = a.col(j).norm();
  std::vector<int> order(d);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&sigma](int i, int j) { return sigma[i] > sigma[j]; });

  const double sigma_max = d > 0 ? sigma[order[0]] : 0.0;
  const double rank_tol = std::max(n, d) * eps * sigma_max;

  DimMap map;
  map.source_dim = d;
  map.target_dim = target_dim;
  map.projection = Matrix::Zero(d, target_dim);
  map.singular_values.assign(target_dim, 0.0);
  const int keep = std::min(target_dim, d);
  for (int j = 0; j < keep; ++j) {
    const int src = order[j];
    if (sigma[src] <= rank_tol || sigma[src] == 0.0) break;  // zero columns past rank
    map.projection.col(j) = v.col(src);
    detail::fix_column_sign(map.projection, j);
    map.singular_values[j] = sigma[src];
  }
  return map;
}

inline Matrix apply_map(const Matrix& x, const DimMap& map) {
  if (x.cols() != map.source_dim)
    throw ValidationError("apply_map: X has " + std::to_string(x.cols()) +
                          " columns, map expects " + std::to_string(map.source_dim));
  return x * map.projection;
}

}  // namespace mdgcl

#endif  // MDGCL_DIMRED_HPP
