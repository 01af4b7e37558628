// Copyright 2026 The MDGCL Authors
// SPDX-License-Identifier: Apache-2.0
//
// Stochastic-block-model domain generator for desk-scale experiments.
// Two domains share a feature space exactly when they share
// basis_rotation_seed; differing seeds give orthogonally rotated
// community means.

#ifndef MDGCL_SYNTHETIC_HPP
#define MDGCL_SYNTHETIC_HPP

#include <cstdint>
#include <string>

#include "mdgcl/errors.hpp"
#include "mdgcl/graph.hpp"
#include "mdgcl/rng.hpp"

namespace mdgcl {

struct SynthDomainConfig {
  int num_nodes = 300;
  int num_communities = 3;
  double p_in = 0.1;
  double p_out = 0.01;
  int feature_dim = 32;
  std::uint64_t basis_rotation_seed = 0;
  double noise_std = 0.1;

  void validate() const {
    if (num_nodes < 1) throw ValidationError("num_nodes must be positive");
    if (num_communities < 1 || num_communities > num_nodes)
      throw ValidationError("num_communities must be in [1, num_nodes]");
    if (p_in < 0.0 || p_in > 1.0 || p_out < 0.0 || p_out > 1.0)
      throw ValidationError("edge probabilities must be in [0,1]");
    if (feature_dim < 1) throw ValidationError("feature_dim must be positive");
    if (noise_std < 0.0) throw ValidationError("noise_std must be nonnegative");
  }
};

// Deterministic orthogonal d x d basis: Gaussian matrix orthonormalized
// by modified Gram-Schmidt.
inline Matrix rotation_basis(int dim, std::uint64_t basis_seed) {
  Rng rng = derive_rng(basis_seed, "basis");
  Matrix q(dim, dim);
  for (int j = 0; j < dim; ++j)
    for (int i = 0; i < dim; ++i) q(i, j) = rng.normal();
  for (int j = 0; j < dim; ++j) {
    for (int k = 0; k < j; ++k) q.col(j) -= q.col(k).dot(q.col(j)) * q.col(k);
    const double norm = q.col(j).norm();
    if (norm < 1e-12) {
      // Degenerate draw; fall back to a unit vector.
      q.col(j).setZero();
      q(j % dim, j) = 1.0;
    } else {
      q.col(j) /= norm;
    }
  }
  return q;
}

inline FeatureGraph generate_synthetic_domain(const SynthDomainConfig& cfg, std::uint64_t seed) {
  cfg.validate();
  FeatureGraph g;
  g.num_nodes = cfg.num_nodes;
  g.labels.resize(cfg.num_nodes);
  for (int i = 0; i < cfg.num_nodes; ++i) g.labels[i] = i % cfg.num_communities;

  Rng edge_rng = derive_rng(seed, "edges");
  for (int u = 0; u < cfg.num_nodes; ++u) {
    for (int v = u + 1; v < cfg.num_nodes; ++v) {
      const double p = (g.labels[u] == g.labels[v]) ? cfg.p_in : cfg.p_out;
      if (edge_rng.uniform() < p) g.edges.emplace_back(u, v);
    }
  }

  const Matrix basis = rotation_basis(cfg.feature_dim, cfg.basis_rotation_seed);
  Rng feat_rng = derive_rng(seed, "features");
  g.features.resize(cfg.num_nodes, cfg.feature_dim);
  for (int i = 0; i < cfg.num_nodes; ++i) {
    const int community = g.labels[i];
    g.features.row(i) = basis.col(community % cfg.feature_dim).transpose();
    for (int k = 0; k < cfg.feature_dim; ++k)
      g.features(i, k) += cfg.noise_std * feat_rng.normal();
  }
  return g;
}

}  // namespace mdgcl

#endif  // MDGCL_SYNTHETIC_HPP
