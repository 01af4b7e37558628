// Copyright 2026 The MDGCL Authors
// SPDX-License-Identifier: Apache-2.0
//
// Graph container and the structural primitives every other module builds
// on: GCN adjacency normalization, sum readout, induced subgraphs and ego
// networks. Graphs are undirected; edges are stored deduplicated with
// u < v. All types are immutable after construction.

#ifndef MDGCL_GRAPH_HPP
#define MDGCL_GRAPH_HPP

#include <Eigen/Dense>
#include <Eigen/Sparse>
#include <algorithm>
#include <optional>
#include <queue>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "mdgcl/errors.hpp"

namespace mdgcl {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using SparseMatrix = Eigen::SparseMatrix<double, Eigen::RowMajor>;

constexpr int kNoLabel = -1;

struct FeatureGraph {
  int num_nodes = 0;
  std::vector<std::pair<int, int>> edges;  // canonical u < v, no duplicates
  Matrix features;                         // num_nodes x d
  std::vector<int> labels;                 // empty = unlabeled graph; kNoLabel = missing entry
  std::optional<int> domain_id;

  int feature_dim() const { return static_cast<int>(features.cols()); }
  bool has_labels() const { return !labels.empty(); }

  void validate() const {
    if (num_nodes < 0) throw ValidationError("num_nodes must be nonnegative");
    if (features.rows() != num_nodes)
      throw ValidationError("feature row count " + std::to_string(features.rows()) +
                            " != num_nodes " + std::to_string(num_nodes));
    if (!labels.empty() && static_cast<int>(labels.size()) != num_nodes)
      throw ValidationError("labels length != num_nodes");
    std::set<std::pair<int, int>> seen;
    for (const auto& [u, v] : edges) {
      if (u < 0 || v < 0 || u >= num_nodes || v >= num_nodes)
        throw ValidationError("edge (" + std::to_string(u) + "," + std::to_string(v) +
                              ") endpoint out of range for " + std::to_string(num_nodes) +
                              " nodes");
      if (u == v) throw ValidationError("self-loop stored at node " + std::to_string(u));
      if (u > v) throw ValidationError("edge not canonical (u<v)");
      if (!seen.insert({u, v}).second) throw ValidationError("duplicate edge");
    }
    if (!features.allFinite()) throw ValidationError("non-finite feature values");
  }
};

// Canonicalizes, drops self-loops and duplicates.
inline std::vector<std::pair<int, int>> canonical_edges(
    const std::vector<std::pair<int, int>>& raw) {
  std::set<std::pair<int, int>> dedup;
  for (const auto& [u, v] : raw) {
    if (u == v) continue;
    dedup.insert({std::min(u, v), std::max(u, v)});
  }
  return {dedup.begin(), dedup.end()};
}

inline std::vector<std::vector<int>> adjacency_lists(const FeatureGraph& g) {
  std::vector<std::vector<int>> adj(g.num_nodes);
  for (const auto& [u, v] : g.edges) {
    adj[u].push_back(v);
    adj[v].push_back(u);
  }
  for (auto& nbrs : adj) std::sort(nbrs.begin(), nbrs.end());
  return adj;
}

struct NormalizedAdjacency {
  int num_nodes = 0;
  SparseMatrix mat;  // D^{-1/2} (A+I) D^{-1/2}, symmetric, entries > 0
};

inline NormalizedAdjacency normalize_adjacency(const FeatureGraph& g) {
  std::vector<int> degree(g.num_nodes, 0);
  for (const auto& [u, v] : g.edges) {
    ++degree[u];
    ++degree[v];
  }
  std::vector<Eigen::Triplet<double>> entries;
  entries.reserve(g.edges.size() * 2 + g.num_nodes);
  auto weight = [&degree](int u, int v) {
    return 1.0 / std::sqrt((degree[u] + 1.0) * (degree[v] + 1.0));
  };
  for (int u = 0; u < g.num_nodes; ++u) entries.emplace_back(u, u, weight(u, u));
  for (const auto& [u, v] : g.edges) {
    entries.emplace_back(u, v, weight(u, v));
    entries.emplace_back(v, u, weight(v, u));
  }
  NormalizedAdjacency out;
  out.num_nodes = g.num_nodes;
  out.mat.resize(g.num_nodes, g.num_nodes);
  out.mat.setFromTriplets(entries.begin(), entries.end());
  return out;
}

inline Vector readout_sum(const Matrix& h, const std::vector<int>& nodes) {
  if (nodes.empty()) throw ValidationError("readout over empty node set");
  Vector out = Vector::Zero(h.cols());
  for (int id : nodes) {
    if (id < 0 || id >= h.rows()) throw ValidationError("readout node id out of range");
    out += h.row(id).transpose();
  }
  return out;
}

inline Vector readout_sum_all(const Matrix& h) {
  if (h.rows() == 0) throw ValidationError("readout over empty matrix");
  return h.colwise().sum().transpose();
}

// New graph over `nodes`, re-indexed 0..k-1 in the given order. Node ids
// must be distinct and valid.
inline FeatureGraph induced_subgraph(const FeatureGraph& g, const std::vector<int>& nodes) {
  if (nodes.empty()) throw ValidationError("induced_subgraph on empty node set");
  std::vector<int> remap(g.num_nodes, -1);
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    const int id = nodes[i];
    if (id < 0 || id >= g.num_nodes) throw ValidationError("subgraph node id out of range");
    if (remap[id] != -1) throw ValidationError("duplicate node id in subgraph set");
    remap[id] = static_cast<int>(i);
  }
  FeatureGraph out;
  out.num_nodes = static_cast<int>(nodes.size());
  for (const auto& [u, v] : g.edges) {
    if (remap[u] >= 0 && remap[v] >= 0) {
      const int a = remap[u], b = remap[v];
      out.edges.emplace_back(std::min(a, b), std::max(a, b));
    }
  }
  std::sort(out.edges.begin(), out.edges.end());
  out.features.resize(out.num_nodes, g.features.cols());
  for (std::size_t i = 0; i < nodes.size(); ++i) out.features.row(i) = g.features.row(nodes[i]);
  if (g.has_labels()) {
    out.labels.resize(nodes.size());
    for (std::size_t i = 0; i < nodes.size(); ++i) out.labels[i] = g.labels[nodes[i]];
  }
  out.domain_id = g.domain_id;
  return out;
}

// Nodes within `hops` of `center`, BFS order (center first, then by hop
// and node id), plus the new index of the center (always 0).
inline std::vector<int> ego_node_set(const FeatureGraph& g, int center, int hops) {
  if (center < 0 || center >= g.num_nodes) throw ValidationError("ego center out of range");
  if (hops < 0) throw ValidationError("negative hop count");
  const auto adj = adjacency_lists(g);
  std::vector<int> dist(g.num_nodes, -1);
  std::vector<int> order;
  std::queue<int> frontier;
  dist[center] = 0;
  frontier.push(center);
  while (!frontier.empty()) {
    const int u = frontier.front();
    frontier.pop();
    order.push_back(u);
    if (dist[u] == hops) continue;
    for (int v : adj[u]) {
      if (dist[v] == -1) {
        dist[v] = dist[u] + 1;
        frontier.push(v);
      }
    }
  }
  return order;
}

inline FeatureGraph ego_network(const FeatureGraph& g, int center, int hops) {
  return induced_subgraph(g, ego_node_set(g, center, hops));
}

}  // namespace mdgcl

#endif  // MDGCL_GRAPH_HPP
