// Copyright 2026 The MDGCL Authors
// SPDX-License-Identifier: Apache-2.0
//
// Pre-training corpus construction: random-walk subgraphs, domain tokens
// (sum of dimension-unified features), merged sample graphs, and the full
// positive/negative pair set.

#ifndef MDGCL_CONTRASTIVE_HPP
#define MDGCL_CONTRASTIVE_HPP

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "mdgcl/errors.hpp"
#include "mdgcl/graph.hpp"
#include "mdgcl/rng.hpp"

namespace mdgcl {

struct Subgraph {
  FeatureGraph graph;                // features already width d~
  int parent_domain = 0;
  std::vector<int> source_node_ids;  // original ids in the parent graph
};

struct DomainToken {
  int domain_id = 0;
  Vector vector;
};

struct MergedSample {
  FeatureGraph graph;  // both subgraphs plus two token nodes
  int label = 0;       // 1 iff same domain
  std::pair<int, int> domain_pair;
  std::pair<int, int> token_node_ids;
};

struct PairPlan {
  int subgraphs_per_domain = 50;  // K
  int negatives_per_domain_pair = 0;  // N; 0 = class-balancing default
  int walk_length = 50;  // L

  void validate() const {
    if (subgraphs_per_domain < 2) throw ValidationError("K must be >= 2");
    if (walk_length < 1) throw ValidationError("walk length must be >= 1");
    if (negatives_per_domain_pair < 0) throw ValidationError("N must be >= 1");
    const long long k = subgraphs_per_domain;
    if (negatives_per_domain_pair > k * k)
      throw ValidationError("N exceeds K^2 distinct cross-domain index pairs");
  }
};

// N that balances positives and negatives: ceil(M*C(K,2) / C(M,2)),
// capped at K^2.
inline int default_negatives(int num_domains, int subgraphs_per_domain) {
  const long long m = num_domains, k = subgraphs_per_domain;
  const long long positives = m * (k * (k - 1) / 2);
  const long long domain_pairs = m * (m - 1) / 2;
  long long n = (positives + domain_pairs - 1) / domain_pairs;
  if (n > k * k) n = k * k;
  return static_cast<int>(std::max(1ll, n));
}

// Uniform start, L uniform neighbor steps (staying put at neighborless
// nodes); induced subgraph on distinct visited nodes in first-visit order.
inline Subgraph sample_subgraph(const FeatureGraph& g, int walk_length, Rng& rng) {
  if (g.num_nodes < 1) throw ValidationError("cannot sample from an empty graph");
  const auto adj = adjacency_lists(g);
  std::vector<bool> visited(g.num_nodes, false);
  std::vector<int> order;
  int current = rng.uniform_int(g.num_nodes);
  visited[current] = true;
  order.push_back(current);
  for (int step = 0; step < walk_length; ++step) {
    const auto& nbrs = adj[current];
    if (nbrs.empty()) continue;
    current = nbrs[rng.uniform_int(static_cast<int>(nbrs.size()))];
    if (!visited[current]) {
      visited[current] = true;
      order.push_back(current);
    }
  }
  Subgraph sub;
  sub.graph = induced_subgraph(g, order);
  sub.parent_domain = g.domain_id.value_or(0);
  sub.source_node_ids = order;
  return sub;
}

inline DomainToken build_domain_token(const Matrix& mapped_features, int domain_id) {
  if (mapped_features.rows() < 1) throw ValidationError("domain token of an empty matrix");
  DomainToken t;
  t.domain_id = domain_id;
  t.vector = mapped_features.colwise().sum().transpose();
  return t;
}

// Node order: a's nodes, b's nodes, token_a, token_b. Every subgraph node
// is linked to its own token and the tokens are linked to each other. Two
// token nodes are always instantiated, including for same-domain pairs.
inline MergedSample merge_pair(const Subgraph& a, const Subgraph& b, const DomainToken& token_a,
                               const DomainToken& token_b) {
  const int width = a.graph.feature_dim();
  if (b.graph.feature_dim() != width || token_a.vector.size() != width ||
      token_b.vector.size() != width)
    throw ValidationError("merge_pair: feature width mismatch");
  if (token_a.domain_id != a.parent_domain || token_b.domain_id != b.parent_domain)
    throw ValidationError("merge_pair: token does not match subgraph domain");

  const int na = a.graph.num_nodes;
  const int nb = b.graph.num_nodes;
  MergedSample sample;
  FeatureGraph& m = sample.graph;
  m.num_nodes = na + nb + 2;
  const int ta = na + nb;
  const int tb = na + nb + 1;
  m.edges = a.graph.edges;
  for (const auto& [u, v] : b.graph.edges) m.edges.emplace_back(na + u, na + v);
  for (int u = 0; u < na; ++u) m.edges.emplace_back(u, ta);
  for (int u = 0; u < nb; ++u) m.edges.emplace_back(na + u, tb);
  m.edges.emplace_back(ta, tb);
  m.features.resize(m.num_nodes, width);
  m.features.topRows(na) = a.graph.features;
  m.features.middleRows(na, nb) = b.graph.features;
  m.features.row(ta) = token_a.vector.transpose();
  m.features.row(tb) = token_b.vector.transpose();

  sample.label = (a.parent_domain == b.parent_domain) ? 1 : 0;
  sample.domain_pair = {a.parent_domain, b.parent_domain};
  sample.token_node_ids = {ta, tb};
  return sample;
}

// All C(K,2) same-domain positives per domain plus N distinct cross-domain
// negatives per domain pair, deterministically shuffled.
inline std::vector<MergedSample> build_training_set(const std::vector<FeatureGraph>& domains,
                                                    const PairPlan& plan, Rng& rng) {
  plan.validate();
  const int num_domains = static_cast<int>(domains.size());
  if (num_domains < 2) throw ValidationError("build_training_set needs at least 2 domains");
  const int k = plan.subgraphs_per_domain;
  const int negatives = plan.negatives_per_domain_pair > 0
                            ? plan.negatives_per_domain_pair
                            : default_negatives(num_domains, k);
  if (static_cast<long long>(negatives) > static_cast<long long>(k) * k)
    throw ValidationError("N exceeds K^2 distinct cross-domain index pairs");

  std::vector<std::vector<Subgraph>> subgraphs(num_domains);
  std::vector<DomainToken> tokens(num_domains);
  for (int i = 0; i < num_domains; ++i) {
    FeatureGraph tagged = domains[i];
    tagged.domain_id = domains[i].domain_id.value_or(i);
    tokens[i] = build_domain_token(tagged.features, *tagged.domain_id);
    subgraphs[i].reserve(k);
    for (int s = 0; s < k; ++s) subgraphs[i].push_back(sample_subgraph(tagged, plan.walk_length, rng));
  }

  std::vector<MergedSample> out;
  for (int i = 0; i < num_domains; ++i)
    for (int m = 0; m < k; ++m)
      for (int n = m + 1; n < k; ++n)
        out.push_back(merge_pair(subgraphs[i][m], subgraphs[i][n], tokens[i], tokens[i]));
  for (int i = 0; i < num_domains; ++i) {
    for (int j = i + 1; j < num_domains; ++j) {
      const auto picks = rng.sample_without_replacement(
          static_cast<std::uint64_t>(k) * k, static_cast<std::uint64_t>(negatives));
      for (auto idx : picks) {
        const int m = static_cast<int>(idx / k);
        const int n = static_cast<int>(idx % k);
        out.push_back(merge_pair(subgraphs[i][m], subgraphs[j][n], tokens[i], tokens[j]));
      }
    }
  }
  rng.shuffle(out);
  return out;
}

}  // namespace mdgcl

#endif  // MDGCL_CONTRASTIVE_HPP
