// Copyright 2026 The MDGCL Authors
// SPDX-License-Identifier: Apache-2.0
//
// Built-in gradient verification fixtures: the full pre-training loss and
// the full fine-tuning loss (attention included) on small synthetic
// domains, checked against central finite differences.

#ifndef MDGCL_VERIFY_HPP
#define MDGCL_VERIFY_HPP

#include <cstdint>
#include <vector>

#include "mdgcl/contrastive.hpp"
#include "mdgcl/dimred.hpp"
#include "mdgcl/neural.hpp"
#include "mdgcl/pipeline.hpp"
#include "mdgcl/synthetic.hpp"

namespace mdgcl {

struct VerifyFixtureConfig {
  int dim_target = 10;
  int hidden = 16;
  int num_heads = 2;
  int walk_length = 7;  // ~8-node subgraphs
  double fd_step = 1e-5;
};

namespace detail {

inline std::vector<FeatureGraph> verify_domains(std::uint64_t seed) {
  SynthDomainConfig cfg;
  cfg.num_nodes = 24;
  cfg.num_communities = 2;
  cfg.p_in = 0.4;
  cfg.p_out = 0.1;
  cfg.feature_dim = 12;
  cfg.noise_std = 0.2;
  std::vector<FeatureGraph> domains;
  for (int i = 0; i < 2; ++i) {
    cfg.basis_rotation_seed = 100 + i;
    FeatureGraph g = generate_synthetic_domain(cfg, derive_seed(seed, i == 0 ? "d0" : "d1"));
    g.domain_id = i;
    domains.push_back(std::move(g));
  }
  return domains;
}

}  // namespace detail

// Mean Eq.-(4)-style cross-entropy over a handful of merged pairs,
// differentiated with respect to W1, W2 and the pre-training head.
inline GradCheckReport verify_pretrain_gradients(std::uint64_t seed,
                                                 const VerifyFixtureConfig& fix = {}) {
  auto domains = detail::verify_domains(seed);
  std::vector<DimMap> maps;
  std::vector<DomainToken> tokens;
  for (auto& g : domains) {
    maps.push_back(fit_map(g.features, fix.dim_target));
    g.features = apply_map(g.features, maps.back());
    tokens.push_back(build_domain_token(g.features, *g.domain_id));
  }

  Rng walk_rng = derive_rng(seed, "verify-walks");
  std::vector<Subgraph> subs;
  for (const auto& g : domains)
    for (int s = 0; s < 2; ++s) subs.push_back(sample_subgraph(g, fix.walk_length, walk_rng));
  std::vector<MergedSample> samples = {
      merge_pair(subs[0], subs[1], tokens[0], tokens[0]),
      merge_pair(subs[2], subs[3], tokens[1], tokens[1]),
      merge_pair(subs[0], subs[2], tokens[0], tokens[1]),
      merge_pair(subs[1], subs[3], tokens[0], tokens[1]),
  };
  std::vector<NormalizedAdjacency> adjs;
  for (const auto& s : samples) adjs.push_back(normalize_adjacency(s.graph));

  Rng init_rng = derive_rng(seed, "verify-init");
  GcnParams gcn = GcnParams::init(fix.dim_target, fix.hidden, init_rng);
  ProjHead proj = ProjHead::init(fix.hidden, 2, init_rng);

  auto loss = [&]() {
    double total = 0.0;
    for (std::size_t i = 0; i < samples.size(); ++i) {
      const Matrix h = gcn_forward(adjs[i], samples[i].graph.features, gcn);
      total += cross_entropy(proj.logits(readout_sum_all(h)), samples[i].label).loss;
    }
    return total / samples.size();
  };

  Matrix dw1 = Matrix::Zero(gcn.w1.rows(), gcn.w1.cols());
  Matrix dw2 = Matrix::Zero(gcn.w2.rows(), gcn.w2.cols());
  Matrix dwp = Matrix::Zero(proj.w.rows(), proj.w.cols());
  const double inv = 1.0 / samples.size();
  for (std::size_t i = 0; i < samples.size(); ++i) {
    GcnCache cache;
    const Matrix h = gcn_forward(adjs[i], samples[i].graph.features, gcn, &cache);
    const Vector readout = readout_sum_all(h);
    const auto ce = cross_entropy(proj.logits(readout), samples[i].label);
    dwp += inv * readout * ce.dlogits.transpose();
    const Vector dr = proj.w * ce.dlogits;
    const Matrix dh = dr.transpose().replicate(h.rows(), 1);
    const GcnGrads g = gcn_backward(adjs[i], gcn, cache, dh);
    dw1 += inv * g.dw1;
    dw2 += inv * g.dw2;
  }

  const std::vector<ParamRef> params = {{"gcn.W1", &gcn.w1, &dw1},
                                        {"gcn.W2", &gcn.w2, &dw2},
                                        {"proj_pre.W", &proj.w, &dwp}};
  return grad_check(loss, params, fix.fd_step);
}

// Mean Eq.-(8)-style loss on a node-classification target with domain
// attention, differentiated with respect to the GCN, the fine-tune head,
// and all attention parameters.
inline GradCheckReport verify_finetune_gradients(std::uint64_t seed,
                                                 const VerifyFixtureConfig& fix = {}) {
  auto domains = detail::verify_domains(seed);
  std::vector<DomainToken> tokens;
  for (auto& g : domains) {
    g.features = apply_map(g.features, fit_map(g.features, fix.dim_target));
    tokens.push_back(build_domain_token(g.features, *g.domain_id));
  }

  SynthDomainConfig tcfg;
  tcfg.num_nodes = 20;
  tcfg.num_communities = 2;
  tcfg.p_in = 0.4;
  tcfg.p_out = 0.1;
  tcfg.feature_dim = 12;
  tcfg.basis_rotation_seed = 100;
  tcfg.noise_std = 0.2;
  const FeatureGraph target = generate_synthetic_domain(tcfg, derive_seed(seed, "target"));
  const NormalizedAdjacency adj = normalize_adjacency(target);
  const Matrix mapped = apply_map(target.features, fit_map(target.features, fix.dim_target));

  Rng init_rng = derive_rng(seed, "verify-ft-init");
  GcnParams gcn = GcnParams::init(fix.dim_target, fix.hidden, init_rng);
  AttentionParams theta = AttentionParams::init(fix.dim_target, fix.num_heads, init_rng);
  ProjHead proj = ProjHead::init(fix.hidden, 2, init_rng);

  std::vector<int> train_ids = {0, 1, 2, 3, 4, 5};
  auto loss = [&]() {
    const Matrix xstar = attention_enhance(mapped, tokens, theta);
    const Matrix h = gcn_forward(adj, xstar, gcn);
    double total = 0.0;
    for (int id : train_ids)
      total += cross_entropy(proj.logits(h.row(id).transpose()), target.labels[id]).loss;
    return total / train_ids.size();
  };

  AttentionCache attn_cache;
  const Matrix xstar = attention_enhance(mapped, tokens, theta, &attn_cache);
  GcnCache cache;
  const Matrix h = gcn_forward(adj, xstar, gcn, &cache);
  Matrix dh = Matrix::Zero(h.rows(), h.cols());
  Matrix dwp = Matrix::Zero(proj.w.rows(), proj.w.cols());
  const double inv = 1.0 / train_ids.size();
  for (int id : train_ids) {
    const auto ce = cross_entropy(proj.logits(h.row(id).transpose()), target.labels[id]);
    dwp += inv * h.row(id).transpose() * ce.dlogits.transpose();
    dh.row(id) += inv * (proj.w * ce.dlogits).transpose();
  }
  const GcnGrads g = gcn_backward(adj, gcn, cache, dh, true);
  const AttentionGrads ag = attention_backward(mapped, tokens, theta, attn_cache, g.dx);

  std::vector<ParamRef> params = {{"gcn.W1", &gcn.w1, &g.dw1},
                                  {"gcn.W2", &gcn.w2, &g.dw2},
                                  {"proj_ft.W", &proj.w, &dwp}};
  for (std::size_t k = 0; k < theta.heads.size(); ++k) {
    const std::string prefix = "attn.h" + std::to_string(k) + ".";
    params.push_back({prefix + "Wq", &theta.heads[k].wq, &ag.heads[k].wq});
    params.push_back({prefix + "Wk", &theta.heads[k].wk, &ag.heads[k].wk});
    params.push_back({prefix + "Wv", &theta.heads[k].wv, &ag.heads[k].wv});
  }
  return grad_check(loss, params, fix.fd_step);
}

}  // namespace mdgcl

#endif  // MDGCL_VERIFY_HPP
