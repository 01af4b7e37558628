// Copyright 2026 The MDGCL Authors
// SPDX-License-Identifier: Apache-2.0
//
// Orchestration: multi-domain contrastive pre-training, few-shot split
// construction, target feature enhancement, fine-tuning with a
// from-scratch comparison arm, metrics, and the domain-separation
// statistic.

#ifndef MDGCL_PIPELINE_HPP
#define MDGCL_PIPELINE_HPP

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "mdgcl/checkpoint.hpp"
#include "mdgcl/contrastive.hpp"
#include "mdgcl/dimred.hpp"
#include "mdgcl/errors.hpp"
#include "mdgcl/graph.hpp"
#include "mdgcl/neural.hpp"
#include "mdgcl/rng.hpp"

namespace mdgcl {

struct Metrics {
  double accuracy = 0.0;
  double macro_f1 = 0.0;
};

struct PretrainConfig {
  int epochs = 100;
  int batch_size = 64;
  double lr = 1e-4;
  int dim_target = 50;  // d~
  int hidden = 256;
  PairPlan plan;  // K=50, L=50, N auto by default
  std::uint64_t seed = 0;
  // Monitoring (off by default): hold out a fraction of merged pairs and
  // stop early once holdout accuracy reaches the target.
  double holdout_fraction = 0.0;
  double early_stop_accuracy = 0.0;

  void validate() const {
    if (epochs < 1 || batch_size < 1 || dim_target < 1 || hidden < 1)
      throw ValidationError("pretrain config counts must be positive");
    if (lr <= 0.0) throw ValidationError("learning rate must be positive");
    if (holdout_fraction < 0.0 || holdout_fraction >= 1.0)
      throw ValidationError("holdout_fraction must be in [0,1)");
    plan.validate();
  }
};

struct PretrainResult {
  Checkpoint checkpoint;
  std::vector<double> epoch_loss;
  std::vector<double> holdout_accuracy;  // empty unless holdout enabled
};

namespace detail {

struct PreparedSample {
  NormalizedAdjacency adj;
  Matrix features;
  int label = 0;
};

inline Vector merged_logits(const PreparedSample& s, const GcnParams& gcn, const ProjHead& proj,
                            SumGcnCache* cache = nullptr, Vector* readout = nullptr) {
  Vector r = gcn_sum_readout(s.adj, s.features, gcn, cache);
  Vector logits = proj.logits(r);
  if (readout) *readout = std::move(r);
  return logits;
}

}  // namespace detail

inline std::vector<std::string> checkpoint_token_names(const Checkpoint& ckpt) {
  std::vector<std::string> names;
  for (int i = 0; ckpt.has("token." + std::to_string(i)); ++i)
    names.push_back("token." + std::to_string(i));
  if (names.empty()) throw ValidationError("checkpoint holds no domain tokens");
  return names;
}

inline std::vector<DomainToken> checkpoint_tokens(const Checkpoint& ckpt) {
  std::vector<DomainToken> tokens;
  for (const auto& name : checkpoint_token_names(ckpt)) {
    DomainToken t;
    t.domain_id = static_cast<int>(tokens.size());
    t.vector = ckpt.at(name).to_vector();
    tokens.push_back(std::move(t));
  }
  return tokens;
}

inline DimMap dimmap_from_tensor(const Tensor& proj_tensor, const Tensor& sv_tensor) {
  DimMap map;
  map.projection = proj_tensor.to_matrix();
  map.source_dim = static_cast<int>(map.projection.rows());
  map.target_dim = static_cast<int>(map.projection.cols());
  map.singular_values = sv_tensor.data;
  return map;
}

// Trains GCN + pre-training head to classify same-domain vs cross-domain
// merged pairs (binary cross-entropy over the full merged-graph readout,
// token nodes included).
inline PretrainResult pretrain(const std::vector<FeatureGraph>& domains,
                               const PretrainConfig& cfg) {
  cfg.validate();
  if (domains.size() < 2) throw ValidationError("pretrain requires at least 2 domains");
  for (std::size_t i = 0; i < domains.size(); ++i)
    if (domains[i].num_nodes == 0)
      throw ValidationError("domain " + std::to_string(i) + " has zero nodes");

  const int num_domains = static_cast<int>(domains.size());
  std::vector<DimMap> maps(num_domains);
  std::vector<FeatureGraph> mapped(num_domains);
  for (int i = 0; i < num_domains; ++i) {
    maps[i] = fit_map(domains[i].features, cfg.dim_target);
    mapped[i] = domains[i];
    mapped[i].features = apply_map(domains[i].features, maps[i]);
    mapped[i].domain_id = i;
  }

  Rng sample_rng = derive_rng(cfg.seed, "sampling");
  const std::vector<MergedSample> merged = build_training_set(mapped, cfg.plan, sample_rng);

  std::vector<detail::PreparedSample> samples;
  samples.reserve(merged.size());
  for (const auto& s : merged)
    samples.push_back({normalize_adjacency(s.graph), s.graph.features, s.label});

  const int holdout = static_cast<int>(cfg.holdout_fraction * static_cast<double>(samples.size()));
  const int train_count = static_cast<int>(samples.size()) - holdout;
  if (train_count < 1) throw ValidationError("holdout leaves no training samples");

  Rng init_rng = derive_rng(cfg.seed, "init");
  GcnParams gcn = GcnParams::init(cfg.dim_target, cfg.hidden, init_rng);
  ProjHead proj = ProjHead::init(cfg.hidden, 2, init_rng);

  AdamState opt;
  opt.lr = cfg.lr;
  std::vector<Matrix*> params = {&gcn.w1, &gcn.w2, &proj.w};

  Rng batch_rng = derive_rng(cfg.seed, "batches");
  std::vector<int> order(train_count);
  for (int i = 0; i < train_count; ++i) order[i] = i;

  PretrainResult result;
  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    batch_rng.shuffle(order);
    double epoch_loss = 0.0;
    for (int start = 0; start < train_count; start += cfg.batch_size) {
      const int end = std::min(train_count, start + cfg.batch_size);
      const double inv = 1.0 / (end - start);
      Matrix dw1 = Matrix::Zero(gcn.w1.rows(), gcn.w1.cols());
      Matrix dw2 = Matrix::Zero(gcn.w2.rows(), gcn.w2.cols());
      Matrix dwp = Matrix::Zero(proj.w.rows(), proj.w.cols());
      for (int idx = start; idx < end; ++idx) {
        const auto& s = samples[order[idx]];
        SumGcnCache cache;
        Vector readout;
        const Vector logits = detail::merged_logits(s, gcn, proj, &cache, &readout);
        const auto ce = cross_entropy(logits, s.label);
        epoch_loss += ce.loss;
        dwp += inv * readout * ce.dlogits.transpose();
        const Vector dr = proj.w * ce.dlogits;
        gcn_sum_backward(s.adj, s.features, gcn, cache, dr, inv, dw1, dw2);
      }
      if (!std::isfinite(epoch_loss)) throw NumericError("non-finite pre-training loss");
      adam_step(opt, params, {&dw1, &dw2, &dwp});
    }
    result.epoch_loss.push_back(epoch_loss / train_count);

    if (holdout > 0) {
      int correct = 0;
      for (int i = train_count; i < static_cast<int>(samples.size()); ++i) {
        const Vector logits = detail::merged_logits(samples[i], gcn, proj);
        if (argmax(logits) == samples[i].label) ++correct;
      }
      const double acc = static_cast<double>(correct) / holdout;
      result.holdout_accuracy.push_back(acc);
      if (cfg.early_stop_accuracy > 0.0 && acc >= cfg.early_stop_accuracy) break;
    }
  }

  Checkpoint ckpt;
  ckpt.tensors["gcn.W1"] = Tensor::from_matrix(gcn.w1);
  ckpt.tensors["gcn.W2"] = Tensor::from_matrix(gcn.w2);
  ckpt.tensors["proj_pre.W"] = Tensor::from_matrix(proj.w);
  for (int i = 0; i < num_domains; ++i) {
    const Vector token = mapped[i].features.colwise().sum().transpose();
    ckpt.tensors["token." + std::to_string(i)] = Tensor::from_vector(token);
    ckpt.tensors["vmap." + std::to_string(i)] = Tensor::from_matrix(maps[i].projection);
  }
  ckpt.tensors["cfg.pretrain"] = Tensor::from_scalars(
      {static_cast<double>(cfg.dim_target), static_cast<double>(cfg.hidden),
       static_cast<double>(cfg.plan.subgraphs_per_domain),
       static_cast<double>(cfg.plan.walk_length),
       static_cast<double>(cfg.plan.negatives_per_domain_pair), static_cast<double>(cfg.epochs),
       static_cast<double>(cfg.batch_size), static_cast<double>(cfg.seed), cfg.lr});
  result.checkpoint = std::move(ckpt);
  return result;
}

// ---------------------------------------------------------------------------
// Few-shot splits.

struct FewShotSplit {
  std::vector<int> train_ids;
  std::vector<int> val_ids;
  std::vector<int> test_ids;
  int shots = 0;
};

inline FewShotSplit few_shot_split(const std::vector<int>& labels, int shots, Rng& rng) {
  if (shots < 1) throw ValidationError("shots must be >= 1");
  std::map<int, std::vector<int>> by_class;
  for (std::size_t i = 0; i < labels.size(); ++i)
    if (labels[i] != kNoLabel) by_class[labels[i]].push_back(static_cast<int>(i));
  if (by_class.empty()) throw ValidationError("no labeled nodes");

  FewShotSplit split;
  split.shots = shots;
  std::vector<int> rest;
  for (auto& [cls, ids] : by_class) {
    if (static_cast<int>(ids.size()) < shots)
      throw ValidationError("class " + std::to_string(cls) + " has only " +
                            std::to_string(ids.size()) + " instances, need " +
                            std::to_string(shots));
    rng.shuffle(ids);
    split.train_ids.insert(split.train_ids.end(), ids.begin(), ids.begin() + shots);
    rest.insert(rest.end(), ids.begin() + shots, ids.end());
  }
  rng.shuffle(rest);
  const long long n_rest = static_cast<long long>(rest.size());
  long long n_val = n_rest == 0 ? 0 : std::max(1ll, std::llround(n_rest / 10.0));
  if (n_val > n_rest) n_val = n_rest;
  split.val_ids.assign(rest.begin(), rest.begin() + n_val);
  split.test_ids.assign(rest.begin() + n_val, rest.end());
  return split;
}

// ---------------------------------------------------------------------------
// Metrics.

inline Metrics evaluate_metrics(const std::vector<int>& preds, const std::vector<int>& truth,
                                int num_classes) {
  if (preds.size() != truth.size() || preds.empty())
    throw ValidationError("evaluate_metrics: prediction/truth length mismatch or empty");
  for (std::size_t i = 0; i < preds.size(); ++i)
    if (preds[i] < 0 || preds[i] >= num_classes || truth[i] < 0 || truth[i] >= num_classes)
      throw ValidationError("evaluate_metrics: class id out of range");
  int correct = 0;
  std::vector<int> tp(num_classes, 0), fp(num_classes, 0), fn(num_classes, 0);
  for (std::size_t i = 0; i < preds.size(); ++i) {
    if (preds[i] == truth[i]) {
      ++correct;
      ++tp[preds[i]];
    } else {
      ++fp[preds[i]];
      ++fn[truth[i]];
    }
  }
  Metrics m;
  m.accuracy = static_cast<double>(correct) / preds.size();
  double f1_sum = 0.0;
  for (int c = 0; c < num_classes; ++c) {
    const double denom = 2.0 * tp[c] + fp[c] + fn[c];
    f1_sum += denom > 0.0 ? 2.0 * tp[c] / denom : 0.0;
  }
  m.macro_f1 = f1_sum / num_classes;
  return m;
}

// ---------------------------------------------------------------------------
// Target enhancement (Map + domain-level attention).

inline Matrix enhance_target(const FeatureGraph& target, const Checkpoint& ckpt,
                             const AttentionParams& theta, AttentionCache* cache = nullptr,
                             DimMap* fitted_map = nullptr) {
  const auto tokens = checkpoint_tokens(ckpt);
  const int dim = static_cast<int>(tokens[0].vector.size());
  DimMap map = fit_map(target.features, dim);
  const Matrix mapped = apply_map(target.features, map);
  if (fitted_map) *fitted_map = std::move(map);
  return attention_enhance(mapped, tokens, theta, cache);
}

// ---------------------------------------------------------------------------
// Downstream fine-tuning.

enum class Task { kNode, kGraph };

inline Task parse_task(const std::string& s) {
  if (s == "node") return Task::kNode;
  if (s == "graph") return Task::kGraph;
  throw ValidationError("task must be 'node' or 'graph', got '" + s + "'");
}

inline std::string task_name(Task task) { return task == Task::kNode ? "node" : "graph"; }

struct FinetuneConfig {
  int epochs = 100;
  double lr = 1e-4;
  int num_heads = 2;
  int ego_hops = 2;
  // Used by the scratch arm only; the enhanced arm reads both widths from
  // the pre-trained checkpoint.
  int dim_target = 50;
  int hidden = 256;
  std::uint64_t seed = 0;
};

struct FinetunedModel {
  Task task = Task::kNode;
  int num_classes = 0;
  int ego_hops = 2;
  bool enhanced = true;  // false for the from-scratch baseline
  GcnParams gcn;
  ProjHead proj;
  AttentionParams theta;           // empty when !enhanced
  std::vector<DomainToken> tokens;  // empty when !enhanced
  DimMap target_map;

  Checkpoint to_checkpoint() const {
    Checkpoint ckpt;
    ckpt.tensors["gcn.W1"] = Tensor::from_matrix(gcn.w1);
    ckpt.tensors["gcn.W2"] = Tensor::from_matrix(gcn.w2);
    ckpt.tensors["proj_ft.W"] = Tensor::from_matrix(proj.w);
    for (std::size_t h = 0; h < theta.heads.size(); ++h) {
      const std::string prefix = "attn.h" + std::to_string(h) + ".";
      ckpt.tensors[prefix + "Wq"] = Tensor::from_matrix(theta.heads[h].wq);
      ckpt.tensors[prefix + "Wk"] = Tensor::from_matrix(theta.heads[h].wk);
      ckpt.tensors[prefix + "Wv"] = Tensor::from_matrix(theta.heads[h].wv);
    }
    for (std::size_t i = 0; i < tokens.size(); ++i)
      ckpt.tensors["token." + std::to_string(i)] = Tensor::from_vector(tokens[i].vector);
    ckpt.tensors["vmap.target"] = Tensor::from_matrix(target_map.projection);
    ckpt.tensors["vmap.target.sv"] = Tensor::from_scalars(target_map.singular_values);
    ckpt.tensors["model.meta"] = Tensor::from_scalars(
        {task == Task::kNode ? 0.0 : 1.0, static_cast<double>(num_classes),
         static_cast<double>(ego_hops), enhanced ? 1.0 : 0.0});
    return ckpt;
  }

  static FinetunedModel from_checkpoint(const Checkpoint& ckpt) {
    FinetunedModel m;
    const auto& meta = ckpt.at("model.meta").data;
    if (meta.size() != 4) throw ValidationError("bad model.meta tensor");
    m.task = meta[0] == 0.0 ? Task::kNode : Task::kGraph;
    m.num_classes = static_cast<int>(meta[1]);
    m.ego_hops = static_cast<int>(meta[2]);
    m.enhanced = meta[3] != 0.0;
    m.gcn.w1 = ckpt.at("gcn.W1").to_matrix();
    m.gcn.w2 = ckpt.at("gcn.W2").to_matrix();
    m.proj.w = ckpt.at("proj_ft.W").to_matrix();
    for (int h = 0; ckpt.has("attn.h" + std::to_string(h) + ".Wq"); ++h) {
      const std::string prefix = "attn.h" + std::to_string(h) + ".";
      m.theta.heads.push_back({ckpt.at(prefix + "Wq").to_matrix(),
                               ckpt.at(prefix + "Wk").to_matrix(),
                               ckpt.at(prefix + "Wv").to_matrix()});
    }
    for (int i = 0; ckpt.has("token." + std::to_string(i)); ++i) {
      DomainToken t;
      t.domain_id = i;
      t.vector = ckpt.at("token." + std::to_string(i)).to_vector();
      m.tokens.push_back(std::move(t));
    }
    m.target_map = dimmap_from_tensor(ckpt.at("vmap.target"), ckpt.at("vmap.target.sv"));
    return m;
  }
};

namespace detail {

struct EgoInstance {
  NormalizedAdjacency adj;
  std::vector<int> node_ids;  // ids into the full target graph
};

struct DownstreamContext {
  const FeatureGraph* target = nullptr;
  NormalizedAdjacency adj;
  Matrix mapped;  // X~ (fixed)
  std::vector<DomainToken> tokens;
  Task task = Task::kNode;
  int ego_hops = 2;
  std::map<int, EgoInstance> egos;  // labeled node id -> precomputed ego net

  const EgoInstance& ego(int id) const { return egos.at(id); }
};

inline Matrix enhanced_features(const DownstreamContext& ctx, const AttentionParams& theta,
                                bool enhanced, AttentionCache* cache = nullptr) {
  if (!enhanced) return ctx.mapped;
  return attention_enhance(ctx.mapped, ctx.tokens, theta, cache);
}

// Predicted class per instance id, given current parameters.
inline std::vector<int> predict_ids(const DownstreamContext& ctx, const Matrix& xstar,
                                    const GcnParams& gcn, const ProjHead& proj,
                                    const std::vector<int>& ids) {
  std::vector<int> preds;
  preds.reserve(ids.size());
  if (ctx.task == Task::kNode) {
    const Matrix h = gcn_forward(ctx.adj, xstar, gcn);
    for (int id : ids) preds.push_back(argmax(proj.logits(h.row(id).transpose())));
  } else {
    for (int id : ids) {
      const auto& ego = ctx.ego(id);
      Matrix xe(ego.node_ids.size(), xstar.cols());
      for (std::size_t r = 0; r < ego.node_ids.size(); ++r)
        xe.row(r) = xstar.row(ego.node_ids[r]);
      const Matrix h = gcn_forward(ego.adj, xe, gcn);
      preds.push_back(argmax(proj.logits(readout_sum_all(h))));
    }
  }
  return preds;
}

}  // namespace detail

// Shared training loop. `from_checkpoint` selects MDGCL fine-tuning
// (pre-trained GCN init + attention enhancement) vs the scratch arm.
inline std::pair<FinetunedModel, Metrics> train_downstream(const Checkpoint* pretrained,
                                                           const FeatureGraph& target, Task task,
                                                           const FewShotSplit& split,
                                                           const FinetuneConfig& cfg) {
  target.validate();
  if (!target.has_labels()) throw ValidationError("target graph has no labels");
  if (split.train_ids.empty()) throw ValidationError("empty training split");
  const bool enhanced = pretrained != nullptr;

  int num_classes = 0;
  for (int l : target.labels)
    if (l != kNoLabel) num_classes = std::max(num_classes, l + 1);

  detail::DownstreamContext ctx;
  ctx.target = &target;
  ctx.task = task;
  ctx.ego_hops = cfg.ego_hops;
  ctx.adj = normalize_adjacency(target);

  FinetunedModel model;
  model.task = task;
  model.num_classes = num_classes;
  model.ego_hops = cfg.ego_hops;
  model.enhanced = enhanced;

  Rng init_rng = derive_rng(cfg.seed, enhanced ? "finetune-init" : "scratch-init");
  int dim = cfg.dim_target;
  if (enhanced) {
    ctx.tokens = checkpoint_tokens(*pretrained);
    dim = static_cast<int>(ctx.tokens[0].vector.size());
    model.gcn.w1 = pretrained->at("gcn.W1").to_matrix();
    model.gcn.w2 = pretrained->at("gcn.W2").to_matrix();
    if (static_cast<int>(model.gcn.w1.rows()) != dim)
      throw ValidationError("checkpoint GCN width does not match token width");
    model.theta = AttentionParams::init(dim, cfg.num_heads, init_rng);
    model.tokens = ctx.tokens;
  } else {
    model.gcn = GcnParams::init(dim, cfg.hidden, init_rng);
  }
  model.target_map = fit_map(target.features, dim);
  ctx.mapped = apply_map(target.features, model.target_map);
  model.proj = ProjHead::init(static_cast<int>(model.gcn.w2.cols()), num_classes, init_rng);

  if (task == Task::kGraph) {
    auto add_egos = [&ctx, &target](const std::vector<int>& ids) {
      for (int id : ids) {
        if (ctx.egos.count(id)) continue;
        detail::EgoInstance inst;
        inst.node_ids = ego_node_set(target, id, ctx.ego_hops);
        inst.adj = normalize_adjacency(induced_subgraph(target, inst.node_ids));
        ctx.egos.emplace(id, std::move(inst));
      }
    };
    add_egos(split.train_ids);
    add_egos(split.val_ids);
    add_egos(split.test_ids);
  }

  AdamState opt;
  opt.lr = cfg.lr;
  std::vector<Matrix*> params = {&model.gcn.w1, &model.gcn.w2, &model.proj.w};
  if (enhanced) {
    for (auto& head : model.theta.heads) {
      params.push_back(&head.wq);
      params.push_back(&head.wk);
      params.push_back(&head.wv);
    }
  }

  double best_val_acc = -1.0;
  FinetunedModel best = model;
  const double inv = 1.0 / split.train_ids.size();

  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    AttentionCache attn_cache;
    const Matrix xstar =
        detail::enhanced_features(ctx, model.theta, enhanced, enhanced ? &attn_cache : nullptr);

    Matrix dw1 = Matrix::Zero(model.gcn.w1.rows(), model.gcn.w1.cols());
    Matrix dw2 = Matrix::Zero(model.gcn.w2.rows(), model.gcn.w2.cols());
    Matrix dwp = Matrix::Zero(model.proj.w.rows(), model.proj.w.cols());
    Matrix dxstar = Matrix::Zero(xstar.rows(), xstar.cols());
    double loss = 0.0;

    if (task == Task::kNode) {
      GcnCache cache;
      const Matrix h = gcn_forward(ctx.adj, xstar, model.gcn, &cache);
      Matrix dh = Matrix::Zero(h.rows(), h.cols());
      for (int id : split.train_ids) {
        const int y = target.labels[id];
        const auto ce = cross_entropy(model.proj.logits(h.row(id).transpose()), y);
        loss += inv * ce.loss;
        dwp += inv * h.row(id).transpose() * ce.dlogits.transpose();
        dh.row(id) += inv * (model.proj.w * ce.dlogits).transpose();
      }
      const GcnGrads g = gcn_backward(ctx.adj, model.gcn, cache, dh, enhanced);
      dw1 += g.dw1;
      dw2 += g.dw2;
      if (enhanced) dxstar += g.dx;
    } else {
      for (int id : split.train_ids) {
        const auto& ego = ctx.ego(id);
        Matrix xe(ego.node_ids.size(), xstar.cols());
        for (std::size_t r = 0; r < ego.node_ids.size(); ++r)
          xe.row(r) = xstar.row(ego.node_ids[r]);
        GcnCache cache;
        const Matrix h = gcn_forward(ego.adj, xe, model.gcn, &cache);
        const int y = target.labels[id];
        const auto ce = cross_entropy(model.proj.logits(readout_sum_all(h)), y);
        loss += inv * ce.loss;
        dwp += inv * readout_sum_all(h) * ce.dlogits.transpose();
        const Vector dr = model.proj.w * ce.dlogits;
        const Matrix dh = inv * dr.transpose().replicate(h.rows(), 1);
        const GcnGrads g = gcn_backward(ego.adj, model.gcn, cache, dh, enhanced);
        dw1 += g.dw1;
        dw2 += g.dw2;
        if (enhanced)
          for (std::size_t r = 0; r < ego.node_ids.size(); ++r)
            dxstar.row(ego.node_ids[r]) += g.dx.row(r);
      }
    }
    if (!std::isfinite(loss)) throw NumericError("non-finite fine-tuning loss");

    std::vector<const Matrix*> grads = {&dw1, &dw2, &dwp};
    AttentionGrads attn_grads;
    if (enhanced) {
      attn_grads = attention_backward(ctx.mapped, ctx.tokens, model.theta, attn_cache, dxstar);
      for (auto& head : attn_grads.heads) {
        grads.push_back(&head.wq);
        grads.push_back(&head.wk);
        grads.push_back(&head.wv);
      }
    }
    adam_step(opt, params, grads);

    // Model selection on validation accuracy; earlier epoch wins ties.
    const Matrix xstar_eval = detail::enhanced_features(ctx, model.theta, enhanced);
    const auto& eval_ids = split.val_ids.empty() ? split.train_ids : split.val_ids;
    const auto preds = detail::predict_ids(ctx, xstar_eval, model.gcn, model.proj, eval_ids);
    std::vector<int> truth;
    for (int id : eval_ids) truth.push_back(target.labels[id]);
    const double val_acc = evaluate_metrics(preds, truth, num_classes).accuracy;
    if (val_acc > best_val_acc) {
      best_val_acc = val_acc;
      best = model;
    }
  }

  const Matrix xstar_best = detail::enhanced_features(ctx, best.theta, enhanced);
  const auto& test_ids = split.test_ids.empty() ? split.val_ids : split.test_ids;
  if (test_ids.empty()) throw ValidationError("empty evaluation split");
  const auto preds = detail::predict_ids(ctx, xstar_best, best.gcn, best.proj, test_ids);
  std::vector<int> truth;
  for (int id : test_ids) truth.push_back(target.labels[id]);
  const Metrics metrics = evaluate_metrics(preds, truth, num_classes);
  return {best, metrics};
}

inline std::pair<FinetunedModel, Metrics> finetune(const Checkpoint& ckpt,
                                                   const FeatureGraph& target, Task task,
                                                   const FewShotSplit& split,
                                                   const FinetuneConfig& cfg) {
  return train_downstream(&ckpt, target, task, split, cfg);
}

inline std::pair<FinetunedModel, Metrics> scratch_baseline(const FeatureGraph& target, Task task,
                                                           const FewShotSplit& split,
                                                           const FinetuneConfig& cfg) {
  return train_downstream(nullptr, target, task, split, cfg);
}

// Evaluate a trained model on every labeled node of a graph.
inline Metrics evaluate_model(const FinetunedModel& model, const FeatureGraph& g) {
  g.validate();
  if (!g.has_labels()) throw ValidationError("graph has no labels to evaluate against");
  detail::DownstreamContext ctx;
  ctx.target = &g;
  ctx.task = model.task;
  ctx.ego_hops = model.ego_hops;
  ctx.adj = normalize_adjacency(g);
  ctx.tokens = model.tokens;
  ctx.mapped = apply_map(g.features, model.target_map);

  std::vector<int> ids;
  for (int i = 0; i < g.num_nodes; ++i)
    if (g.labels[i] != kNoLabel) ids.push_back(i);
  if (ids.empty()) throw ValidationError("graph has no labeled nodes");
  if (model.task == Task::kGraph) {
    for (int id : ids) {
      detail::EgoInstance inst;
      inst.node_ids = ego_node_set(g, id, model.ego_hops);
      inst.adj = normalize_adjacency(induced_subgraph(g, inst.node_ids));
      ctx.egos.emplace(id, std::move(inst));
    }
  }
  const Matrix xstar = detail::enhanced_features(ctx, model.theta, model.enhanced);
  const auto preds = detail::predict_ids(ctx, xstar, model.gcn, model.proj, ids);
  std::vector<int> truth;
  for (int id : ids) truth.push_back(g.labels[id]);
  return evaluate_metrics(preds, truth, model.num_classes);
}

// ---------------------------------------------------------------------------
// Domain-separation statistic (centroid geometry of embeddings).

struct DomainSeparation {
  std::map<int, double> intra_mean;                  // mean distance to own centroid
  std::map<std::pair<int, int>, double> inter;       // pairwise centroid distances
};

inline DomainSeparation domain_separation(const Matrix& embeddings,
                                          const std::vector<int>& domain_ids) {
  if (static_cast<int>(domain_ids.size()) != embeddings.rows())
    throw ValidationError("domain_separation: id count != row count");
  std::map<int, std::vector<int>> groups;
  for (std::size_t i = 0; i < domain_ids.size(); ++i)
    groups[domain_ids[i]].push_back(static_cast<int>(i));
  if (groups.size() < 2) throw ValidationError("domain_separation needs >= 2 domains");
  for (const auto& [id, rows] : groups)
    if (rows.empty()) throw ValidationError("domain " + std::to_string(id) + " has no rows");

  std::map<int, Vector> centroids;
  DomainSeparation out;
  for (const auto& [id, rows] : groups) {
    Vector c = Vector::Zero(embeddings.cols());
    for (int r : rows) c += embeddings.row(r).transpose();
    c /= static_cast<double>(rows.size());
    double intra = 0.0;
    for (int r : rows) intra += (embeddings.row(r).transpose() - c).norm();
    out.intra_mean[id] = intra / static_cast<double>(rows.size());
    centroids[id] = std::move(c);
  }
  for (auto it = centroids.begin(); it != centroids.end(); ++it)
    for (auto jt = std::next(it); jt != centroids.end(); ++jt)
      out.inter[{it->first, jt->first}] = (it->second - jt->second).norm();
  return out;
}

// Node embeddings of a graph under a pre-trained checkpoint: fresh Map to
// the checkpoint's unified width, then the pre-trained GCN.
inline Matrix embed_graph(const Checkpoint& ckpt, const FeatureGraph& g) {
  GcnParams gcn;
  gcn.w1 = ckpt.at("gcn.W1").to_matrix();
  gcn.w2 = ckpt.at("gcn.W2").to_matrix();
  const DimMap map = fit_map(g.features, static_cast<int>(gcn.w1.rows()));
  return gcn_forward(normalize_adjacency(g), apply_map(g.features, map), gcn);
}

}  // namespace mdgcl

#endif  // MDGCL_PIPELINE_HPP
