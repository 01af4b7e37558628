// Copyright 2026 The MDGCL Authors
// SPDX-License-Identifier: Apache-2.0

#include <catch2/catch_amalgamated.hpp>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

#include "mdgcl/pipeline.hpp"
#include "mdgcl/synthetic.hpp"

using namespace mdgcl;

namespace {

std::vector<FeatureGraph> synth_domains(int count, int nodes, bool distinct_bases,
                                        std::uint64_t seed, int feature_dim = 12,
                                        double noise = 0.1) {
  std::vector<FeatureGraph> out;
  for (int i = 0; i < count; ++i) {
    SynthDomainConfig cfg;
    cfg.num_nodes = nodes;
    cfg.num_communities = 3;
    cfg.p_in = 0.3;
    cfg.p_out = 0.05;
    cfg.feature_dim = feature_dim;
    cfg.noise_std = noise;
    cfg.basis_rotation_seed = distinct_bases ? 200 + i : 200;
    FeatureGraph g = generate_synthetic_domain(cfg, derive_seed(seed, "dom" + std::to_string(i)));
    g.domain_id = i;
    out.push_back(std::move(g));
  }
  return out;
}

PretrainConfig small_pretrain_config(std::uint64_t seed) {
  PretrainConfig cfg;
  cfg.dim_target = 8;
  cfg.hidden = 16;
  cfg.plan.subgraphs_per_domain = 6;
  cfg.plan.walk_length = 8;
  cfg.epochs = 2;
  cfg.batch_size = 8;
  cfg.seed = seed;
  return cfg;
}

std::string slurp(const std::string& p) {
  std::ifstream is(p, std::ios::binary);
  std::ostringstream ss;
  ss << is.rdbuf();
  return ss.str();
}

}  // namespace

TEST_CASE("pretrain: checkpoint holds the expected tensor set") {
  const auto domains = synth_domains(2, 30, true, 1);
  PretrainConfig cfg = small_pretrain_config(2);
  cfg.plan.subgraphs_per_domain = 2;
  cfg.plan.negatives_per_domain_pair = 1;
  cfg.epochs = 1;
  const auto result = pretrain(domains, cfg);
  std::set<std::string> names;
  for (const auto& [name, t] : result.checkpoint.tensors) names.insert(name);
  const std::set<std::string> expected = {"gcn.W1",  "gcn.W2",  "proj_pre.W", "token.0",
                                          "token.1", "vmap.0",  "vmap.1",     "cfg.pretrain"};
  REQUIRE(names == expected);
  REQUIRE(result.checkpoint.at("gcn.W1").dims == std::vector<std::uint32_t>{8, 16});
  REQUIRE(result.checkpoint.at("token.0").dims == std::vector<std::uint32_t>{8});
}

TEST_CASE("pretrain: identical seeds give byte-identical checkpoints") {
  const auto domains = synth_domains(2, 25, true, 3);
  const PretrainConfig cfg = small_pretrain_config(4);
  const auto tmp = std::filesystem::temp_directory_path();
  const std::string p1 = (tmp / "mdgcl_det1.ckpt").string();
  const std::string p2 = (tmp / "mdgcl_det2.ckpt").string();
  save_checkpoint(p1, pretrain(domains, cfg).checkpoint);
  save_checkpoint(p2, pretrain(domains, cfg).checkpoint);
  REQUIRE(slurp(p1) == slurp(p2));
}

TEST_CASE("pretrain: learns to separate rotated synthetic domains") {
  const auto domains = synth_domains(2, 60, true, 5);
  PretrainConfig cfg;
  cfg.dim_target = 8;
  cfg.hidden = 16;
  cfg.plan.subgraphs_per_domain = 12;
  cfg.plan.walk_length = 10;
  cfg.epochs = 50;
  cfg.batch_size = 16;
  cfg.lr = 1e-3;
  cfg.seed = 6;
  cfg.holdout_fraction = 0.2;
  const auto result = pretrain(domains, cfg);
  REQUIRE(result.epoch_loss.back() < result.epoch_loss.front());
  REQUIRE(result.holdout_accuracy.back() >= 0.9);
}

TEST_CASE("pretrain: input validation") {
  const auto domains = synth_domains(2, 20, true, 7);
  REQUIRE_THROWS_AS(pretrain({domains[0]}, small_pretrain_config(1)), ValidationError);
  auto with_empty = domains;
  with_empty.push_back(FeatureGraph{});
  REQUIRE_THROWS_AS(pretrain(with_empty, small_pretrain_config(1)), ValidationError);
}

TEST_CASE("few_shot_split: 1:9 remainder rule") {
  // 2 classes, 110 labeled, m=5 -> remainder 100 -> val 10, test 90.
  std::vector<int> labels(110);
  for (int i = 0; i < 110; ++i) labels[i] = i % 2;
  Rng rng(8);
  const auto split = few_shot_split(labels, 5, rng);
  REQUIRE(split.train_ids.size() == 10);
  REQUIRE(split.val_ids.size() == 10);
  REQUIRE(split.test_ids.size() == 90);
}

TEST_CASE("few_shot_split: small-remainder rule and per-class counts") {
  const std::vector<int> labels = {0, 0, 0, 1, 1, 1};
  Rng rng(9);
  const auto split = few_shot_split(labels, 1, rng);
  REQUIRE(split.train_ids.size() == 2);
  REQUIRE(split.val_ids.size() == 1);
  REQUIRE(split.test_ids.size() == 3);
}

TEST_CASE("few_shot_split: disjoint and exhaustive over seeds") {
  std::vector<int> labels(47);
  for (std::size_t i = 0; i < labels.size(); ++i) labels[i] = static_cast<int>(i % 3);
  labels[11] = kNoLabel;
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    Rng rng(seed);
    const auto split = few_shot_split(labels, 2, rng);
    std::set<int> all;
    for (const auto* ids : {&split.train_ids, &split.val_ids, &split.test_ids})
      for (int id : *ids) REQUIRE(all.insert(id).second);  // pairwise disjoint
    REQUIRE(all.size() == 46);                             // every labeled id
    REQUIRE(all.count(11) == 0);
    std::map<int, int> train_counts;
    for (int id : split.train_ids) ++train_counts[labels[id]];
    for (const auto& [cls, count] : train_counts) REQUIRE(count == 2);
    REQUIRE(train_counts.size() == 3);
  }
}

TEST_CASE("few_shot_split: class with too few instances is named") {
  const std::vector<int> labels = {0, 0, 1};
  Rng rng(1);
  REQUIRE_THROWS_WITH(few_shot_split(labels, 2, rng),
                      Catch::Matchers::ContainsSubstring("class 1"));
}

TEST_CASE("evaluate_metrics: hand-computed example") {
  const Metrics perfect = evaluate_metrics({0, 1, 2}, {0, 1, 2}, 3);
  REQUIRE(perfect.accuracy == 1.0);
  REQUIRE(perfect.macro_f1 == 1.0);

  const Metrics m = evaluate_metrics({0, 0}, {0, 1}, 2);
  REQUIRE(m.accuracy == 0.5);
  REQUIRE_THAT(m.macro_f1, Catch::Matchers::WithinAbs(1.0 / 3.0, 1e-15));

  const Metrics wrong = evaluate_metrics({1, 0}, {0, 1}, 2);
  REQUIRE(wrong.accuracy == 0.0);
  REQUIRE(wrong.macro_f1 == 0.0);

  REQUIRE_THROWS_AS(evaluate_metrics({0, 3}, {0, 1}, 2), ValidationError);
}

TEST_CASE("evaluate_metrics: invariant under class relabeling") {
  Rng rng(10);
  std::vector<int> preds(40), truth(40);
  for (int i = 0; i < 40; ++i) {
    preds[i] = rng.uniform_int(3);
    truth[i] = rng.uniform_int(3);
  }
  const Metrics base = evaluate_metrics(preds, truth, 3);
  const int perm[3] = {2, 0, 1};
  std::vector<int> p2(40), t2(40);
  for (int i = 0; i < 40; ++i) {
    p2[i] = perm[preds[i]];
    t2[i] = perm[truth[i]];
  }
  const Metrics relabeled = evaluate_metrics(p2, t2, 3);
  REQUIRE_THAT(relabeled.accuracy, Catch::Matchers::WithinAbs(base.accuracy, 1e-15));
  REQUIRE_THAT(relabeled.macro_f1, Catch::Matchers::WithinAbs(base.macro_f1, 1e-15));
}

TEST_CASE("enhance_target: one token and zero W_v cases") {
  const auto domains = synth_domains(2, 25, true, 11);
  const auto result = pretrain(domains, small_pretrain_config(12));
  const auto target = synth_domains(1, 20, true, 13)[0];

  Rng rng(14);
  AttentionParams theta = AttentionParams::init(8, 2, rng);
  for (auto& head : theta.heads) head.wv.setZero();
  DimMap map;
  const Matrix enhanced = enhance_target(target, result.checkpoint, theta, nullptr, &map);
  const Matrix mapped = apply_map(target.features, map);
  REQUIRE(enhanced == mapped);  // p_i = 0 exactly
}

TEST_CASE("enhance_target: composition matches the separate calls bit-exactly") {
  const auto domains = synth_domains(3, 25, true, 15);
  const auto result = pretrain(domains, small_pretrain_config(16));
  const auto target = synth_domains(1, 22, true, 17)[0];
  Rng rng(18);
  const AttentionParams theta = AttentionParams::init(8, 2, rng);

  const Matrix composed = enhance_target(target, result.checkpoint, theta);

  const auto tokens = checkpoint_tokens(result.checkpoint);
  const DimMap map = fit_map(target.features, 8);
  const Matrix expected = attention_enhance(apply_map(target.features, map), tokens, theta);
  REQUIRE(composed == expected);

  REQUIRE(composed.rows() == target.num_nodes);
  REQUIRE(composed.cols() == 8);
}

TEST_CASE("finetune: perfect accuracy on a separable target") {
  const auto domains = synth_domains(2, 30, false, 19);
  const auto pre = pretrain(domains, small_pretrain_config(20));

  // Low-noise target sharing the sources' feature basis: linearly
  // separable communities.
  auto target = synth_domains(1, 40, false, 21, 12, 0.01)[0];
  Rng split_rng(22);
  const auto split = few_shot_split(target.labels, 3, split_rng);
  FinetuneConfig cfg;
  cfg.epochs = 200;
  cfg.lr = 1e-2;
  cfg.seed = 23;
  const auto [model, metrics] = finetune(pre.checkpoint, target, Task::kNode, split, cfg);
  REQUIRE(metrics.accuracy == 1.0);
}

TEST_CASE("finetune: graph task runs end to end and is deterministic") {
  const auto domains = synth_domains(2, 30, true, 24);
  const auto pre = pretrain(domains, small_pretrain_config(25));
  auto target = synth_domains(1, 30, true, 26)[0];
  Rng split_rng(27);
  const auto split = few_shot_split(target.labels, 1, split_rng);
  FinetuneConfig cfg;
  cfg.epochs = 10;
  cfg.seed = 28;
  const auto [m1, r1] = finetune(pre.checkpoint, target, Task::kGraph, split, cfg);
  const auto [m2, r2] = finetune(pre.checkpoint, target, Task::kGraph, split, cfg);
  REQUIRE(r1.accuracy >= 0.0);
  REQUIRE(r1.accuracy <= 1.0);
  REQUIRE(r1.macro_f1 >= 0.0);
  REQUIRE(r1.macro_f1 <= 1.0);
  REQUIRE(r1.accuracy == r2.accuracy);
  REQUIRE(r1.macro_f1 == r2.macro_f1);
  REQUIRE(m1.gcn.w1 == m2.gcn.w1);
}

TEST_CASE("finetune: checkpoint round-trip does not change results") {
  const auto domains = synth_domains(2, 25, true, 29);
  const auto pre = pretrain(domains, small_pretrain_config(30));
  auto target = synth_domains(1, 25, true, 31)[0];
  Rng split_rng(32);
  const auto split = few_shot_split(target.labels, 1, split_rng);
  FinetuneConfig cfg;
  cfg.epochs = 5;
  cfg.seed = 33;

  const auto tmp = (std::filesystem::temp_directory_path() / "mdgcl_rt.ckpt").string();
  save_checkpoint(tmp, pre.checkpoint);
  const Checkpoint loaded = load_checkpoint(tmp);

  const auto [m1, r1] = finetune(pre.checkpoint, target, Task::kNode, split, cfg);
  const auto [m2, r2] = finetune(loaded, target, Task::kNode, split, cfg);
  REQUIRE(r1.accuracy == r2.accuracy);
  REQUIRE(m1.gcn.w1 == m2.gcn.w1);
  REQUIRE(m1.proj.w == m2.proj.w);
}

TEST_CASE("scratch_baseline: contract checks") {
  auto target = synth_domains(1, 30, true, 34)[0];
  Rng split_rng(35);
  const auto split = few_shot_split(target.labels, 1, split_rng);
  FinetuneConfig cfg;
  cfg.epochs = 5;
  cfg.dim_target = 8;
  cfg.hidden = 16;
  cfg.seed = 36;
  const auto [m1, r1] = scratch_baseline(target, Task::kNode, split, cfg);
  const auto [m2, r2] = scratch_baseline(target, Task::kNode, split, cfg);
  REQUIRE(r1.accuracy >= 0.0);
  REQUIRE(r1.accuracy <= 1.0);
  REQUIRE(r1.accuracy == r2.accuracy);
  REQUIRE_FALSE(m1.enhanced);
  REQUIRE(m1.tokens.empty());
}

TEST_CASE("finetuned model: save/load round-trip preserves evaluation") {
  const auto domains = synth_domains(2, 25, true, 37);
  const auto pre = pretrain(domains, small_pretrain_config(38));
  auto target = synth_domains(1, 25, true, 39)[0];
  Rng split_rng(40);
  const auto split = few_shot_split(target.labels, 1, split_rng);
  FinetuneConfig cfg;
  cfg.epochs = 3;
  cfg.seed = 41;
  const auto [model, metrics] = finetune(pre.checkpoint, target, Task::kNode, split, cfg);

  const auto tmp = (std::filesystem::temp_directory_path() / "mdgcl_model.ckpt").string();
  save_checkpoint(tmp, model.to_checkpoint());
  const FinetunedModel loaded = FinetunedModel::from_checkpoint(load_checkpoint(tmp));
  const Metrics a = evaluate_model(model, target);
  const Metrics b = evaluate_model(loaded, target);
  REQUIRE(a.accuracy == b.accuracy);
  REQUIRE(a.macro_f1 == b.macro_f1);
}

TEST_CASE("domain_separation examples") {
  Matrix cloud(6, 2);
  cloud << 0, 0, 1, 1, -1, -1, 0, 0, 1, 1, -1, -1;
  const auto same = domain_separation(cloud, {0, 0, 0, 1, 1, 1});
  REQUIRE_THAT(same.inter.at({0, 1}), Catch::Matchers::WithinAbs(0.0, 1e-15));

  Matrix apart(4, 2);
  apart << 0, 0, 0, 0, 10, 0, 10, 0;
  const auto sep = domain_separation(apart, {0, 0, 1, 1});
  REQUIRE(sep.inter.at({0, 1}) == 10.0);
  REQUIRE(sep.intra_mean.at(0) == 0.0);
  REQUIRE(sep.intra_mean.at(1) == 0.0);

  REQUIRE_THROWS_AS(domain_separation(apart, {0, 0, 0, 0}), ValidationError);
}

TEST_CASE("domain_separation: Monte-Carlo centroid accuracy") {
  Rng rng(42);
  const int n = 1000;
  Matrix emb(2 * n, 2);
  std::vector<int> ids(2 * n);
  const double sigma = 0.5;
  for (int i = 0; i < n; ++i) {
    emb(i, 0) = sigma * rng.normal();
    emb(i, 1) = sigma * rng.normal();
    ids[i] = 0;
    emb(n + i, 0) = 3.0 + sigma * rng.normal();
    emb(n + i, 1) = sigma * rng.normal();
    ids[n + i] = 1;
  }
  const auto sep = domain_separation(emb, ids);
  // Centroid error is O(sigma/sqrt(n)); allow 3 sigma.
  REQUIRE_THAT(sep.inter.at({0, 1}), Catch::Matchers::WithinAbs(3.0, 3.0 * sigma / std::sqrt(n)));
}
