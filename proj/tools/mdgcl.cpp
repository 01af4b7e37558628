// Copyright 2026 The MDGCL Authors
// SPDX-License-Identifier: Apache-2.0
//
// mdgcl CLI: reproducible multi-domain pre-training and few-shot transfer
// runs. stdout carries machine-readable JSON lines only; human-readable
// logs go to stderr. Exit codes: 0 success, 1 usage error, 2
// validation/IO error, 3 numeric failure.

#include <cstdint>
#include <filesystem>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "mdgcl/config.hpp"
#include "mdgcl/graph_io.hpp"
#include "mdgcl/pipeline.hpp"
#include "mdgcl/synthetic.hpp"
#include "mdgcl/verify.hpp"

namespace {

using namespace mdgcl;

struct CommonOpts {
  std::string config_path;
  std::uint64_t seed = 0;
  bool seed_set = false;
};

RunConfig resolve_config(const CommonOpts& opts) {
  RunConfig cfg;
  if (!opts.config_path.empty()) cfg = parse_config(opts.config_path);
  if (opts.seed_set) cfg.seed = opts.seed;
  cfg.validate();
  return cfg;
}

void add_common(CLI::App* cmd, CommonOpts& opts) {
  cmd->add_option("--config", opts.config_path, "run config file (key = value lines)");
  cmd->add_option("--seed", opts.seed, "master seed (overrides config)")
      ->each([&opts](const std::string&) { opts.seed_set = true; });
}

int cmd_synth(const CommonOpts& common, const std::string& out_dir, int num_domains,
              const SynthDomainConfig& base, bool shared_rotation) {
  const RunConfig cfg = resolve_config(common);
  std::filesystem::create_directories(out_dir);
  nlohmann::json written = nlohmann::json::array();
  for (int i = 0; i < num_domains; ++i) {
    SynthDomainConfig dcfg = base;
    dcfg.basis_rotation_seed = shared_rotation ? base.basis_rotation_seed
                                               : base.basis_rotation_seed + i;
    FeatureGraph g =
        generate_synthetic_domain(dcfg, derive_seed(cfg.seed, "domain-" + std::to_string(i)));
    g.domain_id = i;
    const std::string path = out_dir + "/domain_" + std::to_string(i) + ".json";
    save_graph(path, g);
    written.push_back(path);
  }
  std::cout << nlohmann::json{{"written", written}}.dump() << '\n';
  return 0;
}

int cmd_pretrain(const CommonOpts& common, const std::vector<std::string>& graph_paths,
                 const std::string& out_path) {
  const RunConfig cfg = resolve_config(common);
  if (graph_paths.size() < 2)
    throw ValidationError("pretrain requires at least 2 --graph files, got " +
                          std::to_string(graph_paths.size()));
  std::vector<FeatureGraph> domains;
  for (const auto& p : graph_paths) domains.push_back(load_graph(p));
  std::cerr << "pretraining on " << domains.size() << " domains, seed " << cfg.seed << "\n";
  const PretrainResult result = pretrain(domains, cfg.pretrain());
  save_checkpoint(out_path, result.checkpoint);
  nlohmann::ordered_json j;
  j["checkpoint"] = out_path;
  j["epochs_run"] = result.epoch_loss.size();
  j["final_loss"] = result.epoch_loss.back();
  std::cout << j.dump() << '\n';
  return 0;
}

int cmd_finetune(const CommonOpts& common, const std::string& ckpt_path,
                 const std::string& graph_path, const std::string& task_override,
                 int shots_override, const std::string& out_path, bool scratch) {
  RunConfig cfg = resolve_config(common);
  if (!task_override.empty()) cfg.task = task_override;
  if (shots_override > 0) cfg.shots = shots_override;
  cfg.validate();
  const FeatureGraph target = load_graph(graph_path);
  Rng split_rng = derive_rng(cfg.seed, "split");
  const FewShotSplit split = few_shot_split(target.labels, cfg.shots, split_rng);
  const Task task = parse_task(cfg.task);

  std::pair<FinetunedModel, Metrics> result;
  if (scratch) {
    result = scratch_baseline(target, task, split, cfg.finetune());
  } else {
    const Checkpoint ckpt = load_checkpoint(ckpt_path);
    result = finetune(ckpt, target, task, split, cfg.finetune());
  }
  if (!out_path.empty()) save_checkpoint(out_path, result.first.to_checkpoint());
  std::cout << metrics_json_line(cfg.task, cfg.shots, cfg.seed, result.second.accuracy,
                                 result.second.macro_f1)
            << '\n';
  return 0;
}

int cmd_eval(const CommonOpts& common, const std::string& model_path,
             const std::string& graph_path) {
  const RunConfig cfg = resolve_config(common);
  const FinetunedModel model = FinetunedModel::from_checkpoint(load_checkpoint(model_path));
  const FeatureGraph g = load_graph(graph_path);
  const Metrics m = evaluate_model(model, g);
  std::cout << metrics_json_line(task_name(model.task), 0, cfg.seed, m.accuracy, m.macro_f1)
            << '\n';
  return 0;
}

int cmd_export_emb(const std::string& ckpt_path, const std::string& graph_path,
                   const std::string& out_path) {
  const Checkpoint ckpt = load_checkpoint(ckpt_path);
  const FeatureGraph g = load_graph(graph_path);
  Matrix h;
  if (ckpt.has("proj_ft.W")) {
    // Fine-tuned model: enhanced features through the tuned GCN.
    const FinetunedModel model = FinetunedModel::from_checkpoint(ckpt);
    Matrix x = apply_map(g.features, model.target_map);
    if (model.enhanced) x = attention_enhance(x, model.tokens, model.theta);
    h = gcn_forward(normalize_adjacency(g), x, model.gcn);
  } else {
    h = embed_graph(ckpt, g);
  }
  std::vector<int> domains(g.num_nodes, g.domain_id.value_or(0));
  export_embeddings(h, g.labels, domains, out_path);
  std::cout << nlohmann::json{{"written", out_path}, {"rows", g.num_nodes}}.dump() << '\n';
  return 0;
}

int cmd_gradcheck(const CommonOpts& common, double tolerance) {
  const RunConfig cfg = resolve_config(common);
  const GradCheckReport pre = verify_pretrain_gradients(cfg.seed);
  const GradCheckReport ft = verify_finetune_gradients(cfg.seed);
  nlohmann::ordered_json j;
  j["pretrain_max_rel_error"] = pre.max_rel_error;
  j["pretrain_worst_param"] = pre.worst_param;
  j["finetune_max_rel_error"] = ft.max_rel_error;
  j["finetune_worst_param"] = ft.worst_param;
  j["tolerance"] = tolerance;
  std::cout << j.dump() << '\n';
  if (pre.max_rel_error >= tolerance || ft.max_rel_error >= tolerance) {
    std::cerr << "gradient check failed tolerance " << tolerance << "\n";
    return 3;
  }
  return 0;
}

int cmd_inspect(const std::string& ckpt_path) {
  const Checkpoint ckpt = load_checkpoint(ckpt_path);
  nlohmann::ordered_json j;
  j["version"] = kCheckpointVersion;
  auto tensors = nlohmann::json::array();
  for (const auto& [name, t] : ckpt.tensors)
    tensors.push_back({{"name", name}, {"dims", t.dims}});
  j["tensors"] = tensors;
  std::cout << j.dump() << '\n';
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"multi-domain graph contrastive pre-training and few-shot transfer"};
  app.require_subcommand(1);
  app.failure_message(CLI::FailureMessage::help);

  CommonOpts synth_common, pre_common, ft_common, eval_common, gc_common;

  auto* synth = app.add_subcommand("synth", "generate synthetic domain graph files");
  std::string synth_out = "domains";
  int synth_domains = 3;
  SynthDomainConfig synth_cfg;
  bool shared_rotation = false;
  add_common(synth, synth_common);
  synth->add_option("--out", synth_out, "output directory");
  synth->add_option("--domains", synth_domains, "number of domains")->check(CLI::PositiveNumber);
  synth->add_option("--nodes", synth_cfg.num_nodes, "nodes per domain");
  synth->add_option("--communities", synth_cfg.num_communities, "communities per domain");
  synth->add_option("--p-in", synth_cfg.p_in, "intra-community edge probability");
  synth->add_option("--p-out", synth_cfg.p_out, "inter-community edge probability");
  synth->add_option("--feat-dim", synth_cfg.feature_dim, "raw feature dimension");
  synth->add_option("--noise", synth_cfg.noise_std, "feature noise std");
  synth->add_option("--rotation-seed", synth_cfg.basis_rotation_seed,
                    "base feature rotation seed");
  synth->add_flag("--shared-rotation", shared_rotation,
                  "all domains share one feature basis (similar domains)");

  auto* pre = app.add_subcommand("pretrain", "pre-train on source domains");
  std::vector<std::string> pre_graphs;
  std::string pre_out = "mdgcl.ckpt";
  add_common(pre, pre_common);
  pre->add_option("--graph", pre_graphs, "source domain graph JSON (repeat per domain)")
      ->required();
  pre->add_option("--out", pre_out, "output checkpoint path");

  auto* ft = app.add_subcommand("finetune", "few-shot fine-tune on a target graph");
  std::string ft_ckpt, ft_graph, ft_task, ft_out;
  int ft_shots = 0;
  bool ft_scratch = false;
  add_common(ft, ft_common);
  ft->add_option("--ckpt", ft_ckpt, "pre-trained checkpoint");
  ft->add_option("--graph", ft_graph, "target graph JSON")->required();
  ft->add_option("--task", ft_task, "node|graph")->check(CLI::IsMember({"node", "graph"}));
  ft->add_option("--shots", ft_shots, "labeled instances per class");
  ft->add_option("--out", ft_out, "output model path");
  ft->add_flag("--scratch", ft_scratch, "train the from-scratch baseline instead");

  auto* ev = app.add_subcommand("eval", "evaluate a fine-tuned model");
  std::string eval_model, eval_graph;
  add_common(ev, eval_common);
  ev->add_option("--model", eval_model, "fine-tuned model checkpoint")->required();
  ev->add_option("--graph", eval_graph, "graph JSON with labels")->required();

  auto* ex = app.add_subcommand("export-emb", "export node embeddings as CSV");
  std::string ex_ckpt, ex_graph, ex_out = "embeddings.csv";
  ex->add_option("--ckpt", ex_ckpt, "checkpoint or model file")->required();
  ex->add_option("--graph", ex_graph, "graph JSON")->required();
  ex->add_option("--out", ex_out, "output CSV path");

  auto* gc = app.add_subcommand("gradcheck", "run the built-in gradient verification");
  double gc_tol = 1e-5;
  add_common(gc, gc_common);
  gc->add_option("--tolerance", gc_tol, "max allowed relative error");

  auto* insp = app.add_subcommand("inspect", "dump checkpoint header");
  std::string insp_ckpt;
  insp->add_option("--ckpt", insp_ckpt, "checkpoint path")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e);  // --help
    app.exit(e);
    return 1;
  }

  try {
    if (synth->parsed())
      return cmd_synth(synth_common, synth_out, synth_domains, synth_cfg, shared_rotation);
    if (pre->parsed()) return cmd_pretrain(pre_common, pre_graphs, pre_out);
    if (ft->parsed()) {
      if (!ft_scratch && ft_ckpt.empty())
        throw ValidationError("finetune requires --ckpt (or --scratch)");
      return cmd_finetune(ft_common, ft_ckpt, ft_graph, ft_task, ft_shots, ft_out, ft_scratch);
    }
    if (ev->parsed()) return cmd_eval(eval_common, eval_model, eval_graph);
    if (ex->parsed()) return cmd_export_emb(ex_ckpt, ex_graph, ex_out);
    if (gc->parsed()) return cmd_gradcheck(gc_common, gc_tol);
    if (insp->parsed()) return cmd_inspect(insp_ckpt);
  } catch (const NumericError& e) {
    std::cerr << "numeric error: " << e.what() << "\n";
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 1;
}
