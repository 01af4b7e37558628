// Copyright 2026 The MDGCL Authors
// SPDX-License-Identifier: Apache-2.0
//
// End-to-end checks of the command-line tool as a subprocess.

#include <catch2/catch_amalgamated.hpp>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include <nlohmann/json.hpp>

#ifndef MDGCL_CLI_PATH
#error "MDGCL_CLI_PATH must be defined by the build"
#endif

namespace {

namespace fs = std::filesystem;

struct RunResult {
  int exit_code = -1;
  std::string out;
};

std::string slurp(const fs::path& p) {
  std::ifstream is(p, std::ios::binary);
  std::ostringstream ss;
  ss << is.rdbuf();
  return ss.str();
}

RunResult run_cli(const std::string& args) {
  static int counter = 0;
  const fs::path out_path =
      fs::temp_directory_path() / ("mdgcl_cli_out_" + std::to_string(counter++) + ".txt");
  const std::string cmd =
      std::string(MDGCL_CLI_PATH) + " " + args + " > " + out_path.string() + " 2> /dev/null";
  const int status = std::system(cmd.c_str());
  RunResult r;
  r.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  r.out = slurp(out_path);
  fs::remove(out_path);
  return r;
}

fs::path fresh_dir(const std::string& tag) {
  const fs::path dir = fs::temp_directory_path() / ("mdgcl_cli_" + tag);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

// Small synthetic corpus shared by the workflow tests.
const fs::path& corpus() {
  static const fs::path dir = [] {
    const fs::path d = fresh_dir("corpus");
    const auto r = run_cli("synth --out " + d.string() +
                           " --domains 3 --nodes 40 --feat-dim 12 --seed 1 --shared-rotation");
    REQUIRE(r.exit_code == 0);
    return d;
  }();
  return dir;
}

const std::string kSmallOpts =
    " --seed 5 --config ";  // completed per test with a config path

fs::path small_config() {
  static const fs::path p = [] {
    const fs::path cfg = fs::temp_directory_path() / "mdgcl_cli_small.cfg";
    std::ofstream os(cfg);
    os << "dim_target = 8\nhidden = 16\nepochs = 3\nK = 5\nwalk_len = 8\nlr = 1e-3\n";
    return cfg;
  }();
  return p;
}

}  // namespace

TEST_CASE("cli: usage errors exit with code 1") {
  REQUIRE(run_cli("frobnicate").exit_code == 1);
  REQUIRE(run_cli("pretrain --no-such-flag").exit_code == 1);
  REQUIRE(run_cli("--help").exit_code == 0);
}

TEST_CASE("cli: validation errors exit with code 2") {
  const fs::path dir = fresh_dir("val");
  // pretrain requires at least two domain graphs
  const auto one = run_cli("pretrain --graph " + (corpus() / "domain_0.json").string() +
                           " --out " + (dir / "c.ckpt").string() + kSmallOpts +
                           small_config().string());
  REQUIRE(one.exit_code == 2);
  REQUIRE(run_cli("eval --model " + (dir / "missing.ckpt").string() + " --graph " +
                  (corpus() / "domain_0.json").string())
              .exit_code == 2);
}

TEST_CASE("cli: synth writes loadable graphs deterministically") {
  const fs::path d1 = fresh_dir("synth1");
  const fs::path d2 = fresh_dir("synth2");
  const std::string args = " --domains 2 --nodes 30 --feat-dim 10 --seed 42";
  REQUIRE(run_cli("synth --out " + d1.string() + args).exit_code == 0);
  REQUIRE(run_cli("synth --out " + d2.string() + args).exit_code == 0);
  for (const auto* name : {"domain_0.json", "domain_1.json"}) {
    const std::string a = slurp(d1 / name);
    REQUIRE_FALSE(a.empty());
    REQUIRE(a == slurp(d2 / name));
    const auto j = nlohmann::json::parse(a);
    REQUIRE(j.at("schema") == "mdgcl-graph-v1");
    REQUIRE(j.at("num_nodes") == 30);
  }
}

TEST_CASE("cli: full workflow with stdout as JSON lines") {
  const fs::path dir = fresh_dir("flow");
  const std::string cfg = small_config().string();
  const std::string graphs = " --graph " + (corpus() / "domain_0.json").string() + " --graph " +
                             (corpus() / "domain_1.json").string();
  const fs::path ckpt = dir / "pre.ckpt";

  const auto pre = run_cli("pretrain" + graphs + " --out " + ckpt.string() + kSmallOpts + cfg);
  REQUIRE(pre.exit_code == 0);
  REQUIRE(fs::exists(ckpt));

  const fs::path model = dir / "model.ckpt";
  const auto ft = run_cli("finetune --ckpt " + ckpt.string() + " --graph " +
                          (corpus() / "domain_2.json").string() + " --task node --shots 1 --out " +
                          model.string() + kSmallOpts + cfg);
  REQUIRE(ft.exit_code == 0);
  const auto ft_json = nlohmann::json::parse(ft.out);
  REQUIRE(ft_json.at("task") == "node");
  REQUIRE(ft_json.at("shots") == 1);
  REQUIRE(ft_json.at("accuracy").is_number());
  REQUIRE(ft_json.at("macro_f1").is_number());

  const auto ev = run_cli("eval --model " + model.string() + " --graph " +
                          (corpus() / "domain_2.json").string());
  REQUIRE(ev.exit_code == 0);
  const auto ev_json = nlohmann::json::parse(ev.out);
  const double acc = ev_json.at("accuracy").get<double>();
  REQUIRE(acc >= 0.0);
  REQUIRE(acc <= 1.0);

  const fs::path emb = dir / "emb.csv";
  REQUIRE(run_cli("export-emb --ckpt " + ckpt.string() + " --graph " +
                  (corpus() / "domain_2.json").string() + " --out " + emb.string())
              .exit_code == 0);
  std::istringstream lines(slurp(emb));
  std::string header;
  REQUIRE(std::getline(lines, header));
  REQUIRE(header.rfind("node_id,domain,label,", 0) == 0);
  int rows = 0;
  for (std::string l; std::getline(lines, l);) ++rows;
  REQUIRE(rows == 40);

  const auto ins = run_cli("inspect --ckpt " + ckpt.string());
  REQUIRE(ins.exit_code == 0);
  const auto ins_json = nlohmann::json::parse(ins.out);
  bool saw_w1 = false;
  for (const auto& t : ins_json.at("tensors"))
    if (t.at("name") == "gcn.W1") saw_w1 = true;
  REQUIRE(saw_w1);
}

TEST_CASE("cli: identical seeds give identical artifacts") {
  const fs::path dir = fresh_dir("det");
  const std::string cfg = small_config().string();
  const std::string graphs = " --graph " + (corpus() / "domain_0.json").string() + " --graph " +
                             (corpus() / "domain_1.json").string();
  const fs::path c1 = dir / "a.ckpt";
  const fs::path c2 = dir / "b.ckpt";
  REQUIRE(run_cli("pretrain" + graphs + " --out " + c1.string() + kSmallOpts + cfg).exit_code == 0);
  REQUIRE(run_cli("pretrain" + graphs + " --out " + c2.string() + kSmallOpts + cfg).exit_code == 0);
  REQUIRE(slurp(c1) == slurp(c2));
}

TEST_CASE("cli: gradcheck subcommand passes at its default tolerance") {
  const auto r = run_cli("gradcheck");
  REQUIRE(r.exit_code == 0);
  const auto j = nlohmann::json::parse(r.out);
  REQUIRE(j.at("pretrain_max_rel_error").get<double>() < 1e-5);
  REQUIRE(j.at("finetune_max_rel_error").get<double>() < 1e-5);
}
