// Copyright 2026 The MDGCL Authors
// SPDX-License-Identifier: Apache-2.0
//
// Run configuration: flat `key = value` text files with `#` comments.
// Unknown keys are hard errors.

#ifndef MDGCL_CONFIG_HPP
#define MDGCL_CONFIG_HPP

#include <charconv>
#include <cstdint>
#include <fstream>
#include <sstream>
#include <string>

#include "mdgcl/errors.hpp"
#include "mdgcl/pipeline.hpp"

namespace mdgcl {

struct RunConfig {
  int dim_target = 50;
  int hidden = 256;
  double lr = 1e-4;
  int epochs = 100;
  int batch_size = 64;
  int subgraphs_per_domain = 50;  // K
  int negatives_per_domain_pair = 0;  // N; 0 = class-balancing default
  int walk_len = 50;
  int heads = 2;
  int shots = 1;
  std::string task = "node";
  std::uint64_t seed = 0;
  int ego_hops = 2;

  PretrainConfig pretrain() const {
    PretrainConfig c;
    c.epochs = epochs;
    c.batch_size = batch_size;
    c.lr = lr;
    c.dim_target = dim_target;
    c.hidden = hidden;
    c.plan.subgraphs_per_domain = subgraphs_per_domain;
    c.plan.negatives_per_domain_pair = negatives_per_domain_pair;
    c.plan.walk_length = walk_len;
    c.seed = seed;
    return c;
  }

  FinetuneConfig finetune() const {
    FinetuneConfig c;
    c.epochs = epochs;
    c.lr = lr;
    c.num_heads = heads;
    c.ego_hops = ego_hops;
    c.dim_target = dim_target;
    c.hidden = hidden;
    c.seed = seed;
    return c;
  }

  void validate() const {
    if (dim_target < 1 || hidden < 1 || epochs < 1 || batch_size < 1 || heads < 1 || shots < 1 ||
        subgraphs_per_domain < 2 || walk_len < 1 || ego_hops < 0)
      throw ConfigError("config counts out of range");
    if (lr <= 0.0) throw ConfigError("lr must be positive");
    if (task != "node" && task != "graph") throw ConfigError("task must be node or graph");
    if (dim_target % heads != 0)
      throw ConfigError("heads = " + std::to_string(heads) + " does not divide dim_target = " +
                        std::to_string(dim_target));
  }
};

namespace detail {

inline std::string trim(const std::string& s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string::npos) return "";
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

template <typename T>
T parse_number(const std::string& value, int line_no) {
  T out{};
  const std::string v = trim(value);
  const auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc() || p != v.data() + v.size())
    throw ConfigError("unparsable value '" + v + "' on line " + std::to_string(line_no));
  return out;
}

// std::from_chars for double is available, but scientific notation like
// "1e-4" is handled uniformly through strtod here.
inline double parse_double(const std::string& value, int line_no) {
  const std::string v = trim(value);
  char* end = nullptr;
  const double out = std::strtod(v.c_str(), &end);
  if (end != v.c_str() + v.size() || v.empty())
    throw ConfigError("unparsable value '" + v + "' on line " + std::to_string(line_no));
  return out;
}

}  // namespace detail

inline RunConfig parse_config_text(std::istream& is) {
  RunConfig cfg;
  std::string line;
  int line_no = 0;
  while (std::getline(is, line)) {
    ++line_no;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    line = detail::trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw ConfigError("expected 'key = value' on line " + std::to_string(line_no));
    const std::string key = detail::trim(line.substr(0, eq));
    const std::string value = detail::trim(line.substr(eq + 1));
    if (key == "dim_target")
      cfg.dim_target = detail::parse_number<int>(value, line_no);
    else if (key == "hidden")
      cfg.hidden = detail::parse_number<int>(value, line_no);
    else if (key == "lr")
      cfg.lr = detail::parse_double(value, line_no);
    else if (key == "epochs")
      cfg.epochs = detail::parse_number<int>(value, line_no);
    else if (key == "batch_size")
      cfg.batch_size = detail::parse_number<int>(value, line_no);
    else if (key == "K")
      cfg.subgraphs_per_domain = detail::parse_number<int>(value, line_no);
    else if (key == "N")
      cfg.negatives_per_domain_pair = detail::parse_number<int>(value, line_no);
    else if (key == "walk_len")
      cfg.walk_len = detail::parse_number<int>(value, line_no);
    else if (key == "heads")
      cfg.heads = detail::parse_number<int>(value, line_no);
    else if (key == "shots")
      cfg.shots = detail::parse_number<int>(value, line_no);
    else if (key == "task")
      cfg.task = value;
    else if (key == "seed")
      cfg.seed = detail::parse_number<std::uint64_t>(value, line_no);
    else if (key == "ego_hops")
      cfg.ego_hops = detail::parse_number<int>(value, line_no);
    else
      throw ConfigError("unknown config key '" + key + "'");
  }
  return cfg;
}

inline RunConfig parse_config(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw IoError("cannot open config '" + path + "'");
  return parse_config_text(is);
}

}  // namespace mdgcl

#endif  // MDGCL_CONFIG_HPP
