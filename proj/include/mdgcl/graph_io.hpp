// Copyright 2026 The MDGCL Authors
// SPDX-License-Identifier: Apache-2.0
//
// On-disk formats: graph JSON ("mdgcl-graph-v1"), embedding CSV, and the
// metrics JSON line. All writers are deterministic: identical inputs give
// byte-identical files.

#ifndef MDGCL_GRAPH_IO_HPP
#define MDGCL_GRAPH_IO_HPP

#include <charconv>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "mdgcl/errors.hpp"
#include "mdgcl/graph.hpp"

namespace mdgcl {

constexpr const char* kGraphSchema = "mdgcl-graph-v1";

inline FeatureGraph graph_from_json(const nlohmann::json& j) {
  if (!j.is_object() || !j.contains("schema") || j["schema"] != kGraphSchema)
    throw ValidationError(std::string("graph JSON schema must be '") + kGraphSchema + "'");
  FeatureGraph g;
  g.num_nodes = j.at("num_nodes").get<int>();
  for (const auto& e : j.at("edges")) {
    if (!e.is_array() || e.size() != 2) throw ValidationError("edge must be a pair [u,v]");
    g.edges.emplace_back(e[0].get<int>(), e[1].get<int>());
  }
  g.edges = canonical_edges(g.edges);
  const auto& feats = j.at("features");
  const int n = static_cast<int>(feats.size());
  if (n != g.num_nodes) throw ValidationError("feature row count != num_nodes");
  const int d = n > 0 ? static_cast<int>(feats[0].size()) : 0;
  g.features.resize(n, d);
  for (int i = 0; i < n; ++i) {
    if (static_cast<int>(feats[i].size()) != d)
      throw ValidationError("ragged feature rows: row " + std::to_string(i) + " has " +
                            std::to_string(feats[i].size()) + " entries, expected " +
                            std::to_string(d));
    for (int k = 0; k < d; ++k) g.features(i, k) = feats[i][k].get<double>();
  }
  if (j.contains("labels")) {
    for (const auto& l : j["labels"]) g.labels.push_back(l.is_null() ? kNoLabel : l.get<int>());
  }
  if (j.contains("domain")) {
    const std::string s = j["domain"].is_string() ? j["domain"].get<std::string>()
                                                  : j["domain"].dump();
    int id = 0;
    const auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), id);
    if (ec == std::errc() && p == s.data() + s.size()) g.domain_id = id;
  }
  g.validate();
  return g;
}

inline FeatureGraph load_graph(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw IoError("cannot open '" + path + "'");
  nlohmann::json j;
  try {
    is >> j;
  } catch (const nlohmann::json::exception& e) {
    throw IoError("parse error in '" + path + "': " + e.what());
  }
  try {
    return graph_from_json(j);
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError("invalid graph file '" + path + "': " + e.what());
  }
}

inline nlohmann::json graph_to_json(const FeatureGraph& g) {
  g.validate();
  nlohmann::json j;
  j["schema"] = kGraphSchema;
  if (g.domain_id) j["domain"] = std::to_string(*g.domain_id);
  j["num_nodes"] = g.num_nodes;
  auto edges = nlohmann::json::array();
  for (const auto& [u, v] : g.edges) edges.push_back({u, v});
  j["edges"] = std::move(edges);
  auto feats = nlohmann::json::array();
  for (int i = 0; i < g.num_nodes; ++i) {
    auto row = nlohmann::json::array();
    for (int k = 0; k < g.features.cols(); ++k) row.push_back(g.features(i, k));
    feats.push_back(std::move(row));
  }
  j["features"] = std::move(feats);
  if (g.has_labels()) {
    auto labels = nlohmann::json::array();
    for (int l : g.labels) {
      if (l == kNoLabel)
        labels.push_back(nullptr);
      else
        labels.push_back(l);
    }
    j["labels"] = std::move(labels);
  }
  return j;
}

inline void save_graph(const std::string& path, const FeatureGraph& g) {
  std::ofstream os(path);
  if (!os) throw IoError("cannot open '" + path + "' for writing");
  os << graph_to_json(g).dump(1) << '\n';
  if (!os) throw IoError("write failure on '" + path + "'");
}

// %.17g round-trips every finite double exactly.
inline std::string format_full_precision(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

// CSV: header node_id,domain,label,e0..e{h-1}; one row per node.
inline void export_embeddings(const Matrix& h, const std::vector<int>& labels,
                              const std::vector<int>& domain_ids, const std::string& path) {
  const int n = static_cast<int>(h.rows());
  if (!labels.empty() && static_cast<int>(labels.size()) != n)
    throw ValidationError("export_embeddings: label count != row count");
  if (!domain_ids.empty() && static_cast<int>(domain_ids.size()) != n)
    throw ValidationError("export_embeddings: domain count != row count");
  std::ofstream os(path);
  if (!os) throw IoError("cannot open '" + path + "' for writing");
  os << "node_id,domain,label";
  for (int k = 0; k < h.cols(); ++k) os << ",e" << k;
  os << '\n';
  for (int i = 0; i < n; ++i) {
    os << i << ',' << (domain_ids.empty() ? 0 : domain_ids[i]) << ','
       << (labels.empty() ? kNoLabel : labels[i]);
    for (int k = 0; k < h.cols(); ++k) os << ',' << format_full_precision(h(i, k));
    os << '\n';
  }
  if (!os) throw IoError("write failure on '" + path + "'");
}

inline std::string metrics_json_line(const std::string& task, int shots, std::uint64_t seed,
                                     double accuracy, double macro_f1) {
  nlohmann::ordered_json j;
  j["task"] = task;
  j["shots"] = shots;
  j["seed"] = seed;
  j["accuracy"] = accuracy;
  j["macro_f1"] = macro_f1;
  return j.dump();
}

}  // namespace mdgcl

#endif  // MDGCL_GRAPH_IO_HPP
