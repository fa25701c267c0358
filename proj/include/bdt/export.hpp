// Copyright 2026 The bdt Authors. All Rights Reserved.
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//     http://www.apache.org/licenses/LICENSE-2.0
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// Tree and ensemble export.
//
//  * text: indented rules, one "feature ≤ h" / "feature > h" line per branch
//    and one line per leaf with its support, posterior and posterior mean.
//  * structured: JSON model file, see docs/model-format.md. Doubles are
//    written in shortest round-trip form, so import restores every threshold
//    and pseudo-count bit for bit.
//  * graph: Graphviz DOT.

#pragma once

#include <charconv>
#include <cstdio>
#include <istream>
#include <memory>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "bdt/ensemble.hpp"
#include "bdt/errors.hpp"
#include "bdt/schema.hpp"
#include "bdt/tree.hpp"

namespace bdt {

enum class ExportFormat { text, structured, graph };

inline ExportFormat parse_export_format(std::string_view name) {
  if (name == "text") return ExportFormat::text;
  if (name == "structured" || name == "json") return ExportFormat::structured;
  if (name == "graph" || name == "dot") return ExportFormat::graph;
  throw std::invalid_argument("unknown export format '" + std::string(name) + "'");
}

inline constexpr const char* kModelFormat = "bdt-model";
inline constexpr int kModelVersion = 1;

namespace detail {

/// Shortest decimal that reads back to the same double.
inline std::string exact(double v) {
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

/// Six significant digits.
inline std::string short_num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

inline std::string tuple(std::span<const double> v, std::string (*fmt)(double)) {
  std::string s = "(";
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (i) s += ", ";
    s += fmt(v[i]);
  }
  return s + ")";
}

inline std::string hex64(std::uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

inline std::string feature_name(const BayesianTree& tree, std::size_t dim) {
  return dim < tree.features().size() ? tree.features()[dim].name
                                      : "x" + std::to_string(dim + 1);
}

inline std::string leaf_summary(const Leaf& leaf) {
  const auto mean = leaf.posterior.mean();
  return "leaf: n=" + std::to_string(leaf.support) +
         " posterior=" + tuple(leaf.posterior.alpha(), short_num) +
         " mean=" + tuple(mean, short_num);
}

inline void write_text_node(std::ostream& out, const BayesianTree& tree, NodeId id,
                            std::size_t indent) {
  const std::string pad(2 * indent, ' ');
  const TreeNode& node = tree.node(id);
  if (node.is_leaf()) {
    out << pad << leaf_summary(node.leaf()) << '\n';
    return;
  }
  const Sprout& s = node.sprout();
  const std::string name = feature_name(tree, s.dim);
  out << pad << name << " ≤ " << exact(s.threshold) << '\n';
  write_text_node(out, tree, s.lower, indent + 1);
  out << pad << name << " > " << exact(s.threshold) << '\n';
  write_text_node(out, tree, s.upper, indent + 1);
}

inline std::string dot_escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    if (c == '"' || c == '\\') out += '\\';
    out += c;
  }
  return out;
}

}  // namespace detail

inline void write_text(std::ostream& out, const BayesianTree& tree) {
  detail::write_text_node(out, tree, 0, 0);
}

inline void write_text(std::ostream& out, const TreeEnsemble& model) {
  for (std::size_t t = 0; t < model.trees.size(); ++t) {
    out << "tree " << t + 1 << " weight=" << detail::short_num(model.weights[t])
        << " log_prob=" << detail::short_num(model.trees[t].log_prob()) << '\n';
    detail::write_text_node(out, model.trees[t], 0, 1);
  }
}

inline void write_graph(std::ostream& out, const BayesianTree& tree,
                        const std::string& prefix = "n") {
  for (NodeId id = 0; id < tree.nodes().size(); ++id) {
    const TreeNode& node = tree.node(id);
    out << "  " << prefix << id << " [label=\"";
    if (node.is_leaf()) {
      const Leaf& leaf = node.leaf();
      out << "n=" << leaf.support << "\\nmean="
          << detail::tuple(leaf.posterior.mean(), detail::short_num) << "\", shape=ellipse";
    } else {
      const Sprout& s = node.sprout();
      out << detail::dot_escape(detail::feature_name(tree, s.dim)) << " ≤ "
          << detail::exact(s.threshold) << "\", shape=box";
    }
    out << "];\n";
  }
  for (NodeId id = 0; id < tree.nodes().size(); ++id) {
    if (tree.node(id).is_leaf()) continue;
    const Sprout& s = tree.node(id).sprout();
    out << "  " << prefix << id << " -> " << prefix << s.lower << " [label=\"yes\"];\n";
    out << "  " << prefix << id << " -> " << prefix << s.upper << " [label=\"no\"];\n";
  }
}

inline void write_graph_document(std::ostream& out, const BayesianTree& tree) {
  out << "digraph tree {\n";
  write_graph(out, tree);
  out << "}\n";
}

inline void write_graph_document(std::ostream& out, const TreeEnsemble& model) {
  out << "digraph ensemble {\n";
  for (std::size_t t = 0; t < model.trees.size(); ++t) {
    out << "  subgraph cluster_" << t << " {\n    label=\"tree " << t + 1
        << " weight=" << detail::short_num(model.weights[t]) << "\";\n";
    write_graph(out, model.trees[t], "t" + std::to_string(t) + "n");
    out << "  }\n";
  }
  out << "}\n";
}

// ---------------------------------------------------------------------------
// Structured form.

using Json = nlohmann::ordered_json;

namespace detail {

inline Json config_json(const GmtConfig& cfg) {
  Json j;
  j["prior"] = std::vector<double>(cfg.prior.alpha().begin(), cfg.prior.alpha().end());
  j["partition_prior"] =
      cfg.partition_prior.kind == PartitionPrior::uniform ? "uniform" : "geometric";
  j["g"] = cfg.partition_prior.g;
  j["depth_dependent"] = cfg.partition_prior.depth_dependent;
  j["delta"] = cfg.delta;
  j["max_depth"] = cfg.max_depth ? Json(*cfg.max_depth) : Json(nullptr);
  return j;
}

inline GmtConfig config_from_json(const Json& j) {
  GmtConfig cfg;
  cfg.prior = DirichletParams(j.at("prior").get<std::vector<double>>());
  const auto kind = j.at("partition_prior").get<std::string>();
  if (kind == "uniform") {
    cfg.partition_prior.kind = PartitionPrior::uniform;
  } else if (kind == "geometric") {
    cfg.partition_prior.kind = PartitionPrior::depth_geometric;
  } else {
    throw std::runtime_error("unknown partition prior '" + kind + "'");
  }
  cfg.partition_prior.g = j.at("g").get<double>();
  cfg.partition_prior.depth_dependent = j.at("depth_dependent").get<bool>();
  cfg.delta = j.at("delta").get<double>();
  if (!j.at("max_depth").is_null()) cfg.max_depth = j.at("max_depth").get<std::size_t>();
  return cfg;
}

inline Json tree_json(const BayesianTree& tree, double weight) {
  Json nodes = Json::array();
  for (NodeId id = 0; id < tree.nodes().size(); ++id) {
    const TreeNode& node = tree.node(id);
    Json n;
    n["id"] = id;
    n["depth"] = node.depth;
    if (node.is_leaf()) {
      const Leaf& leaf = node.leaf();
      n["kind"] = "leaf";
      n["posterior"] =
          std::vector<double>(leaf.posterior.alpha().begin(), leaf.posterior.alpha().end());
      n["support"] = leaf.support;
      n["logprob"] = leaf.logprob;
    } else {
      const Sprout& s = node.sprout();
      n["kind"] = "sprout";
      n["dim"] = s.dim;
      n["threshold"] = s.threshold;
      n["lower"] = s.lower;
      n["upper"] = s.upper;
      n["support"] = s.support;
      n["loglike"] = s.loglike;
      n["logprob"] = s.logprob;
    }
    nodes.push_back(std::move(n));
  }
  Json j;
  j["log_prob"] = tree.log_prob();
  j["weight"] = weight;
  j["nodes"] = std::move(nodes);
  return j;
}

inline Json model_json(const std::vector<const BayesianTree*>& trees,
                       std::span<const double> weights, bool ensemble) {
  const BayesianTree& first = *trees.front();
  Json j;
  j["format"] = kModelFormat;
  j["version"] = kModelVersion;
  j["kind"] = ensemble ? "ensemble" : "tree";
  j["dims"] = first.dims();
  j["num_classes"] = first.num_classes();
  Json features = Json::array();
  for (const auto& f : first.features()) features.push_back(f.name);
  j["features"] = std::move(features);
  j["config"] = config_json(first.config());
  if (first.schema()) {
    j["schema_hash"] = hex64(first.schema()->hash());
    j["schema"] = first.schema()->to_text();
  } else {
    j["schema_hash"] = nullptr;
    j["schema"] = nullptr;
  }
  Json list = Json::array();
  for (std::size_t t = 0; t < trees.size(); ++t) list.push_back(tree_json(*trees[t], weights[t]));
  j["trees"] = std::move(list);
  return j;
}

inline void check_node_links(const std::vector<TreeNode>& nodes) {
  // Children always follow their parent, which rules out cycles.
  std::vector<int> parents(nodes.size(), 0);
  for (NodeId id = 0; id < nodes.size(); ++id) {
    const auto& n = nodes[id];
    if (n.is_leaf()) continue;
    for (NodeId child : {n.sprout().lower, n.sprout().upper}) {
      if (child <= id || child >= nodes.size()) {
        throw std::runtime_error("model file: node link out of range");
      }
      ++parents[child];
    }
  }
  for (std::size_t i = 1; i < nodes.size(); ++i) {
    if (parents[i] != 1) throw std::runtime_error("model file: nodes do not form a tree");
  }
}

inline BayesianTree tree_from_json(const Json& j, const GmtConfig& cfg, std::size_t dims,
                                   std::size_t num_classes,
                                   const std::vector<FeatureInfo>& features,
                                   const std::shared_ptr<const Schema>& schema) {
  std::vector<TreeNode> nodes;
  for (const auto& n : j.at("nodes")) {
    if (n.at("id").get<std::size_t>() != nodes.size()) {
      throw std::runtime_error("model file: node ids must be 0, 1, 2, ...");
    }
    TreeNode node;
    node.depth = n.at("depth").get<std::size_t>();
    const auto kind = n.at("kind").get<std::string>();
    if (kind == "leaf") {
      DirichletParams post(n.at("posterior").get<std::vector<double>>());
      post.check_length(num_classes);
      node.body = Leaf{std::move(post), n.at("support").get<std::size_t>(),
                       n.at("logprob").get<double>()};
    } else if (kind == "sprout") {
      Sprout s{n.at("dim").get<std::size_t>(),     n.at("threshold").get<double>(),
               n.at("lower").get<NodeId>(),         n.at("upper").get<NodeId>(),
               n.at("support").get<std::size_t>(), n.at("loglike").get<double>(),
               n.at("logprob").get<double>()};
      if (s.dim >= dims) throw std::runtime_error("model file: split dimension out of range");
      node.body = s;
    } else {
      throw std::runtime_error("model file: unknown node kind '" + kind + "'");
    }
    nodes.push_back(std::move(node));
  }
  if (nodes.empty()) throw std::runtime_error("model file: tree has no nodes");
  check_node_links(nodes);
  return BayesianTree(std::move(nodes), j.at("log_prob").get<double>(), cfg, dims, num_classes,
                      features, schema);
}

}  // namespace detail

inline void write_structured(std::ostream& out, const BayesianTree& tree) {
  const double one = 1.0;
  out << detail::model_json({&tree}, std::span<const double>(&one, 1), false).dump(2) << '\n';
}

inline void write_structured(std::ostream& out, const TreeEnsemble& model) {
  std::vector<const BayesianTree*> trees;
  for (const auto& t : model.trees) trees.push_back(&t);
  out << detail::model_json(trees, model.weights, true).dump(2) << '\n';
}

template <class Model>
void export_model(std::ostream& out, const Model& model, ExportFormat format) {
  switch (format) {
    case ExportFormat::text:
      write_text(out, model);
      break;
    case ExportFormat::structured:
      write_structured(out, model);
      break;
    case ExportFormat::graph:
      write_graph_document(out, model);
      break;
  }
  if (!out) throw std::runtime_error("failed to write model output");
}

/// A model read back from its structured form.
struct LoadedModel {
  TreeEnsemble ensemble;
  bool is_ensemble = false;
  /// Hex hash of the training schema, empty when trained from raw arrays.
  std::string schema_hash;

  const BayesianTree& tree() const { return ensemble.trees.front(); }
  std::size_t dims() const { return ensemble.dims(); }
  std::size_t num_classes() const { return ensemble.num_classes(); }

  /// Throws SchemaMismatch unless `schema` is the one the model was trained on.
  void check_schema(const Schema& schema) const {
    if (schema_hash.empty()) {
      if (schema.encoded_width() != dims() || schema.num_classes() != num_classes()) {
        throw SchemaMismatch("schema layout does not match the model");
      }
      return;
    }
    if (detail::hex64(schema.hash()) != schema_hash) {
      throw SchemaMismatch("schema hash " + detail::hex64(schema.hash()) +
                           " does not match the model's " + schema_hash);
    }
  }
};

inline LoadedModel read_structured(std::istream& in) {
  Json j;
  try {
    j = Json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw std::runtime_error(std::string("model file is not valid JSON: ") + e.what());
  }
  try {
    if (j.at("format").get<std::string>() != kModelFormat) {
      throw std::runtime_error("not a bdt model file");
    }
    if (j.at("version").get<int>() != kModelVersion) {
      throw std::runtime_error("unsupported model version " +
                               std::to_string(j.at("version").get<int>()));
    }
    const auto dims = j.at("dims").get<std::size_t>();
    const auto num_classes = j.at("num_classes").get<std::size_t>();
    const GmtConfig cfg = detail::config_from_json(j.at("config"));
    cfg.prior.check_length(num_classes);

    LoadedModel model;
    std::shared_ptr<const Schema> schema;
    if (!j.at("schema").is_null()) {
      schema = std::make_shared<const Schema>(Schema::parse(j.at("schema").get<std::string>()));
      model.schema_hash = j.at("schema_hash").get<std::string>();
    }
    std::vector<FeatureInfo> features =
        schema ? schema->encoded_features() : std::vector<FeatureInfo>{};
    const auto names = j.at("features").get<std::vector<std::string>>();
    if (names.size() != dims) throw std::runtime_error("model file: feature count mismatch");
    if (features.size() != dims) {
      features.clear();
      for (std::size_t r = 0; r < dims; ++r) features.push_back({names[r], r, std::nullopt});
    }

    model.is_ensemble = j.at("kind").get<std::string>() == "ensemble";
    std::vector<BayesianTree> trees;
    std::vector<double> weights;
    for (const auto& t : j.at("trees")) {
      trees.push_back(detail::tree_from_json(t, cfg, dims, num_classes, features, schema));
      weights.push_back(t.at("weight").get<double>());
    }
    if (trees.empty()) throw std::runtime_error("model file: no trees");
    model.ensemble.trees = std::move(trees);
    model.ensemble.weights = std::move(weights);
    model.ensemble.requested = model.ensemble.trees.size();
    return model;
  } catch (const nlohmann::json::exception& e) {
    throw std::runtime_error(std::string("malformed model file: ") + e.what());
  } catch (const std::invalid_argument& e) {
    throw std::runtime_error(std::string("malformed model file: ") + e.what());
  }
}

inline LoadedModel read_structured(const std::string& text) {
  std::istringstream in(text);
  return read_structured(in);
}

}  // namespace bdt
