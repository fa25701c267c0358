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

#include <gtest/gtest.h>

#include <random>
#include <sstream>
#include <string>

#include "test_util.hpp"

namespace {

using namespace bdt;
using bdt::testing::five_points_data;
using bdt::testing::random_data;
using bdt::testing::unit_prior_config;

template <class Model>
std::string render(const Model& m, ExportFormat f) {
  std::ostringstream out;
  export_model(out, m, f);
  return out.str();
}

TEST(TextExport, ShowsRulesAndLeafMeans) {
  const BayesianTree tree = build_gmt(five_points_data(), unit_prior_config());
  const std::string text = render(tree, ExportFormat::text);
  EXPECT_EQ(text,
            "x1 ≤ 1.375\n"
            "  leaf: n=3 posterior=(4, 1) mean=(0.8, 0.2)\n"
            "x1 > 1.375\n"
            "  leaf: n=2 posterior=(1, 3) mean=(0.25, 0.75)\n");
}

TEST(TextExport, UsesSchemaFeatureNames) {
  const Schema schema = Schema::parse("header no\nnumeric age\ncategorical c u,v\ntarget y 0,1\n");
  std::istringstream in("30,u,0\n40,v,1\n50,v,1\n20,u,0\n");
  const DataSet d = read_csv(in, schema, "mem");
  const std::string text = render(build_gmt(d, unit_prior_config()), ExportFormat::text);
  EXPECT_NE(text.find("age ≤ 35"), std::string::npos) << text;
}

TEST(GraphExport, SingleLeafHasNoEdges) {
  const std::vector<std::vector<double>> x{{1.0}};
  const BayesianTree tree = build_gmt(DataSet::from_rows(x, {0}, 2));
  const std::string dot = render(tree, ExportFormat::graph);
  EXPECT_EQ(dot.find("->"), std::string::npos);
  EXPECT_NE(dot.find("n0 [label="), std::string::npos);
  EXPECT_EQ(dot.find("n1"), std::string::npos);
}

TEST(GraphExport, SproutHasTwoLabelledEdges) {
  const std::string dot = render(build_gmt(five_points_data(), unit_prior_config()), ExportFormat::graph);
  EXPECT_EQ(dot.rfind("digraph tree {", 0), 0u);
  EXPECT_NE(dot.find("n0 -> n1 [label=\"yes\"]"), std::string::npos);
  EXPECT_NE(dot.find("n0 -> n2 [label=\"no\"]"), std::string::npos);
}

TEST(StructuredExport, RoundTripIsBitExact) {
  std::mt19937_64 gen(314);
  for (int trial = 0; trial < 20; ++trial) {
    std::uniform_real_distribution<double> u(-1e3, 1e3);
    std::vector<std::vector<double>> x(150, std::vector<double>(3));
    std::vector<Label> y(150);
    for (std::size_t i = 0; i < x.size(); ++i) {
      for (auto& v : x[i]) v = u(gen);
      y[i] = static_cast<Label>((x[i][0] + x[i][1] > 0) ^ (i % 7 == 0));
    }
    const DataSet d = DataSet::from_rows(x, y);
    GmtConfig cfg;
    cfg.delta = 0.05 * trial;
    const BayesianTree tree = build_gmt(d, cfg);
    const std::string json = render(tree, ExportFormat::structured);
    const LoadedModel back = read_structured(json);
    EXPECT_FALSE(back.is_ensemble);
    const BayesianTree& t = back.tree();
    ASSERT_EQ(t.nodes().size(), tree.nodes().size());
    EXPECT_EQ(t.log_prob(), tree.log_prob());
    for (NodeId id = 0; id < t.nodes().size(); ++id) {
      if (t.node(id).is_leaf()) {
        EXPECT_EQ(t.node(id).leaf().posterior, tree.node(id).leaf().posterior);
      } else {
        EXPECT_EQ(t.node(id).sprout().threshold, tree.node(id).sprout().threshold);
      }
    }
    for (RowIndex i = 0; i < d.size(); ++i) {
      EXPECT_EQ(predict_proba(back.ensemble, d.row(i)), predict_proba(tree, d.row(i)));
    }
    EXPECT_EQ(render(t, ExportFormat::structured), json);
    EXPECT_EQ(t.config().delta, cfg.delta);
  }
}

TEST(StructuredExport, EnsembleRoundTrip) {
  std::mt19937_64 gen(2);
  const DataSet d = random_data(gen, 200, 3, 3);
  const TreeEnsemble e = build_ensemble_distinct_roots(d, GmtConfig{}, 3);
  const std::string json = render(e, ExportFormat::structured);
  const LoadedModel back = read_structured(json);
  EXPECT_TRUE(back.is_ensemble);
  ASSERT_EQ(back.ensemble.trees.size(), 3u);
  EXPECT_EQ(back.ensemble.weights, e.weights);
  for (RowIndex i = 0; i < d.size(); ++i) {
    EXPECT_EQ(predict_proba(back.ensemble, d.row(i)), predict_proba(e, d.row(i)));
  }
  EXPECT_EQ(render(back.ensemble, ExportFormat::structured), json);
}

TEST(StructuredExport, CarriesSchemaForValidation) {
  const Schema schema = Schema::load(bdt::testing::data_path("five_points.schema"));
  const DataSet d = load_csv(bdt::testing::data_path("five_points.csv"), schema);
  const LoadedModel m = read_structured(render(build_gmt(d), ExportFormat::structured));
  EXPECT_NO_THROW(m.check_schema(schema));
  EXPECT_EQ(m.tree().features()[0].name, "x1");
  EXPECT_THROW(m.check_schema(Schema::parse("numeric x1\ntarget y 0,1\n")), SchemaMismatch);
  EXPECT_THROW(m.check_schema(Schema::parse("numeric x2\ntarget y 1,0\n")), SchemaMismatch);
}

TEST(StructuredExport, RejectsMalformedFiles) {
  const std::string good = render(build_gmt(five_points_data(), unit_prior_config()), ExportFormat::structured);
  EXPECT_THROW(read_structured(std::string("{not json")), std::runtime_error);
  EXPECT_THROW(read_structured(std::string("{}")), std::runtime_error);
  auto edit = [&](const std::string& from, const std::string& to) {
    std::string s = good;
    const auto at = s.find(from);
    EXPECT_NE(at, std::string::npos) << from;
    return s.replace(at, from.size(), to);
  };
  EXPECT_THROW(read_structured(edit("\"bdt-model\"", "\"other\"")), std::runtime_error);
  EXPECT_THROW(read_structured(edit("\"version\": 1", "\"version\": 9")), std::runtime_error);
  EXPECT_THROW(read_structured(edit("\"upper\": 2", "\"upper\": 1")), std::runtime_error);
  EXPECT_THROW(read_structured(edit("\"upper\": 2", "\"upper\": 7")), std::runtime_error);
  EXPECT_THROW(read_structured(edit("\"kind\": \"leaf\"", "\"kind\": \"bud\"")), std::runtime_error);
  EXPECT_THROW(read_structured(edit("\"prior\": [\n      1.0,\n      1.0\n    ]", "\"prior\": [1.0]")),
               std::runtime_error);
  EXPECT_THROW(read_structured(edit("\"posterior\": [\n            4.0", "\"posterior\": [\n            0.0")),
               std::runtime_error);
}

TEST(StructuredExport, RejectsCyclicNodeLinks) {
  // Every node but the root has one parent, yet 3 and 4 form a detached cycle.
  auto leaf = [](int id) {
    return R"({"id": )" + std::to_string(id) +
           R"(, "depth": 1, "kind": "leaf", "posterior": [1.0, 1.0], "support": 1, "logprob": 0.0})";
  };
  auto sprout = [](int id, int lower, int upper) {
    return R"({"id": )" + std::to_string(id) + R"(, "depth": 1, "kind": "sprout", "dim": 0, )" +
           R"("threshold": 0.0, "lower": )" + std::to_string(lower) + R"(, "upper": )" +
           std::to_string(upper) + R"(, "support": 1, "loglike": 0.0, "logprob": 0.0})";
  };
  const std::string cyclic =
      R"({"format": "bdt-model", "version": 1, "kind": "tree", "dims": 1, "num_classes": 2,
    "features": ["x"],
    "config": {"prior": [1.0, 1.0], "partition_prior": "geometric", "g": 0.99,
               "depth_dependent": true, "delta": 0.0, "max_depth": null},
    "schema_hash": null, "schema": null,
    "trees": [{"log_prob": 0.0, "weight": 1.0, "nodes": [)" +
      sprout(0, 1, 2) + "," + leaf(1) + "," + leaf(2) + "," + sprout(3, 4, 5) + "," +
      sprout(4, 3, 6) + "," + leaf(5) + "," + leaf(6) + "]}]}";
  EXPECT_THROW(read_structured(cyclic), std::runtime_error);
}

TEST(ExportFormat, ParsesNames) {
  EXPECT_EQ(parse_export_format("text"), ExportFormat::text);
  EXPECT_EQ(parse_export_format("structured"), ExportFormat::structured);
  EXPECT_EQ(parse_export_format("graph"), ExportFormat::graph);
  EXPECT_THROW(parse_export_format("xml"), std::invalid_argument);
}

}  // namespace
