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

// bdt: train, apply and inspect Bayesian decision trees.
//
// Exit codes: 0 success, 1 usage, 2 data error, 3 schema or model mismatch.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "bdt/bdt.hpp"

namespace {

constexpr int kExitUsage = 1;
constexpr int kExitData = 2;
constexpr int kExitMismatch = 3;

/// Invalid flag combination found after parsing.
struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct ModelFlags {
  std::vector<double> alpha;
  double g = 0.99;
  bool depth_independent = false;
  double delta = 0.0;
  std::string partition_prior = "geometric";
  std::optional<std::size_t> max_depth;

  void add_to(CLI::App* cmd) {
    cmd->add_option("--alpha", alpha, "Dirichlet prior pseudo-count, one per class")
        ->delimiter(',');
    cmd->add_option("--g", g, "Split continuation base g in (0, 1)")->capture_default_str();
    cmd->add_flag("--depth-independent-prior", depth_independent,
                  "Use exponent 1 at every depth");
    cmd->add_option("--delta", delta, "Smoothing proportion")->capture_default_str();
    cmd->add_option("--partition-prior", partition_prior, "Partition prior")
        ->check(CLI::IsMember({"geometric", "uniform"}))
        ->capture_default_str();
    cmd->add_option("--max-depth", max_depth, "Force leaves at this depth");
  }

  bdt::GmtConfig config(std::size_t num_classes) const {
    bdt::GmtConfig cfg;
    if (!alpha.empty()) {
      if (alpha.size() != num_classes) {
        throw UsageError("--alpha has " + std::to_string(alpha.size()) +
                         " values, data has " + std::to_string(num_classes) + " classes");
      }
      try {
        cfg.prior = bdt::DirichletParams(alpha);
      } catch (const std::invalid_argument& e) {
        throw UsageError(e.what());
      }
    }
    cfg.partition_prior.g = g;
    cfg.partition_prior.depth_dependent = !depth_independent;
    cfg.partition_prior.kind = partition_prior == "uniform" ? bdt::PartitionPrior::uniform
                                                            : bdt::PartitionPrior::depth_geometric;
    cfg.delta = delta;
    cfg.max_depth = max_depth;
    try {
      cfg.validate();
    } catch (const std::invalid_argument& e) {
      throw UsageError(e.what());
    }
    return cfg;
  }
};

std::string format_prob(double p) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6g", p);
  return buf;
}

/// Writes through a temporary sibling file so a failed run leaves no partial
/// output behind.
template <class Writer>
void write_atomically(const std::string& path, Writer write) {
  const std::filesystem::path target(path);
  std::filesystem::path tmp = target;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write '" + tmp.string() + "'");
    write(out);
    out.flush();
    if (!out) {
      std::filesystem::remove(tmp);
      throw std::runtime_error("failed writing '" + tmp.string() + "'");
    }
  }
  std::filesystem::rename(tmp, target);
}

/// Runs `write` against --out when given, stdout otherwise.
template <class Writer>
void emit(const std::string& out_path, Writer write) {
  if (out_path.empty()) {
    write(std::cout);
    std::cout.flush();
  } else {
    write_atomically(out_path, write);
  }
}

bdt::LoadedModel load_model(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw bdt::DataError("cannot open model file '" + path + "'");
  try {
    return bdt::read_structured(in);
  } catch (const bdt::DataError&) {
    throw;
  } catch (const std::runtime_error& e) {
    throw bdt::DataError(path + ": " + e.what());
  }
}

// ---------------------------------------------------------------------------

struct TrainArgs {
  std::string data, schema, out;
  std::size_t trees = 1;
  ModelFlags model;
};

int cmd_train(const TrainArgs& a) {
  const bdt::Schema schema = bdt::Schema::load(a.schema);
  const bdt::DataSet data = bdt::load_csv(a.data, schema);
  const bdt::GmtConfig cfg = a.model.config(data.num_classes());
  if (a.trees <= 1) {
    const bdt::BayesianTree tree = bdt::build_gmt(data, cfg);
    emit(a.out, [&](std::ostream& o) { bdt::write_structured(o, tree); });
    std::cerr << "trees=1 depth=" << tree.depth() << " leaves=" << tree.leaf_count()
              << " log_prob=" << tree.log_prob() << '\n';
    return 0;
  }
  const bdt::TreeEnsemble model = bdt::build_ensemble_distinct_roots(data, cfg, a.trees);
  if (model.truncated()) {
    std::cerr << "warning: root node has only " << model.trees.size()
              << " distinct roots, asked for " << a.trees << '\n';
  }
  emit(a.out, [&](std::ostream& o) { bdt::write_structured(o, model); });
  for (std::size_t t = 0; t < model.trees.size(); ++t) {
    const auto& tree = model.trees[t];
    std::cerr << "tree " << t + 1 << ": depth=" << tree.depth() << " leaves=" << tree.leaf_count()
              << " log_prob=" << tree.log_prob() << " weight=" << model.weights[t] << '\n';
  }
  return 0;
}

// ---------------------------------------------------------------------------

struct PredictArgs {
  std::string model, data, schema, out;
  bool verbose = false;
};

std::string decision_path(const bdt::BayesianTree& tree, std::span<const double> x) {
  std::string path;
  for (bdt::NodeId id : tree.path(x)) {
    const auto& node = tree.node(id);
    if (node.is_leaf()) break;
    const auto& s = node.sprout();
    if (!path.empty()) path += "; ";
    path += tree.features()[s.dim].name;
    path += x[s.dim] <= s.threshold ? " ≤ " : " > ";
    path += bdt::detail::exact(s.threshold);
  }
  return path;
}

int cmd_predict(const PredictArgs& a) {
  const bdt::LoadedModel model = load_model(a.model);
  const bdt::Schema schema = bdt::Schema::load(a.schema);
  model.check_schema(schema);

  std::ifstream in(a.data);
  if (!in) throw bdt::DataError("cannot open data file '" + a.data + "'");
  const auto& labels = schema.class_labels();
  std::size_t failures = 0;
  emit(a.out, [&](std::ostream& out) {
    out << "row,class";
    for (const auto& l : labels) out << ",p_" << l;
    if (a.verbose) out << ",path";
    out << '\n';
    std::string line;
    std::size_t line_no = 0;
    std::size_t row = 0;
    bool header_pending = schema.has_header();
    while (std::getline(in, line)) {
      ++line_no;
      if (bdt::detail::trim(line).empty()) continue;
      if (header_pending) {
        header_pending = false;
        continue;
      }
      ++row;
      const std::string where = a.data + ":" + std::to_string(line_no);
      try {
        const auto enc = bdt::encode_fields(bdt::split_csv_line(line), schema, where, true);
        const auto proba = bdt::predict_proba(model.ensemble, enc.features);
        out << row << ',' << labels[bdt::argmax_class(proba)];
        for (double p : proba) out << ',' << format_prob(p);
        if (a.verbose) out << ",\"" << decision_path(model.tree(), enc.features) << '"';
        out << '\n';
      } catch (const bdt::DataError& e) {
        ++failures;
        out << row << ",error,\"" << e.what() << "\"\n";
      }
    }
  });
  if (failures) {
    std::cerr << failures << " row(s) could not be scored\n";
    return kExitData;
  }
  return 0;
}

// ---------------------------------------------------------------------------

struct EvalArgs {
  std::string model, data, schema;
  std::size_t k = 10;
  std::vector<std::uint64_t> seeds{0};
  ModelFlags flags;
};

int cmd_eval(const EvalArgs& a) {
  const bdt::Schema schema = bdt::Schema::load(a.schema);
  const bdt::DataSet data = bdt::load_csv(a.data, schema);
  if (!a.model.empty()) {
    const bdt::LoadedModel model = load_model(a.model);
    model.check_schema(schema);
    const double acc = bdt::evaluate_accuracy(model.ensemble, data);
    std::cout << "rows=" << data.size() << " accuracy=" << format_prob(acc) << '\n';
    return 0;
  }
  const bdt::GmtConfig cfg = a.flags.config(data.num_classes());
  if (a.k < 2 || a.k > data.size()) {
    throw UsageError("--k must lie in 2.." + std::to_string(data.size()));
  }
  double sum = 0.0;
  for (auto seed : a.seeds) {
    const bdt::SeedResult r = bdt::run_kfold(data, a.k, seed, cfg);
    double ms = 0.0;
    for (const auto& f : r.folds) ms += f.train_ms;
    std::cout << "seed=" << seed << " k=" << a.k << " accuracy=" << format_prob(r.accuracy)
              << " train_ms_per_fold=" << format_prob(ms / static_cast<double>(a.k)) << '\n';
    sum += r.accuracy;
  }
  std::cout << "mean_accuracy=" << format_prob(sum / static_cast<double>(a.seeds.size())) << '\n';
  return 0;
}

// ---------------------------------------------------------------------------

struct BenchArgs {
  std::string spec, out, predictions;
  bool noop = false;
};

int cmd_bench(const BenchArgs& a) {
  std::vector<bdt::BenchmarkSpec> specs;
  try {
    specs = bdt::load_benchmark_specs(a.spec);
  } catch (const std::invalid_argument& e) {
    throw bdt::DataError(e.what());
  }
  const bdt::Trainer trainer = a.noop ? bdt::Trainer(bdt::train_noop) : bdt::Trainer(bdt::train_gmt);
  const bdt::SuiteReport suite = bdt::run_suite(
      specs, trainer, [](const std::string& name) { std::cerr << "running " << name << '\n'; });
  bdt::write_report_table(std::cout, suite);
  if (!a.out.empty()) {
    write_atomically(a.out, [&](std::ostream& o) { o << bdt::report_json(suite).dump(2) << '\n'; });
  }
  if (!a.predictions.empty()) {
    for (const auto& r : suite.results) bdt::write_predictions(a.predictions, r);
  }
  return 0;
}

// ---------------------------------------------------------------------------

struct ExportArgs {
  std::string model, out, format = "text";
};

int cmd_export(const ExportArgs& a) {
  const bdt::LoadedModel model = load_model(a.model);
  const bdt::ExportFormat format = bdt::parse_export_format(a.format);
  emit(a.out, [&](std::ostream& o) {
    if (model.is_ensemble) {
      bdt::export_model(o, model.ensemble, format);
    } else {
      bdt::export_model(o, model.tree(), format);
    }
  });
  return 0;
}

// ---------------------------------------------------------------------------

struct ImportanceArgs {
  std::string data, schema;
  ModelFlags flags;
};

int cmd_importance(const ImportanceArgs& a) {
  const bdt::Schema schema = bdt::Schema::load(a.schema);
  const bdt::DataSet data = bdt::load_csv(a.data, schema);
  const bdt::GmtConfig cfg = a.flags.config(data.num_classes());
  const auto mass = bdt::dimension_importance(data.view(), cfg.root_prior(data.num_classes()),
                                              cfg.partition_prior, 0);
  // Sum indicator columns back into their source column.
  std::vector<std::string> names;
  std::vector<double> totals;
  const auto& features = data.features();
  for (std::size_t r = 0; r < features.size(); ++r) {
    const auto& col = schema.columns()[features[r].source_column].name;
    if (names.empty() || names.back() != col) {
      names.push_back(col);
      totals.push_back(0.0);
    }
    totals.back() += mass[r + 1];
  }
  std::printf("%-24s %s\n", "column", "probability");
  std::printf("%-24s %s\n", "(no split)", format_prob(mass[0]).c_str());
  for (std::size_t i = 0; i < names.size(); ++i) {
    std::printf("%-24s %s\n", names[i].c_str(), format_prob(totals[i]).c_str());
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Bayesian decision trees: train, predict, evaluate, benchmark, export"};
  app.require_subcommand(1);
  app.set_version_flag("--version", "bdt 1.0.0");

  TrainArgs train;
  auto* c_train = app.add_subcommand("train", "Grow a greedy-modal tree (or an ensemble)");
  c_train->add_option("--data", train.data, "Training CSV")->required();
  c_train->add_option("--schema", train.schema, "Schema file")->required();
  c_train->add_option("--out,--model", train.out, "Model file to write (default stdout)");
  c_train->add_option("--trees", train.trees, "Ensemble size with distinct roots")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  train.model.add_to(c_train);

  PredictArgs predict;
  auto* c_predict = app.add_subcommand("predict", "Score rows with a trained model");
  c_predict->add_option("--model", predict.model, "Model file")->required();
  c_predict->add_option("--data", predict.data, "CSV rows to score")->required();
  c_predict->add_option("--schema", predict.schema, "Schema file")->required();
  c_predict->add_option("--out", predict.out, "Output CSV (default stdout)");
  c_predict->add_flag("--verbose,-v", predict.verbose, "Add the decision path of every row");

  EvalArgs eval;
  auto* c_eval = app.add_subcommand(
      "eval", "Accuracy of a model on labelled rows, or k-fold CV when no model is given");
  c_eval->add_option("--model", eval.model, "Model file");
  c_eval->add_option("--data", eval.data, "Labelled CSV")->required();
  c_eval->add_option("--schema", eval.schema, "Schema file")->required();
  c_eval->add_option("--k", eval.k, "Folds")->capture_default_str();
  c_eval->add_option("--seed", eval.seeds, "Fold shuffle seed (repeatable)")->delimiter(',');
  eval.flags.add_to(c_eval);

  BenchArgs bench;
  auto* c_bench = app.add_subcommand("bench", "Run a benchmark suite");
  c_bench->add_option("--spec", bench.spec, "Benchmark spec file")->required();
  c_bench->add_option("--out", bench.out, "JSON report file");
  c_bench->add_option("--predictions", bench.predictions, "Directory for per-row predictions");
  c_bench->add_flag("--noop", bench.noop, "Replace training by a single-leaf model");

  ExportArgs exp;
  auto* c_export = app.add_subcommand("export", "Render a model as text, JSON or DOT");
  c_export->add_option("--model", exp.model, "Model file")->required();
  c_export->add_option("--format", exp.format, "Output format")
      ->check(CLI::IsMember({"text", "structured", "graph"}))
      ->capture_default_str();
  c_export->add_option("--out", exp.out, "Output file (default stdout)");

  ImportanceArgs imp;
  auto* c_imp = app.add_subcommand("importance", "Posterior split mass per column at the root");
  c_imp->add_option("--data", imp.data, "CSV")->required();
  c_imp->add_option("--schema", imp.schema, "Schema file")->required();
  imp.flags.add_to(c_imp);

  try {
    app.parse(argc, argv);
  } catch (const CLI::Success& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitUsage;
  }

  try {
    if (*c_train) return cmd_train(train);
    if (*c_predict) return cmd_predict(predict);
    if (*c_eval) return cmd_eval(eval);
    if (*c_bench) return cmd_bench(bench);
    if (*c_export) return cmd_export(exp);
    if (*c_imp) return cmd_importance(imp);
  } catch (const UsageError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const bdt::SchemaMismatch& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitMismatch;
  } catch (const bdt::DataError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitData;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitData;
  }
  return kExitUsage;
}
