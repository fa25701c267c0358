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

// Accuracy, cross-validation and the benchmark runner.
//
// Benchmark spec files are INI-like:
//
//   # comment
//   [dataset haberman]
//   data = haberman.csv          # relative to the spec file
//   schema = haberman.schema
//   protocol = kfold             # or train-test (needs `test = ...`)
//   k = 10
//   seeds = 0,1,2,3,4
//   alpha = 10,10                # default: 10 per class
//   g = 0.99
//   depth_dependent = true
//   delta = 0
//   partition_prior = geometric  # or uniform
//   baseline.rf = 0.75           # optional user-supplied comparison columns

#pragma once

#include <algorithm>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <numeric>
#include <optional>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "bdt/csv.hpp"
#include "bdt/dataset.hpp"
#include "bdt/errors.hpp"
#include "bdt/folds.hpp"
#include "bdt/schema.hpp"
#include "bdt/tree.hpp"

namespace bdt {

namespace detail {

template <class Model>
void check_model_fits(const Model& model, const DataSet& data) {
  if (model.dims() != data.dims() || model.num_classes() != data.num_classes()) {
    throw SchemaMismatch("test rows have " + std::to_string(data.dims()) + " features and " +
                         std::to_string(data.num_classes()) + " classes, model expects " +
                         std::to_string(model.dims()) + " and " +
                         std::to_string(model.num_classes()));
  }
}

}  // namespace detail

/// Fraction of `rows` of `data` whose predicted class equals the label.
template <class Model>
double evaluate_accuracy(const Model& model, const DataSet& data, std::span<const RowIndex> rows) {
  detail::check_model_fits(model, data);
  if (rows.empty()) throw std::invalid_argument("accuracy of an empty test set is undefined");
  std::size_t hits = 0;
  for (RowIndex i : rows) hits += predict_class(model, data.row(i)) == data.label(i) ? 1 : 0;
  return static_cast<double>(hits) / static_cast<double>(rows.size());
}

template <class Model>
double evaluate_accuracy(const Model& model, const DataSet& data) {
  std::vector<RowIndex> all(data.size());
  std::iota(all.begin(), all.end(), RowIndex{0});
  return evaluate_accuracy(model, data, all);
}

// ---------------------------------------------------------------------------
// Benchmark specs.

enum class Protocol { kfold, train_test };

struct BenchmarkSpec {
  std::string name;
  std::string data_path;
  std::string schema_path;
  Protocol protocol = Protocol::kfold;
  std::string test_path;
  std::size_t k = 10;
  std::vector<std::uint64_t> seeds{0};
  GmtConfig model;
  /// User-supplied comparison accuracies, shown next to the measured one.
  std::map<std::string, double> baselines;
};

namespace detail {

inline bool parse_bool(const std::string& v, const std::string& where) {
  if (v == "true" || v == "yes" || v == "1") return true;
  if (v == "false" || v == "no" || v == "0") return false;
  throw std::runtime_error(where + ": expected true or false, got '" + v + "'");
}

inline double parse_double(const std::string& v, const std::string& where) {
  const auto x = parse_number(v);
  if (!x) throw std::runtime_error(where + ": cannot parse '" + v + "' as a number");
  return *x;
}

inline std::uint64_t parse_uint(const std::string& v, const std::string& where) {
  std::uint64_t x = 0;
  const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), x);
  if (ec != std::errc() || ptr != v.data() + v.size() || v.empty()) {
    throw std::runtime_error(where + ": expected a non-negative integer, got '" + v + "'");
  }
  return x;
}

}  // namespace detail

/// Parses a spec file's text. Relative paths are resolved against `base_dir`.
inline std::vector<BenchmarkSpec> parse_benchmark_specs(std::string_view text,
                                                        const std::filesystem::path& base_dir,
                                                        const std::string& source = "spec") {
  std::vector<BenchmarkSpec> specs;
  std::istringstream in{std::string(text)};
  std::string raw;
  std::size_t line_no = 0;
  auto resolve = [&](const std::string& p) {
    const std::filesystem::path path(p);
    return (path.is_absolute() ? path : base_dir / path).lexically_normal().string();
  };
  while (std::getline(in, raw)) {
    ++line_no;
    const std::string where = source + ":" + std::to_string(line_no);
    std::string_view line = raw;
    if (const auto hash = line.find('#'); hash != std::string_view::npos) {
      line = line.substr(0, hash);
    }
    line = detail::trim(line);
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']') throw std::runtime_error(where + ": unterminated section");
      const auto inner = detail::trim(line.substr(1, line.size() - 2));
      if (inner.substr(0, 8) != "dataset ") {
        throw std::runtime_error(where + ": expected [dataset NAME]");
      }
      BenchmarkSpec spec;
      spec.name = std::string(detail::trim(inner.substr(8)));
      specs.push_back(std::move(spec));
      continue;
    }
    if (specs.empty()) throw std::runtime_error(where + ": setting outside a [dataset] section");
    const auto eq = line.find('=');
    if (eq == std::string_view::npos) throw std::runtime_error(where + ": expected key = value");
    const std::string key(detail::trim(line.substr(0, eq)));
    const std::string value(detail::trim(line.substr(eq + 1)));
    BenchmarkSpec& s = specs.back();
    if (key == "data") {
      s.data_path = resolve(value);
    } else if (key == "schema") {
      s.schema_path = resolve(value);
    } else if (key == "test") {
      s.test_path = resolve(value);
    } else if (key == "protocol") {
      if (value == "kfold") {
        s.protocol = Protocol::kfold;
      } else if (value == "train-test") {
        s.protocol = Protocol::train_test;
      } else {
        throw std::runtime_error(where + ": unknown protocol '" + value + "'");
      }
    } else if (key == "k") {
      s.k = detail::parse_uint(value, where);
    } else if (key == "seeds" || key == "seed") {
      s.seeds.clear();
      for (const auto& v : detail::split_list(value, ',')) {
        s.seeds.push_back(detail::parse_uint(v, where));
      }
    } else if (key == "alpha") {
      std::vector<double> alpha;
      for (const auto& v : detail::split_list(value, ',')) {
        alpha.push_back(detail::parse_double(v, where));
      }
      s.model.prior = DirichletParams(std::move(alpha));
    } else if (key == "g") {
      s.model.partition_prior.g = detail::parse_double(value, where);
    } else if (key == "depth_dependent") {
      s.model.partition_prior.depth_dependent = detail::parse_bool(value, where);
    } else if (key == "delta") {
      s.model.delta = detail::parse_double(value, where);
    } else if (key == "partition_prior") {
      if (value == "geometric") {
        s.model.partition_prior.kind = PartitionPrior::depth_geometric;
      } else if (value == "uniform") {
        s.model.partition_prior.kind = PartitionPrior::uniform;
      } else {
        throw std::runtime_error(where + ": unknown partition prior '" + value + "'");
      }
    } else if (key == "max_depth") {
      s.model.max_depth = detail::parse_uint(value, where);
    } else if (key.rfind("baseline.", 0) == 0) {
      s.baselines[key.substr(9)] = detail::parse_double(value, where);
    } else {
      throw std::runtime_error(where + ": unknown key '" + key + "'");
    }
  }
  for (const auto& s : specs) {
    const std::string ctx = source + ": dataset '" + s.name + "'";
    if (s.data_path.empty() || s.schema_path.empty()) {
      throw std::runtime_error(ctx + ": needs data and schema");
    }
    if (s.protocol == Protocol::train_test && s.test_path.empty()) {
      throw std::runtime_error(ctx + ": train-test protocol needs a test file");
    }
    if (s.seeds.empty()) throw std::runtime_error(ctx + ": needs at least one seed");
    s.model.validate();
  }
  return specs;
}

inline std::vector<BenchmarkSpec> load_benchmark_specs(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open benchmark spec '" + path + "'");
  std::stringstream text;
  text << in.rdbuf();
  return parse_benchmark_specs(text.str(), std::filesystem::path(path).parent_path(), path);
}

// ---------------------------------------------------------------------------
// Running.

/// Trains one model on a training subset. The default grows the GMT.
using Trainer = std::function<BayesianTree(const SubsetView&, const GmtConfig&)>;

inline BayesianTree train_gmt(const SubsetView& rows, const GmtConfig& cfg) {
  return build_gmt(rows, cfg);
}

/// A single leaf holding the root prior; costs nothing to "train". Used to
/// measure the runner's own overhead.
inline BayesianTree train_noop(const SubsetView& rows, const GmtConfig& cfg) {
  const DirichletParams prior = cfg.root_prior(rows.num_classes());
  std::vector<TreeNode> nodes{TreeNode{0, Leaf{prior, rows.size(), 0.0}}};
  return BayesianTree(std::move(nodes), 0.0, cfg, rows.dims(), rows.num_classes(),
                      rows.data().features(), rows.data().schema());
}

struct FoldResult {
  std::size_t train_rows = 0;
  std::size_t test_rows = 0;
  std::size_t correct = 0;
  double accuracy = 0.0;
  double train_ms = 0.0;
  std::size_t depth = 0;
  std::size_t leaves = 0;
};

struct SeedResult {
  std::uint64_t seed = 0;
  double accuracy = 0.0;
  std::vector<FoldResult> folds;
  /// Predicted class of every evaluated row, indexed like the test data.
  std::vector<Label> predictions;
  /// Fold of every row (k-fold only).
  std::vector<std::size_t> fold_of;
};

struct BenchmarkReport {
  BenchmarkSpec spec;
  std::size_t rows = 0;
  std::size_t dims = 0;
  std::size_t classes = 0;
  /// Labels of the evaluated rows, aligned with every seed's predictions.
  std::vector<Label> truth;
  std::vector<SeedResult> seeds;

  std::vector<double> accuracies() const {
    std::vector<double> a;
    for (const auto& s : seeds) a.push_back(s.accuracy);
    return a;
  }
  double mean_accuracy() const {
    const auto a = accuracies();
    return std::accumulate(a.begin(), a.end(), 0.0) / static_cast<double>(a.size());
  }
  /// Sample standard deviation over seeds (0 for one seed).
  double accuracy_spread() const {
    const auto a = accuracies();
    if (a.size() < 2) return 0.0;
    const double m = mean_accuracy();
    double ss = 0.0;
    for (double v : a) ss += (v - m) * (v - m);
    return std::sqrt(ss / static_cast<double>(a.size() - 1));
  }
  double mean_train_ms() const {
    double total = 0.0;
    std::size_t count = 0;
    for (const auto& s : seeds) {
      for (const auto& f : s.folds) {
        total += f.train_ms;
        ++count;
      }
    }
    return count ? total / static_cast<double>(count) : 0.0;
  }
  double mean_leaves() const {
    double total = 0.0;
    std::size_t count = 0;
    for (const auto& s : seeds) {
      for (const auto& f : s.folds) {
        total += static_cast<double>(f.leaves);
        ++count;
      }
    }
    return count ? total / static_cast<double>(count) : 0.0;
  }
};

namespace detail {

using Clock = std::chrono::steady_clock;

inline double ms_since(Clock::time_point start) {
  return std::chrono::duration<double, std::milli>(Clock::now() - start).count();
}

template <class Prepare>
FoldResult train_and_test(Prepare prepare, const DataSet& test_data,
                          std::span<const RowIndex> test_rows, const GmtConfig& cfg,
                          const Trainer& trainer, std::vector<Label>& predictions) {
  FoldResult r;
  const auto start = Clock::now();
  const SubsetView train = prepare();
  const BayesianTree tree = trainer(train, cfg);
  r.train_ms = ms_since(start);
  r.train_rows = train.size();
  r.test_rows = test_rows.size();
  r.depth = tree.depth();
  r.leaves = tree.leaf_count();
  for (RowIndex i : test_rows) {
    const Label y = predict_class(tree, test_data.row(i));
    predictions[i] = y;
    r.correct += y == test_data.label(i) ? 1 : 0;
  }
  r.accuracy = static_cast<double>(r.correct) / static_cast<double>(test_rows.size());
  return r;
}

}  // namespace detail

/// k-fold cross-validation of one loaded dataset. Train time per fold covers
/// building the fold's training subset and the model, not loading or the
/// full-file sort.
inline SeedResult run_kfold(const DataSet& data, std::size_t k, std::uint64_t seed,
                            const GmtConfig& cfg, const Trainer& trainer = train_gmt) {
  SeedResult result;
  result.seed = seed;
  const FoldPlan plan = kfold_indices(data.size(), k, seed);
  result.fold_of = plan.assignment;
  result.predictions.assign(data.size(), 0);
  std::size_t hits = 0;
  for (std::size_t f = 0; f < k; ++f) {
    std::vector<RowIndex> test_rows;
    for (RowIndex i = 0; i < data.size(); ++i) {
      if (plan.assignment[i] == f) test_rows.push_back(i);
    }
    auto prepare = [&] {
      return make_subset(data, [&](RowIndex i) { return plan.assignment[i] != f; });
    };
    FoldResult fold =
        detail::train_and_test(prepare, data, test_rows, cfg, trainer, result.predictions);
    hits += fold.correct;
    result.folds.push_back(fold);
  }
  result.accuracy = static_cast<double>(hits) / static_cast<double>(data.size());
  return result;
}

/// Train on `train`, test on every row of `test`.
inline SeedResult run_train_test(const DataSet& train, const DataSet& test, const GmtConfig& cfg,
                                 const Trainer& trainer = train_gmt) {
  detail::check_model_fits(train, test);
  SeedResult result;
  result.predictions.assign(test.size(), 0);
  std::vector<RowIndex> rows(test.size());
  std::iota(rows.begin(), rows.end(), RowIndex{0});
  auto prepare = [&] { return train.view(); };
  FoldResult fold = detail::train_and_test(prepare, test, rows, cfg, trainer, result.predictions);
  result.accuracy = fold.accuracy;
  result.folds.push_back(fold);
  return result;
}

/// Loads the spec's files and runs its protocol for every seed.
inline BenchmarkReport run_cv(const BenchmarkSpec& spec, const Trainer& trainer = train_gmt) {
  BenchmarkReport report;
  report.spec = spec;
  const Schema schema = Schema::load(spec.schema_path);
  const DataSet data = load_csv(spec.data_path, schema);
  report.rows = data.size();
  report.dims = data.dims();
  report.classes = data.num_classes();
  if (spec.protocol == Protocol::train_test) {
    const DataSet test = load_csv(spec.test_path, schema);
    report.truth.assign(test.labels().begin(), test.labels().end());
    report.seeds.push_back(run_train_test(data, test, spec.model, trainer));
  } else {
    report.truth.assign(data.labels().begin(), data.labels().end());
    for (auto seed : spec.seeds) {
      report.seeds.push_back(run_kfold(data, spec.k, seed, spec.model, trainer));
    }
  }
  return report;
}

/// Fraction correct recomputed from persisted predictions.
inline double accuracy_from_predictions(std::span<const Label> predicted,
                                        std::span<const Label> truth) {
  if (predicted.size() != truth.size() || truth.empty()) {
    throw std::invalid_argument("prediction and label counts differ or are zero");
  }
  std::size_t hits = 0;
  for (std::size_t i = 0; i < truth.size(); ++i) hits += predicted[i] == truth[i] ? 1 : 0;
  return static_cast<double>(hits) / static_cast<double>(truth.size());
}

struct SuiteError {
  std::string dataset;
  std::string message;
};

struct SuiteReport {
  std::vector<BenchmarkReport> results;
  std::vector<SuiteError> errors;
};

/// Runs every spec; a failing dataset is recorded and the suite continues.
inline SuiteReport run_suite(const std::vector<BenchmarkSpec>& specs,
                             const Trainer& trainer = train_gmt,
                             const std::function<void(const std::string&)>& progress = {}) {
  SuiteReport suite;
  for (const auto& spec : specs) {
    if (progress) progress(spec.name);
    try {
      suite.results.push_back(run_cv(spec, trainer));
    } catch (const std::exception& e) {
      suite.errors.push_back({spec.name, e.what()});
    }
  }
  return suite;
}

inline nlohmann::ordered_json config_echo(const BenchmarkSpec& spec) {
  nlohmann::ordered_json j;
  j["data"] = spec.data_path;
  j["schema"] = spec.schema_path;
  j["protocol"] = spec.protocol == Protocol::kfold ? "kfold" : "train-test";
  if (spec.protocol == Protocol::kfold) {
    j["k"] = spec.k;
    j["seeds"] = spec.seeds;
  } else {
    j["test"] = spec.test_path;
  }
  const auto& m = spec.model;
  j["alpha"] = m.prior.size() ? nlohmann::ordered_json(std::vector<double>(
                                    m.prior.alpha().begin(), m.prior.alpha().end()))
                              : nlohmann::ordered_json("10 per class");
  j["partition_prior"] =
      m.partition_prior.kind == PartitionPrior::uniform ? "uniform" : "geometric";
  j["g"] = m.partition_prior.g;
  j["depth_dependent"] = m.partition_prior.depth_dependent;
  j["delta"] = m.delta;
  j["max_depth"] = m.max_depth ? nlohmann::ordered_json(*m.max_depth) : nullptr;
  return j;
}

inline nlohmann::ordered_json report_json(const SuiteReport& suite) {
  nlohmann::ordered_json out;
  out["results"] = nlohmann::ordered_json::array();
  for (const auto& r : suite.results) {
    nlohmann::ordered_json j;
    j["dataset"] = r.spec.name;
    j["rows"] = r.rows;
    j["dims"] = r.dims;
    j["classes"] = r.classes;
    j["config"] = config_echo(r.spec);
    j["accuracy"] = r.mean_accuracy();
    j["accuracy_spread"] = r.accuracy_spread();
    j["train_ms_per_fold"] = r.mean_train_ms();
    j["mean_leaves"] = r.mean_leaves();
    j["baselines"] = r.spec.baselines;
    j["runs"] = nlohmann::ordered_json::array();
    for (const auto& s : r.seeds) {
      nlohmann::ordered_json run;
      run["seed"] = s.seed;
      run["accuracy"] = s.accuracy;
      run["folds"] = nlohmann::ordered_json::array();
      for (const auto& f : s.folds) {
        run["folds"].push_back({{"train_rows", f.train_rows},
                                {"test_rows", f.test_rows},
                                {"accuracy", f.accuracy},
                                {"train_ms", f.train_ms},
                                {"depth", f.depth},
                                {"leaves", f.leaves}});
      }
      j["runs"].push_back(std::move(run));
    }
    out["results"].push_back(std::move(j));
  }
  out["errors"] = nlohmann::ordered_json::array();
  for (const auto& e : suite.errors) {
    out["errors"].push_back({{"dataset", e.dataset}, {"message", e.message}});
  }
  return out;
}

/// Fixed-width table sorted by accuracy, best first. Baseline columns appear
/// for every name used by any spec.
inline void write_report_table(std::ostream& out, const SuiteReport& suite) {
  std::vector<const BenchmarkReport*> rows;
  for (const auto& r : suite.results) rows.push_back(&r);
  std::stable_sort(rows.begin(), rows.end(), [](const auto* a, const auto* b) {
    return a->mean_accuracy() > b->mean_accuracy();
  });
  std::vector<std::string> baseline_names;
  for (const auto* r : rows) {
    for (const auto& [name, v] : r->spec.baselines) {
      if (std::find(baseline_names.begin(), baseline_names.end(), name) == baseline_names.end()) {
        baseline_names.push_back(name);
      }
    }
  }
  char buf[256];
  std::snprintf(buf, sizeof buf, "%-12s %7s %4s %6s %9s %7s %11s %8s", "dataset", "rows", "d",
                "seeds", "accuracy", "spread", "ms/fold", "leaves");
  out << buf;
  for (const auto& name : baseline_names) {
    std::snprintf(buf, sizeof buf, " %9s", name.c_str());
    out << buf;
  }
  out << '\n';
  for (const auto* r : rows) {
    std::snprintf(buf, sizeof buf, "%-12s %7zu %4zu %6zu %8.2f%% %6.2f%% %11.2f %8.1f",
                  r->spec.name.c_str(), r->rows, r->dims, r->seeds.size(),
                  100.0 * r->mean_accuracy(), 100.0 * r->accuracy_spread(), r->mean_train_ms(),
                  r->mean_leaves());
    out << buf;
    for (const auto& name : baseline_names) {
      const auto it = r->spec.baselines.find(name);
      if (it == r->spec.baselines.end()) {
        std::snprintf(buf, sizeof buf, " %9s", "-");
      } else {
        std::snprintf(buf, sizeof buf, " %8.2f%%", 100.0 * it->second);
      }
      out << buf;
    }
    out << '\n';
  }
  for (const auto& e : suite.errors) {
    out << "error " << e.dataset << ": " << e.message << '\n';
  }
}

/// Writes `<dir>/<dataset>.predictions.csv` with row, seed, fold, label and
/// predicted class for every evaluated row.
inline void write_predictions(const std::filesystem::path& dir, const BenchmarkReport& report) {
  std::filesystem::create_directories(dir);
  std::ofstream out(dir / (report.spec.name + ".predictions.csv"));
  if (!out) throw std::runtime_error("cannot write predictions into '" + dir.string() + "'");
  out << "row,seed,fold,label,predicted\n";
  for (const auto& s : report.seeds) {
    for (std::size_t i = 0; i < s.predictions.size(); ++i) {
      out << i << ',' << s.seed << ',' << (s.fold_of.empty() ? 0 : s.fold_of[i]) << ','
          << report.truth[i] << ',' << s.predictions[i] << '\n';
    }
  }
}

}  // namespace bdt
