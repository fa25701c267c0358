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

#include <sys/wait.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>
#include <string>

#include "test_util.hpp"

namespace {

using bdt::testing::data_path;
using bdt::testing::scratch_dir;
using bdt::testing::write_file;

struct CliResult {
  int code = -1;
  std::string out;
};

/// Runs the CLI with `args`; stderr is captured into `out` when `merge`.
CliResult cli(const std::string& args, bool merge = false) {
  const std::string cmd = std::string(BDT_CLI_PATH) + " " + args + (merge ? " 2>&1" : " 2>/dev/null");
  CliResult r;
  FILE* pipe = popen(cmd.c_str(), "r");
  if (!pipe) return r;
  char buf[4096];
  std::size_t got = 0;
  while ((got = std::fread(buf, 1, sizeof buf, pipe)) > 0) r.out.append(buf, got);
  const int status = pclose(pipe);
  r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  return r;
}

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p);
  std::stringstream s;
  s << in.rdbuf();
  return s.str();
}

class Cli : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = scratch_dir(::testing::UnitTest::GetInstance()->current_test_info()->name());
    model_ = (dir_ / "model.json").string();
  }
  std::string train_five_points(const std::string& extra = "--alpha 1 --alpha 1 --partition-prior uniform") {
    return "train --data " + data_path("five_points.csv") + " --schema " + data_path("five_points.schema") +
           " --out " + model_ + " " + extra;
  }
  std::filesystem::path dir_;
  std::string model_;
};

TEST_F(Cli, TrainThenExportShowsRootThreshold) {
  const CliResult t = cli(train_five_points(), true);
  ASSERT_EQ(t.code, 0) << t.out;
  EXPECT_NE(t.out.find("depth=1 leaves=2"), std::string::npos) << t.out;
  const CliResult e = cli("export --model " + model_ + " --format text");
  EXPECT_EQ(e.code, 0);
  EXPECT_EQ(e.out.rfind("x1 ≤ 1.375\n", 0), 0u) << e.out;
  EXPECT_NE(e.out.find("mean=(0.8, 0.2)"), std::string::npos);
  EXPECT_NE(e.out.find("mean=(0.25, 0.75)"), std::string::npos);
  // The default partition prior keeps the same root.
  ASSERT_EQ(cli(train_five_points("--alpha 1,1")).code, 0);
  EXPECT_EQ(cli("export --model " + model_).out.rfind("x1 ≤ 1.375\n", 0), 0u);
}

TEST_F(Cli, ExportFormats) {
  ASSERT_EQ(cli(train_five_points()).code, 0);
  const CliResult dot = cli("export --model " + model_ + " --format graph");
  EXPECT_EQ(dot.out.rfind("digraph tree {", 0), 0u);
  const CliResult json = cli("export --model " + model_ + " --format structured");
  EXPECT_EQ(json.out, slurp(model_));
  EXPECT_EQ(cli("export --model " + model_ + " --format xml").code, 1);
}

TEST_F(Cli, PredictRowsWithProbabilitiesAndPath) {
  ASSERT_EQ(cli(train_five_points()).code, 0);
  write_file(dir_ / "rows.csv", "x1\n0.7\n2.0\n1.375\n");
  const CliResult p = cli("predict --model " + model_ + " --schema " + data_path("five_points.schema") +
                    " --data " + (dir_ / "rows.csv").string());
  ASSERT_EQ(p.code, 0) << p.out;
  EXPECT_EQ(p.out,
            "row,class,p_1,p_0\n"
            "1,1,0.8,0.2\n"
            "2,0,0.25,0.75\n"
            "3,1,0.8,0.2\n");
  const CliResult v = cli("predict --verbose --model " + model_ + " --schema " +
                    data_path("five_points.schema") + " --data " + (dir_ / "rows.csv").string());
  EXPECT_NE(v.out.find("1,1,0.8,0.2,\"x1 ≤ 1.375\""), std::string::npos) << v.out;
  EXPECT_NE(v.out.find("2,0,0.25,0.75,\"x1 > 1.375\""), std::string::npos) << v.out;
}

TEST_F(Cli, PredictAcceptsLabelledRows) {
  ASSERT_EQ(cli(train_five_points()).code, 0);
  const CliResult p = cli("predict --model " + model_ + " --schema " + data_path("five_points.schema") +
                    " --data " + data_path("five_points.csv"));
  EXPECT_EQ(p.code, 0);
  EXPECT_NE(p.out.find("5,0,0.25,0.75"), std::string::npos) << p.out;
}

TEST_F(Cli, MalformedRowGetsErrorRecordAndStreamContinues) {
  ASSERT_EQ(cli(train_five_points()).code, 0);
  write_file(dir_ / "rows.csv", "x1\n0.7\nbanana\n2.0\n");
  const CliResult p = cli("predict --model " + model_ + " --schema " + data_path("five_points.schema") +
                    " --data " + (dir_ / "rows.csv").string());
  EXPECT_EQ(p.code, 2);
  EXPECT_NE(p.out.find("1,1,0.8,0.2\n2,error,"), std::string::npos) << p.out;
  EXPECT_NE(p.out.find("cannot parse 'banana'"), std::string::npos);
  EXPECT_NE(p.out.find("3,0,0.25,0.75\n"), std::string::npos);
}

TEST_F(Cli, SchemaMismatchIsRefused) {
  ASSERT_EQ(cli(train_five_points()).code, 0);
  write_file(dir_ / "other.schema", "header yes\nnumeric x1\ntarget y 0,1\n");
  const CliResult p = cli("predict --model " + model_ + " --schema " + (dir_ / "other.schema").string() +
                        " --data " + data_path("five_points.csv"),
                    true);
  EXPECT_EQ(p.code, 3);
  EXPECT_NE(p.out.find("schema hash"), std::string::npos) << p.out;
}

TEST_F(Cli, EmptyCsvFailsWithoutWritingModel) {
  write_file(dir_ / "empty.csv", "");
  const CliResult t = cli("train --data " + (dir_ / "empty.csv").string() + " --schema " +
                        data_path("five_points.schema") + " --out " + model_,
                    true);
  EXPECT_EQ(t.code, 2);
  EXPECT_NE(t.out.find("empty dataset"), std::string::npos) << t.out;
  EXPECT_EQ(t.out.find('\n'), t.out.size() - 1) << "one-line cause";
  EXPECT_FALSE(std::filesystem::exists(model_));
  EXPECT_FALSE(std::filesystem::exists(model_ + ".tmp"));
}

TEST_F(Cli, UsageErrors) {
  const CliResult unknown = cli(train_five_points("--bogus"), true);
  EXPECT_EQ(unknown.code, 1);
  EXPECT_NE(unknown.out.find("bogus"), std::string::npos);
  EXPECT_EQ(cli("").code, 1);
  EXPECT_EQ(cli("frobnicate").code, 1);
  EXPECT_EQ(cli(train_five_points("--alpha 1,1,1")).code, 1);
  EXPECT_EQ(cli(train_five_points("--g 1.5")).code, 1);
  EXPECT_EQ(cli(train_five_points("--partition-prior flat")).code, 1);
  EXPECT_EQ(cli("--help").code, 0);
}

TEST_F(Cli, MissingFilesAreDataErrors) {
  EXPECT_EQ(cli("train --data /nonexistent.csv --schema " + data_path("five_points.schema")).code, 2);
  EXPECT_EQ(cli("export --model /nonexistent.json").code, 2);
  write_file(dir_ / "junk.json", "{\"format\": 1}");
  EXPECT_EQ(cli("export --model " + (dir_ / "junk.json").string()).code, 2);
}

TEST_F(Cli, TrainingIsDeterministic) {
  const std::string args = "train --data " + data_path("haberman.csv") + " --schema " +
                           data_path("haberman.schema") + " --out ";
  ASSERT_EQ(cli(args + (dir_ / "a.json").string()).code, 0);
  ASSERT_EQ(cli(args + (dir_ / "b.json").string()).code, 0);
  EXPECT_EQ(slurp(dir_ / "a.json"), slurp(dir_ / "b.json"));
}

TEST_F(Cli, EnsembleTraining) {
  const CliResult t = cli(train_five_points("--alpha 1,1 --partition-prior uniform --trees 9"), true);
  EXPECT_EQ(t.code, 0);
  EXPECT_NE(t.out.find("warning: root node has only 4 distinct roots"), std::string::npos) << t.out;
  const CliResult e = cli("export --model " + model_);
  EXPECT_NE(e.out.find("tree 2 weight="), std::string::npos);
  const CliResult p = cli("predict --model " + model_ + " --schema " + data_path("five_points.schema") +
                    " --data " + data_path("five_points.csv"));
  EXPECT_EQ(p.code, 0);
}

TEST_F(Cli, EvalWithModelAndCrossValidation) {
  ASSERT_EQ(cli(train_five_points()).code, 0);
  const CliResult m = cli("eval --model " + model_ + " --schema " + data_path("five_points.schema") +
                    " --data " + data_path("five_points.csv"));
  EXPECT_EQ(m.code, 0);
  EXPECT_EQ(m.out, "rows=5 accuracy=1\n");
  const CliResult cv = cli("eval --k 10 --seed 3 --seed 4 --schema " + data_path("haberman.schema") +
                     " --data " + data_path("haberman.csv"));
  EXPECT_EQ(cv.code, 0);
  EXPECT_NE(cv.out.find("seed=3 k=10 accuracy="), std::string::npos) << cv.out;
  EXPECT_NE(cv.out.find("seed=4 k=10"), std::string::npos);
  EXPECT_EQ(cv.out.find("seed=0"), std::string::npos);
  EXPECT_NE(cv.out.find("mean_accuracy="), std::string::npos);
  EXPECT_EQ(cli("eval --k 400 --schema " + data_path("haberman.schema") + " --data " +
                data_path("haberman.csv"))
                .code,
            1);
}

TEST_F(Cli, ImportanceSingleFeatureCarriesAllSplitMass) {
  const CliResult r = cli("importance --alpha 1,1 --schema " + data_path("five_points.schema") + " --data " +
                    data_path("five_points.csv"));
  ASSERT_EQ(r.code, 0);
  std::istringstream lines(r.out);
  std::string header, trivial, x1;
  std::getline(lines, header);
  std::getline(lines, trivial);
  std::getline(lines, x1);
  EXPECT_EQ(trivial.rfind("(no split)", 0), 0u);
  EXPECT_EQ(x1.rfind("x1 ", 0), 0u);
  const double t = std::stod(trivial.substr(trivial.find_last_of(' ')));
  const double s = std::stod(x1.substr(x1.find_last_of(' ')));
  EXPECT_NEAR(t + s, 1.0, 1e-5);
  EXPECT_GT(s, t);
}

TEST_F(Cli, ImportanceSumsIndicatorColumnsPerSourceColumn) {
  // Class follows the category of c; a numeric column is noise.
  std::mt19937_64 gen(1);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::string csv = "a,c,y\n";
  for (int i = 0; i < 120; ++i) {
    const char* cat = i % 3 == 0 ? "p" : (i % 3 == 1 ? "q" : "r");
    csv += std::to_string(u(gen)) + "," + cat + "," + (i % 3 == 0 ? "1" : "0") + "\n";
  }
  write_file(dir_ / "c.csv", csv);
  write_file(dir_ / "c.schema", "header yes\nnumeric a\ncategorical c p,q,r\ntarget y 0,1\n");
  const CliResult r = cli("importance --schema " + (dir_ / "c.schema").string() + " --data " +
                    (dir_ / "c.csv").string());
  ASSERT_EQ(r.code, 0);
  EXPECT_EQ(r.out.find("c="), std::string::npos) << r.out;
  const auto line_c = r.out.substr(r.out.find("\nc "));
  const double mass_c = std::stod(line_c.substr(line_c.find_last_of(' ')));
  EXPECT_GT(mass_c, 0.99);
}

TEST_F(Cli, ImportanceSecondCoordinateDominatesForClustersAlongIt) {
  std::mt19937_64 gen(12);
  std::normal_distribution<double> noise(0.0, 1.0);
  std::string csv = "u,v,y\n";
  for (int i = 0; i < 200; ++i) {
    const int c = i % 2;
    csv += std::to_string(noise(gen)) + "," + std::to_string((c ? 3.0 : -3.0) + noise(gen)) +
           "," + std::to_string(c) + "\n";
  }
  write_file(dir_ / "g.csv", csv);
  write_file(dir_ / "g.schema", "header yes\nnumeric u\nnumeric v\ntarget y 0,1\n");
  const CliResult r = cli("importance --schema " + (dir_ / "g.schema").string() + " --data " +
                    (dir_ / "g.csv").string());
  ASSERT_EQ(r.code, 0);
  const auto at_u = r.out.substr(r.out.find("\nu "));
  const auto at_v = r.out.substr(r.out.find("\nv "));
  const double mu = std::stod(at_u.substr(at_u.find_first_not_of(' ', 2)));
  const double mv = std::stod(at_v.substr(at_v.find_first_not_of(' ', 2)));
  EXPECT_GT(mv, mu);
}

TEST_F(Cli, BenchWritesTableReportAndPredictions) {
  write_file(dir_ / "b.ini", "[dataset ripley]\ndata = " + data_path("ripley_train.csv") +
                                 "\nschema = " + data_path("ripley.schema") +
                                 "\nprotocol = train-test\ntest = " + data_path("ripley_test.csv") +
                                 "\n[dataset gone]\ndata = gone.csv\nschema = gone.schema\n");
  const CliResult r = cli("bench --spec " + (dir_ / "b.ini").string() + " --out " +
                    (dir_ / "r.json").string() + " --predictions " + (dir_ / "pred").string());
  EXPECT_EQ(r.code, 0) << r.out;
  EXPECT_NE(r.out.find("ripley"), std::string::npos);
  EXPECT_NE(r.out.find("error gone:"), std::string::npos);
  EXPECT_NE(slurp(dir_ / "r.json").find("\"dataset\": \"ripley\""), std::string::npos);
  EXPECT_TRUE(std::filesystem::exists(dir_ / "pred" / "ripley.predictions.csv"));
}

}  // namespace
