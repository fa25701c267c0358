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

#include <algorithm>
#include <numeric>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "test_util.hpp"

namespace {

using namespace bdt;
using bdt::testing::random_data;

DataSet read(const std::string& schema_text, const std::string& csv) {
  std::istringstream in(csv);
  return read_csv(in, Schema::parse(schema_text), "mem");
}

std::string error_of(const std::string& schema_text, const std::string& csv) {
  try {
    read(schema_text, csv);
  } catch (const DataError& e) {
    return e.what();
  }
  return "";
}

const char* kCategorySchema =
    "header no\n"
    "numeric n\n"
    "categorical kind car,house,dream\n"
    "target y 0,1\n";

TEST(Schema, CategoricalColumnsAreOneHotEncoded) {
  const DataSet d = read(kCategorySchema, "4,car,0\n0,house,1\n3,house,1\n1,dream,0\n2,car,0\n");
  ASSERT_EQ(d.size(), 5u);
  ASSERT_EQ(d.dims(), 4u);
  const std::vector<std::vector<double>> want{
      {4, 1, 0, 0}, {0, 0, 1, 0}, {3, 0, 1, 0}, {1, 0, 0, 1}, {2, 1, 0, 0}};
  for (RowIndex i = 0; i < 5; ++i) EXPECT_EQ(d.row(i), want[i]) << "row " << i;
  EXPECT_EQ(d.features()[1].name, "kind=car");
  EXPECT_EQ(d.features()[3].name, "kind=dream");
  EXPECT_EQ(d.features()[2].source_column, 1u);
}

TEST(Schema, IndicatorBlocksDecodeBackToCategories) {
  const std::vector<std::string> raw{"car", "house", "house", "dream", "car"};
  const DataSet d = read(kCategorySchema, "4,car,0\n0,house,1\n3,house,1\n1,dream,0\n2,car,0\n");
  const std::vector<std::string> cats{"car", "house", "dream"};
  for (RowIndex i = 0; i < d.size(); ++i) {
    const auto x = d.row(i);
    const auto best = std::max_element(x.begin() + 1, x.end()) - (x.begin() + 1);
    EXPECT_EQ(cats[static_cast<std::size_t>(best)], raw[i]);
  }
}

TEST(Schema, EncodedWidthCountsEveryCategory) {
  const Schema s = Schema::parse(
      "numeric a\ncategorical b x,y,z\nignore id\ncategorical c p,q\ntarget t no,yes\n");
  EXPECT_EQ(s.encoded_width(), 1u + 3u + 2u);
  EXPECT_EQ(s.num_classes(), 2u);
  EXPECT_EQ(s.class_index("yes"), 1u);
  EXPECT_FALSE(s.class_index("maybe"));
}

TEST(Schema, RejectsInvalidDeclarations) {
  EXPECT_THROW(Schema::parse("numeric a\n"), DataError);
  EXPECT_THROW(Schema::parse("numeric a\ntarget t 0,1\ntarget u 0,1\n"), DataError);
  EXPECT_THROW(Schema::parse("categorical a x,x\ntarget t 0,1\n"), DataError);
  EXPECT_THROW(Schema::parse("numeric a\ntarget t 0\n"), DataError);
  EXPECT_THROW(Schema::parse("real a\ntarget t 0,1\n"), DataError);
  EXPECT_THROW(Schema::parse("target t 0,1\n"), DataError);
}

TEST(Schema, TextFormRoundTripsAndHashIgnoresHeaderFlag) {
  const Schema s = Schema::parse("header no\nnumeric a\ncategorical b x,y\ntarget t 0,1\n");
  const Schema back = Schema::parse(s.to_text());
  EXPECT_EQ(back.to_text(), s.to_text());
  EXPECT_EQ(back.hash(), s.hash());
  const Schema with_header = Schema::parse("header yes\nnumeric a\ncategorical b x,y\ntarget t 0,1\n");
  EXPECT_EQ(with_header.hash(), s.hash());
  const Schema reordered = Schema::parse("numeric a\ncategorical b y,x\ntarget t 0,1\n");
  EXPECT_NE(reordered.hash(), s.hash());
}

TEST(LoadCsv, FiveUniquePointsAreAlreadySorted) {
  const DataSet d = load_csv(bdt::testing::data_path("five_points.csv"),
                             Schema::load(bdt::testing::data_path("five_points.schema")));
  EXPECT_EQ(d.size(), 5u);
  EXPECT_EQ(d.dims(), 1u);
  EXPECT_EQ(d.num_classes(), 2u);
  const std::vector<RowIndex> identity{0, 1, 2, 3, 4};
  EXPECT_TRUE(std::ranges::equal(d.sorted(0), identity));
  // Outcome "1" is declared first, so it is class 0.
  EXPECT_EQ(d.label(0), 0u);
  EXPECT_EQ(d.label(4), 1u);
}

TEST(LoadCsv, SortedColumnGivesIdentityPermutation) {
  const DataSet d = read("header yes\nnumeric a\nnumeric b\ntarget y 0,1\n",
                         "a,b,y\n1,9,0\n2,8,1\n3,7,0\n4,6,1\n");
  const std::vector<RowIndex> identity{0, 1, 2, 3};
  const std::vector<RowIndex> reversed{3, 2, 1, 0};
  EXPECT_TRUE(std::ranges::equal(d.sorted(0), identity));
  EXPECT_TRUE(std::ranges::equal(d.sorted(1), reversed));
}

TEST(LoadCsv, AcceptsQuotesWhitespaceAndCrLf) {
  const DataSet d = read("header yes\nnumeric a\ncategorical c u,v\ntarget y no,yes\n",
                         "a, c ,y\r\n \"1.5\", v ,\"yes\"\r\n\n-2e1,u,no\r\n");
  ASSERT_EQ(d.size(), 2u);
  EXPECT_EQ(d.row(0), (std::vector<double>{1.5, 0, 1}));
  EXPECT_EQ(d.row(1), (std::vector<double>{-20, 1, 0}));
  EXPECT_EQ(d.label(0), 1u);
}

TEST(LoadCsv, IgnoredColumnsAreDropped) {
  const DataSet d =
      read("header no\nignore id\nnumeric a\ntarget y 0,1\n", "17,2.5,1\nxyz,3.5,0\n");
  EXPECT_EQ(d.dims(), 1u);
  EXPECT_EQ(d.row(1), (std::vector<double>{3.5}));
}

TEST(LoadCsv, ErrorsNameRowAndColumn) {
  const char* schema = "header yes\nnumeric a\ncategorical c u,v\ntarget y 0,1\n";
  EXPECT_NE(error_of(schema, "a,c,y\n1,u,0\n1,w,0\n").find("mem:3: column 'c': unknown category 'w'"),
            std::string::npos);
  EXPECT_NE(error_of(schema, "a,c,y\n1,u,0\nabc,u,1\n").find("mem:3: column 'a': cannot parse"),
            std::string::npos);
  EXPECT_NE(error_of(schema, "a,c,y\n1,u,0\n1,u,2\n").find("unknown class label '2'"),
            std::string::npos);
  EXPECT_NE(error_of(schema, "a,c,y\n?,u,0\n").find("missing value"), std::string::npos);
  EXPECT_NE(error_of(schema, "a,c,y\n1,u\n").find("expected 3 fields, got 2"),
            std::string::npos);
  EXPECT_NE(error_of(schema, "a,k,y\n1,u,0\n").find("header column 2 is 'k'"),
            std::string::npos);
  EXPECT_NE(error_of(schema, "a,c,y\n1,u,inf\n").find("unknown class label"), std::string::npos);
}

TEST(LoadCsv, EmptyInputIsRejected) {
  EXPECT_NE(error_of("header yes\nnumeric a\ntarget y 0,1\n", "").find("empty dataset"),
            std::string::npos);
  EXPECT_NE(error_of("header yes\nnumeric a\ntarget y 0,1\n", "a,y\n\n").find("empty dataset"),
            std::string::npos);
  EXPECT_NE(error_of("header no\nnumeric a\ntarget y 0,1\n", "\n").find("empty dataset"),
            std::string::npos);
  EXPECT_THROW(load_csv("/nonexistent/file.csv", Schema::numeric(1, 2)), DataError);
}

TEST(DataSet, RejectsInvalidConstruction) {
  EXPECT_THROW(DataSet(0, 1, 2, {}, {}), DataError);
  EXPECT_THROW(DataSet(2, 1, 1, {1.0, 2.0}, {0, 0}), DataError);
  EXPECT_THROW(DataSet(2, 1, 2, {1.0, 2.0}, {0, 2}), DataError);
  EXPECT_THROW(DataSet(2, 1, 2, {1.0, std::nan("")}, {0, 1}), DataError);
  EXPECT_THROW(DataSet(2, 1, 2, {1.0}, {0, 1}), DataError);
}

TEST(DataSet, SortedIndicesMatchIndependentSort) {
  std::mt19937_64 gen(11);
  for (int trial = 0; trial < 50; ++trial) {
    const DataSet d = random_data(gen, 1 + trial * 3, 3, 3);
    for (std::size_t r = 0; r < d.dims(); ++r) {
      std::vector<std::pair<double, RowIndex>> keyed;
      for (RowIndex i = 0; i < d.size(); ++i) keyed.emplace_back(d.value(i, r), i);
      std::sort(keyed.begin(), keyed.end());
      const auto sorted = d.sorted(r);
      for (std::size_t j = 0; j < keyed.size(); ++j) ASSERT_EQ(sorted[j], keyed[j].second);
    }
  }
}

TEST(Subset, SelectsLowerSideInSortedOrder) {
  const DataSet d = bdt::testing::five_points_data();
  const SubsetView lower = make_subset(d, [&](RowIndex i) { return d.value(i, 0) <= 1.375; });
  EXPECT_EQ(lower.size(), 3u);
  const std::vector<RowIndex> want{0, 1, 2};
  EXPECT_TRUE(std::ranges::equal(lower.sorted(0), want));
  EXPECT_EQ(lower.members(), want);
  EXPECT_EQ(lower.class_counts(), (std::vector<std::size_t>{3, 0}));
}

TEST(Subset, AllAndNone) {
  std::mt19937_64 gen(3);
  const DataSet d = random_data(gen, 40, 2, 2);
  const SubsetView all = make_subset(d, [](RowIndex) { return true; });
  for (std::size_t r = 0; r < d.dims(); ++r) EXPECT_TRUE(std::ranges::equal(all.sorted(r), d.sorted(r)));
  const SubsetView none = make_subset(d, [](RowIndex) { return false; });
  EXPECT_TRUE(none.empty());
  EXPECT_EQ(none.size(), 0u);
  EXPECT_EQ(none.sorted(1).size(), 0u);
}

TEST(Subset, RestrictedArraysAreStableFilters) {
  std::mt19937_64 gen(5);
  for (int trial = 0; trial < 30; ++trial) {
    const DataSet d = random_data(gen, 60, 4, 2);
    std::bernoulli_distribution keep(0.4);
    std::vector<char> chosen(d.size());
    for (auto& c : chosen) c = keep(gen);
    const SubsetView outer = make_subset(d, [&](RowIndex i) { return chosen[i] != 0; });
    const SubsetView inner = make_subset(outer, [&](RowIndex i) { return i % 2 == 0; });
    for (std::size_t r = 0; r < d.dims(); ++r) {
      std::vector<RowIndex> want;
      for (RowIndex i : d.sorted(r)) {
        if (chosen[i] && i % 2 == 0) want.push_back(i);
      }
      EXPECT_TRUE(std::ranges::equal(inner.sorted(r), want));
    }
  }
}

TEST(FromRows, InfersClassCountAndChecksWidth) {
  const std::vector<std::vector<double>> x{{1, 2}, {3, 4}, {5, 6}};
  EXPECT_EQ(DataSet::from_rows(x, {0, 2, 1}).num_classes(), 3u);
  EXPECT_EQ(DataSet::from_rows(x, {0, 0, 0}).num_classes(), 2u);
  const std::vector<std::vector<double>> ragged{{1, 2}, {3}};
  EXPECT_THROW(DataSet::from_rows(ragged, {0, 1}), DataError);
  const std::vector<double> flat{1, 2, 3, 4, 5, 6};
  const std::vector<Label> y{0, 1, 0};
  const DataSet d = dataset_from_arrays(flat, 3, 2, y);
  EXPECT_EQ(d.row(1), (std::vector<double>{3, 4}));
  EXPECT_THROW(dataset_from_arrays(flat, 2, 2, y), DataError);
}

}  // namespace
