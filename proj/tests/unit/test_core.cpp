#include <gtest/gtest.h>

#include <cmath>

#include "prefopt/dataset_io.hpp"
#include "prefopt/errors.hpp"
#include "prefopt/rng.hpp"
#include "prefopt/types.hpp"

namespace prefopt {
namespace {

std::vector<std::uint64_t> draws(RngStream& r, int k) {
  std::vector<std::uint64_t> v;
  for (int i = 0; i < k; ++i) v.push_back(r.next_u64());
  return v;
}

TEST(Streams, SameSeedGivesIdenticalSequencesInEveryPurpose) {
  auto a = make_streams(2021);
  auto b = make_streams(2021);
  for (std::size_t p = 0; p < kNumStreamPurposes; ++p) {
    const auto purpose = static_cast<StreamPurpose>(p);
    EXPECT_EQ(draws(a[purpose], 50), draws(b[purpose], 50)) << to_string(purpose);
  }
}

TEST(Streams, DifferentSeedsDiffer) {
  auto a = make_streams(2021);
  auto b = make_streams(2022);
  for (std::size_t p = 0; p < kNumStreamPurposes; ++p) {
    const auto purpose = static_cast<StreamPurpose>(p);
    EXPECT_NE(draws(a[purpose], 3), draws(b[purpose], 3));
  }
}

TEST(Streams, PurposesAreDistinct) {
  auto s = make_streams(2021);
  const auto ref = draws(s[StreamPurpose::env_init], 3);
  for (std::size_t p = 1; p < kNumStreamPurposes; ++p) {
    EXPECT_NE(draws(s[static_cast<StreamPurpose>(p)], 3), ref);
  }
}

TEST(Streams, GoldenEvaluationDraws) {
  RngStream r(2021, StreamPurpose::evaluation);
  EXPECT_EQ(r.next_u64(), 12808883124200604944ull);
  EXPECT_EQ(r.next_u64(), 12303977801643034434ull);
  EXPECT_EQ(r.next_u64(), 17669283996052870437ull);
  RngStream u(2021, StreamPurpose::evaluation);
  EXPECT_EQ(u.uniform01(), 0.69437094551856049);
  EXPECT_EQ(u.uniform01(), 0.66699997313773984);
  EXPECT_EQ(u.uniform01(), 0.95785380473919379);
}

TEST(Streams, NegativeSeedRejected) { EXPECT_THROW(make_streams(-1), std::invalid_argument); }

TEST(Streams, UniformIndexStaysInRangeAndCoversIt) {
  RngStream r(7, StreamPurpose::training);
  std::vector<int> hits(7, 0);
  for (int i = 0; i < 7000; ++i) {
    const auto k = r.uniform_index(7);
    ASSERT_LT(k, 7u);
    ++hits[k];
  }
  for (int h : hits) EXPECT_GT(h, 800);
  EXPECT_THROW(r.uniform_index(0), std::invalid_argument);
}

TEST(Streams, Uniform01InUnitInterval) {
  RngStream r(3, StreamPurpose::data_collection);
  double sum = 0.0;
  for (int i = 0; i < 100000; ++i) {
    const double u = r.uniform01();
    ASSERT_GE(u, 0.0);
    ASSERT_LT(u, 1.0);
    sum += u;
  }
  EXPECT_NEAR(sum / 100000, 0.5, 0.01);
}

TEST(ValidateDataset, EmptyIsViolation) {
  const auto rep = validate_dataset(PreferenceDataset{}, 4);
  ASSERT_FALSE(rep.ok());
  EXPECT_EQ(rep.violations.front().index, -1);
}

TEST(ValidateDataset, DistinctInRangeIsOk) {
  PreferenceDataset d({{State{0.3}, ActionId(3), ActionId(1)}});
  EXPECT_TRUE(validate_dataset(d, 4).ok());
}

TEST(ValidateDataset, WinnerEqualsLoserReportsIndex) {
  PreferenceDataset d({{State{0.3}, ActionId(2), ActionId(2)}});
  const auto rep = validate_dataset(d, 4);
  ASSERT_EQ(rep.violations.size(), 1u);
  EXPECT_EQ(rep.violations[0].index, 0);
}

TEST(ValidateDataset, OutOfRangeIndicesReported) {
  PreferenceDataset d({{State{0.1}, ActionId(0), ActionId(1)},
                       {State{0.2}, ActionId(4), ActionId(1)},
                       {State{0.3}, ActionId(0), ActionId(-1)}});
  const auto rep = validate_dataset(d, 4);
  ASSERT_EQ(rep.violations.size(), 2u);
  EXPECT_EQ(rep.violations[0].index, 1);
  EXPECT_EQ(rep.violations[1].index, 2);
}

TEST(Datasets, CountsMatchContents) {
  PromptDataset p({State{0.1}, State{0.2}, State{0.3}});
  EXPECT_EQ(p.m(), 3u);
  EXPECT_EQ(p.prefix(2).m(), 2u);
  EXPECT_EQ(p.prefix(2).states()[1], State{0.2});
  EXPECT_EQ(p.prefix(0).m(), 0u);
  EXPECT_EQ(PromptDataset{}.m(), 0u);
}

TEST(DatasetJson, PreferenceRoundTripWithFixedFieldOrder) {
  PreferenceDataset d({{State{0.25}, ActionId(3), ActionId(0)}, {State{0.5, -0.5}, ActionId(1), ActionId(2)}});
  const auto j = to_json(d);
  EXPECT_EQ(j.dump(), R"({"n":2,"triples":[{"s":[0.25],"w":3,"l":0},{"s":[0.5,-0.5],"w":1,"l":2}]})");
  const auto back = preference_dataset_from_json(nlohmann::json::parse(j.dump()));
  ASSERT_EQ(back.n(), 2u);
  EXPECT_EQ(back[1].state, d[1].state);
  EXPECT_EQ(back[0].winner, ActionId(3));
  EXPECT_EQ(back[0].loser, ActionId(0));
}

TEST(DatasetJson, PromptRoundTrip) {
  PromptDataset p({State{0.1}, State{0.9}});
  const auto j = to_json(p);
  EXPECT_EQ(j.dump(), R"({"m":2,"states":[[0.1],[0.9]]})");
  EXPECT_EQ(prompt_dataset_from_json(nlohmann::json::parse(j.dump())).states(), p.states());
}

TEST(DatasetJson, CountMismatchRejected) {
  const auto bad = nlohmann::json::parse(R"({"n":3,"triples":[{"s":[0.1],"w":1,"l":0}]})");
  EXPECT_THROW(preference_dataset_from_json(bad), Error);
  const auto bad_p = nlohmann::json::parse(R"({"m":0,"states":[[0.1]]})");
  EXPECT_THROW(prompt_dataset_from_json(bad_p), Error);
}

}  // namespace
}  // namespace prefopt
