// Copyright 2026 The agerec Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.


#include "agerec/evaluation.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>
#include <set>

#include <gtest/gtest.h>

#include "agerec/common.h"
#include "agerec/preprocess.h"
#include "agerec/profiles.h"
#include "agerec/recommenders.h"
#include "test_util.h"

namespace agerec {
namespace {

using Items = std::vector<ItemIndex>;

TEST(RankingMetricsTest, WorkedValues) {
  const Items ranked = {10, 11, 12, 13, 14};
  const Items rel13 = {10, 12};
  EXPECT_NEAR(NdcgAtK(ranked, rel13, 5), 1.5 / (1.0 + 1.0 / std::log2(3.0)), 1e-12);
  EXPECT_NEAR(NdcgAtK(ranked, rel13, 5), 0.91972, 1e-5);
  EXPECT_NEAR(MapAtK(ranked, rel13, 5), (1.0 + 2.0 / 3.0) / 2.0, 1e-12);
  EXPECT_NEAR(MrrAtK(ranked, Items{13}, 5), 0.25, 1e-15);

  EXPECT_EQ(NdcgAtK(ranked, Items{10, 11}, 5), 1.0);
  EXPECT_EQ(NdcgAtK(ranked, Items{99}, 5), 0.0);
  EXPECT_EQ(MrrAtK(ranked, Items{99}, 5), 0.0);
  for (auto f : {NdcgAtK, MrrAtK, MapAtK}) EXPECT_EQ(f(ranked, Items{10}, 5), 1.0);
  EXPECT_THROW(NdcgAtK(ranked, Items{}, 5), ValidationError);
}

// Enumerates ranks directly from the definitions.
struct Oracle {
  double ndcg = 0, mrr = 0, map = 0;
};
Oracle Enumerate(const Items& ranked, const Items& relevant, std::size_t k) {
  std::set<ItemIndex> rel(relevant.begin(), relevant.end());
  Oracle o;
  double dcg = 0, idcg = 0, hits = 0, ap = 0;
  for (std::size_t r = 1; r <= std::min(k, ranked.size()); ++r) {
    if (!rel.count(ranked[r - 1])) continue;
    dcg += 1.0 / std::log2(r + 1.0);
    if (o.mrr == 0) o.mrr = 1.0 / r;
    hits += 1;
    ap += hits / r;
  }
  for (std::size_t r = 1; r <= std::min(k, rel.size()); ++r) idcg += 1.0 / std::log2(r + 1.0);
  o.ndcg = dcg / idcg;
  o.map = ap / std::min(k, rel.size());
  return o;
}

TEST(RankingMetricsTest, MatchExhaustiveOracle) {
  std::mt19937_64 rng(12);
  for (int trial = 0; trial < 2000; ++trial) {
    const std::size_t items = 1 + rng() % 20;
    Items perm(items);
    std::iota(perm.begin(), perm.end(), 0);
    std::shuffle(perm.begin(), perm.end(), rng);
    const std::size_t list = 1 + rng() % items;
    Items ranked(perm.begin(), perm.begin() + list);
    std::shuffle(perm.begin(), perm.end(), rng);
    Items relevant(perm.begin(), perm.begin() + 1 + rng() % items);
    std::sort(relevant.begin(), relevant.end());
    const std::size_t k = 1 + rng() % 20;
    const Oracle o = Enumerate(ranked, relevant, k);
    const double ndcg = NdcgAtK(ranked, relevant, k);
    const double mrr = MrrAtK(ranked, relevant, k);
    const double map = MapAtK(ranked, relevant, k);
    EXPECT_NEAR(ndcg, o.ndcg, 1e-12);
    EXPECT_NEAR(mrr, o.mrr, 1e-12);
    EXPECT_NEAR(map, o.map, 1e-12);
    for (double v : {ndcg, mrr, map}) {
      EXPECT_GE(v, 0.0);
      EXPECT_LE(v, 1.0 + 1e-12);
    }
    if (std::find(relevant.begin(), relevant.end(), ranked[0]) != relevant.end()) {
      EXPECT_EQ(mrr, 1.0);
    }
  }
}

std::vector<ItemRecord> GenreItems(const std::vector<std::vector<double>>& dists) {
  std::vector<ItemRecord> items;
  for (const auto& d : dists) {
    ItemRecord r;
    r.genres = GenreDistribution(d);
    items.push_back(r);
  }
  return items;
}

TEST(MiscalibrationTest, WorkedValues) {
  const auto items = GenreItems({{1, 0}, {0, 1}, {0.5, 0.5}});
  const auto rgp_b = RecommendationGenreProfile(Items{1, 1}, items, 2);
  ASSERT_TRUE(rgp_b);
  EXPECT_NEAR(GenreMiscalibration(GenreDistribution({1, 0}), *rgp_b, LogBase::kTwo), 1.0, 1e-12);
  const auto rgp_a = RecommendationGenreProfile(Items{0}, items, 2);
  EXPECT_NEAR(GenreMiscalibration(GenreDistribution({0.5, 0.5}), *rgp_a, LogBase::kTwo), 0.311278,
              1e-6);
  const auto mix = RecommendationGenreProfile(Items{2, 2, 2}, items, 2);
  EXPECT_EQ(GenreMiscalibration(GenreDistribution({0.5, 0.5}), *mix, LogBase::kTwo), 0.0);
  // Unweighted mean of the listed items.
  EXPECT_EQ(RecommendationGenreProfile(Items{0, 1}, items, 2)->weights(),
            (std::vector<double>{0.5, 0.5}));
  EXPECT_FALSE(RecommendationGenreProfile(Items{}, items, 2));
}

TEST(MiscalibrationTest, ReplayOfOwnProfileIsCalibrated) {
  // Single-genre-mix user: every training item has the same vector.
  const InteractionLog log = testing::MakeLog(3, {20}, {{0, 2}, {0, 2}, {0, 2}},
                                              {{0, 0}, {0, 1}, {0, 2}});
  const auto ugps = UgpsFromEvents(log.events, log.items, 1, 3);
  const auto rgp = RecommendationGenreProfile(Items{0, 1, 2}, log.items, 3);
  EXPECT_EQ(GenreMiscalibration(*ugps[0], *rgp, LogBase::kTwo), 0.0);
}

TEST(PopularityLiftTest, WorkedValues) {
  EXPECT_EQ(PopularityLift(0.3, 0.3), 0.0);
  EXPECT_NEAR(PopularityLift(0.2, 0.4), 1.0, 1e-12);
  EXPECT_THROW(PopularityLift(0.0, 0.4), ValidationError);
}

UserEvaluation Eval(UserIndex user, AgeGroup group, double ndcg) {
  UserEvaluation ev;
  ev.user = user;
  ev.group = group;
  ev.recommender = "MostPop";
  ev.metrics = {ndcg, ndcg, ndcg, 0.1, 0.5};
  return ev;
}

const GroupCell& Cell(const std::vector<GroupCell>& cells, AgeGroup group, std::string_view metric) {
  for (const auto& c : cells) {
    if (c.group == group && c.metric == metric) return c;
  }
  throw std::runtime_error("no cell");
}

TEST(AggregateTest, CellMeans) {
  std::vector<UserEvaluation> evs = {Eval(0, AgeGroup::kChild, 0.7),
                                     Eval(1, AgeGroup::kMainstream, 0.2),
                                     Eval(2, AgeGroup::kMainstream, 0.4)};
  UserEvaluation excluded = Eval(3, AgeGroup::kMainstream, 0.9);
  excluded.excluded = true;
  evs.push_back(excluded);
  const auto cells = Aggregate(evs);
  EXPECT_EQ(cells.size(), 15u);
  EXPECT_EQ(*Cell(cells, AgeGroup::kChild, "ndcg").mean, 0.7);
  EXPECT_NEAR(*Cell(cells, AgeGroup::kMainstream, "ndcg").mean, 0.3, 1e-12);
  EXPECT_EQ(Cell(cells, AgeGroup::kMainstream, "ndcg").n, 2u);
  EXPECT_FALSE(Cell(cells, AgeGroup::kNma, "ndcg").mean);

  std::mt19937_64 rng(2);
  for (int k = 0; k < 10; ++k) {
    std::shuffle(evs.begin(), evs.end(), rng);
    const auto again = Aggregate(evs);
    for (std::size_t c = 0; c < cells.size(); ++c) EXPECT_EQ(again[c].mean, cells[c].mean);
  }
}

TEST(EvaluateTableTest, EndToEnd) {
  std::mt19937_64 rng(6);
  std::vector<int> ages;
  for (int u = 0; u < 40; ++u) ages.push_back(13 + u);
  std::vector<std::vector<std::size_t>> genres;
  for (std::size_t i = 0; i < 30; ++i) genres.push_back({i % 3});
  const InteractionLog log = testing::MakeLog(3, ages, genres, testing::RandomPairs(40, 30, 0.4, rng));
  const SplitBundle bundle = Preprocess(log, PreprocessOptions{});
  const auto ctx = MakeEvaluationContext(bundle, log, bundle.test, LogBase::kTwo, 10);
  const auto matrix = std::make_shared<const TrainMatrix>(bundle.train, log.users.size(),
                                                          log.items.size());
  MostPopRecommender model(matrix);
  std::vector<UserIndex> users;
  for (UserIndex u = 0; u < log.users.size(); ++u) {
    if (bundle.surviving_users[u]) users.push_back(u);
  }
  const auto table = RecommendTopN(model, users, BuildExclusions(bundle.train, log.users.size()), 10);
  const auto evs = EvaluateTable(table, ctx, TrainingVariant::kGeneral);
  ASSERT_EQ(evs.size(), users.size());
  for (const auto& ev : evs) {
    EXPECT_EQ(ev.group, bundle.user_group[ev.user]);
    EXPECT_GE(ev.gmc(), 0.0);
    EXPECT_LE(ev.gmc(), 1.0);
    EXPECT_FALSE(std::isnan(ev.pl()));
  }
  EXPECT_NEAR(MeanNdcg(table, ctx.relevance, 10),
              std::accumulate(evs.begin(), evs.end(), 0.0,
                              [](double s, const UserEvaluation& e) { return s + e.ndcg(); }) /
                  evs.size(),
              1e-12);

  const auto dir = testing::TempDir("per_user");
  WritePerUserMetrics(dir / "per_user.tsv", evs, log.users, "h");
  const auto back = ReadPerUserMetrics(dir / "per_user.tsv", log);
  ASSERT_EQ(back.size(), evs.size());
  for (std::size_t k = 0; k < evs.size(); ++k) {
    EXPECT_EQ(back[k].user, evs[k].user);
    EXPECT_NEAR(back[k].ndcg(), evs[k].ndcg(), 1e-6);
  }
}

TEST(ChildSetTest, MainstreamPerturbationLeavesChildModelUnchanged) {
  std::mt19937_64 rng(14);
  std::vector<int> ages;
  for (int u = 0; u < 30; ++u) ages.push_back(u % 2 ? 15 : 35);
  const InteractionLog log = testing::MakeLog(1, ages, std::vector<std::vector<std::size_t>>(25, {0}),
                                              testing::RandomPairs(30, 25, 0.5, rng));
  const SplitBundle bundle = Preprocess(log, PreprocessOptions{});
  SplitBundle perturbed = bundle;
  for (auto& e : perturbed.train) {
    if (perturbed.user_group[e.user] == AgeGroup::kMainstream) e.item = (e.item + 1) % 25;
  }
  const auto a = DeriveChildSet(bundle);
  const auto b = DeriveChildSet(perturbed);
  ASSERT_EQ(a.size(), b.size());
  MostPopRecommender ma(std::make_shared<const TrainMatrix>(a, 30, 25));
  MostPopRecommender mb(std::make_shared<const TrainMatrix>(b, 30, 25));
  EXPECT_EQ(ma.counts(), mb.counts());
}

TEST(VariantTest, Names) {
  EXPECT_EQ(VariantName(TrainingVariant::kChild), "Child");
  EXPECT_EQ(ParseVariant("general"), TrainingVariant::kGeneral);
  EXPECT_THROW(ParseVariant("adult"), ConfigError);
}

}  // namespace
}  // namespace agerec
