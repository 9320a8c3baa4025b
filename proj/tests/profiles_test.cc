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


#include "agerec/profiles.h"

#include <algorithm>
#include <numeric>
#include <random>

#include <gtest/gtest.h>

#include "agerec/common.h"
#include "test_util.h"

namespace agerec {
namespace {

using testing::MakeLog;

UserGenreProfile Member(std::vector<double> w) {
  UserGenreProfile p;
  p.distribution = GenreDistribution(std::move(w));
  return p;
}

TEST(UgpTest, SingleItemMean) {
  const InteractionLog log = MakeLog(3, {20}, {{0, 1}}, {{0, 0}});
  const auto ugp = BuildUgp(log, 0);
  ASSERT_TRUE(ugp);
  EXPECT_EQ(ugp->distribution.weights(), (std::vector<double>{0.5, 0.5, 0.0}));
}

TEST(UgpTest, WeightedMean) {
  InteractionLog log = MakeLog(2, {20}, {{0}, {1}}, {{0, 0}, {0, 1}});
  log.events[0].weight = 3;
  const auto ugp = BuildUgp(log, 0);
  ASSERT_TRUE(ugp);
  EXPECT_NEAR(ugp->distribution[0], 0.75, 1e-12);
  EXPECT_NEAR(ugp->distribution[1], 0.25, 1e-12);
  EXPECT_EQ(ugp->total_weight, 4u);
}

TEST(UgpTest, RepeatedItemIsIdempotent) {
  const InteractionLog log = MakeLog(3, {20}, {{0, 2}}, {{0, 0}, {0, 0}});
  EXPECT_EQ(BuildUgp(log, 0)->distribution.weights(), log.items[0].genres.weights());
}

TEST(UgpTest, OrderAndWeightSplittingInvariance) {
  std::mt19937_64 rng(19);
  std::uniform_int_distribution<int> genre_count(1, 4);
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<std::vector<std::size_t>> items;
    for (int i = 0; i < 8; ++i) {
      std::vector<std::size_t> g(5);
      std::iota(g.begin(), g.end(), 0);
      std::shuffle(g.begin(), g.end(), rng);
      g.resize(genre_count(rng));
      std::sort(g.begin(), g.end());
      items.push_back(g);
    }
    InteractionLog log = MakeLog(5, {25}, items, {});
    InteractionLog split = log;
    for (int k = 0; k < 6; ++k) {
      Interaction e;
      e.item = static_cast<ItemIndex>(rng() % 8);
      e.weight = 1 + static_cast<std::uint32_t>(rng() % 4);
      e.age = 25;
      log.events.push_back(e);
      for (std::uint32_t w = 0; w < e.weight; ++w) {
        Interaction one = e;
        one.weight = 1;
        split.events.push_back(one);
      }
    }
    InteractionLog shuffled = split;
    std::shuffle(shuffled.events.begin(), shuffled.events.end(), rng);
    const auto a = BuildUgp(log, 0)->distribution.weights();
    const auto b = BuildUgp(split, 0)->distribution.weights();
    const auto c = BuildUgp(shuffled, 0)->distribution.weights();
    for (std::size_t g = 0; g < 5; ++g) {
      EXPECT_NEAR(a[g], b[g], 1e-12);
      EXPECT_NEAR(b[g], c[g], 1e-12);
    }
  }
}

TEST(UgpTest, NoEventsGivesNullopt) {
  const InteractionLog log = MakeLog(2, {20, 30}, {{0}}, {{0, 0}});
  EXPECT_FALSE(BuildUgp(log, 1));
  const auto all = UgpsFromEvents(log.events, log.items, 2, 2);
  EXPECT_TRUE(all[0]);
  EXPECT_FALSE(all[1]);
}

TEST(AgpTest, Means) {
  std::vector<UserGenreProfile> sym = {Member({1, 0}), Member({0, 1})};
  EXPECT_EQ(BuildAgp(sym, "x")->distribution.weights(), (std::vector<double>{0.5, 0.5}));
  std::vector<UserGenreProfile> one = {Member({0.2, 0.8})};
  EXPECT_EQ(BuildAgp(one, "x")->distribution.weights(), one[0].distribution.weights());
  std::vector<UserGenreProfile> three = {Member({0.75, 0.25}), Member({0.25, 0.75}),
                                         Member({0.5, 0.5})};
  const auto agp = BuildAgp(three, "x");
  EXPECT_NEAR(agp->distribution[0], 0.5, 1e-12);
  EXPECT_EQ(agp->member_count, 3u);
  EXPECT_FALSE(BuildAgp({}, "empty"));
}

TEST(IgdTest, Examples) {
  std::vector<UserGenreProfile> same = {Member({0.3, 0.7}), Member({0.3, 0.7})};
  EXPECT_EQ(Igd(*BuildAgp(same, "s"), same), 0.0);

  std::vector<UserGenreProfile> sym = {Member({1, 0}), Member({0, 1})};
  const double igd = Igd(*BuildAgp(sym, "s"), sym);
  EXPECT_NEAR(igd, 0.311278, 1e-6);

  sym.push_back(Member({0.5, 0.5}));
  EXPECT_LT(Igd(*BuildAgp(sym, "s"), sym), igd);
}

TEST(IgdTest, RangeAndZeroIffIdentical) {
  std::mt19937_64 rng(23);
  std::exponential_distribution<double> e(1.0);
  for (int trial = 0; trial < 100; ++trial) {
    std::vector<UserGenreProfile> members;
    for (int m = 0; m < 1 + trial % 6; ++m) {
      std::vector<double> w(4);
      double t = 0;
      for (auto& x : w) t += (x = e(rng));
      for (auto& x : w) x /= t;
      members.push_back(Member(w));
    }
    const double igd = Igd(*BuildAgp(members, "r"), members);
    EXPECT_GE(igd, 0.0);
    EXPECT_LE(igd, 1.0);
    EXPECT_EQ(igd == 0.0, members.size() == 1);
  }
}

TEST(ApdTest, SymmetricAndZeroOnSelf) {
  std::vector<UserGenreProfile> a = {Member({0.9, 0.1})};
  std::vector<UserGenreProfile> b = {Member({0.2, 0.8})};
  const auto pa = *BuildAgp(a, "a");
  const auto pb = *BuildAgp(b, "b");
  EXPECT_EQ(Apd(pa, pa), 0.0);
  EXPECT_EQ(Apd(pa, pb), Apd(pb, pa));
  EXPECT_GT(Apd(pa, pb), 0.0);
}

TEST(PopularityTest, SelfNormalization) {
  const InteractionLog log = MakeLog(1, {20}, {{0}}, {{0, 0}});
  const auto p = PopularityProfiles(log);
  ASSERT_EQ(p.size(), 1u);
  EXPECT_EQ(p[0].profile_popularity, 1.0);
  EXPECT_EQ(p[0].profile_age_popularity, 1.0);
  EXPECT_EQ(p[0].n_interactions, 1u);
  EXPECT_EQ(p[0].profile_size, 1u);
}

TEST(PopularityTest, HandNormalization) {
  // Item 0 has two users, item 1 one.
  const InteractionLog log = MakeLog(1, {30, 30}, {{0}, {0}}, {{0, 0}, {0, 1}, {1, 0}});
  const auto pop = ItemPopularity(log.events, 2);
  EXPECT_EQ(pop, (std::vector<double>{1.0, 0.5}));
  const auto p = PopularityProfiles(log);
  EXPECT_NEAR(p[0].profile_popularity, 0.75, 1e-12);
  EXPECT_NEAR(p[1].profile_popularity, 1.0, 1e-12);
}

TEST(PopularityTest, DistinctUsersNotEvents) {
  const InteractionLog log = MakeLog(1, {30, 30}, {{0}, {0}},
                                     {{0, 0}, {0, 0}, {0, 0}, {1, 1}});
  EXPECT_EQ(ItemPopularity(log.events, 2), (std::vector<double>{1.0, 1.0}));
}

TEST(PopularityTest, AgePeersUseGroup) {
  // Child 0 and 1 share item 0; adult 2 alone on item 1 and item 0.
  const InteractionLog log = MakeLog(1, {14, 15, 40}, {{0}, {0}},
                                     {{0, 0}, {1, 0}, {2, 1}, {2, 0}});
  const auto p = PopularityProfiles(log);
  EXPECT_EQ(p[2].profile_age_popularity, 1.0);
  EXPECT_NEAR(p[2].profile_popularity, (1.0 + 1.0 / 3.0) / 2.0, 1e-12);
}

TEST(ExploreTest, GroupAgpsAndDeviations) {
  const InteractionLog log = MakeLog(2, {14, 30, 60}, {{0}, {1}},
                                     {{0, 0}, {1, 1}, {2, 0}, {2, 1}});
  const ExplorationResult r = Explore(log, LogBase::kTwo);
  ASSERT_EQ(r.group_agps.size(), 3u);
  EXPECT_EQ(r.ugps.size(), 3u);
  bool found = false;
  for (const auto& [a, b, v] : r.apd) {
    if (a == "Children" && b == "Mainstream") {
      EXPECT_NEAR(v, 1.0, 1e-12);
      found = true;
    }
  }
  EXPECT_TRUE(found);
}

}  // namespace
}  // namespace agerec
