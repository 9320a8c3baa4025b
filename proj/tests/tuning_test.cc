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


#include "agerec/tuning.h"

#include <algorithm>
#include <cmath>
#include <memory>
#include <numeric>

#include <gtest/gtest.h>

#include "agerec/common.h"
#include "agerec/evaluation.h"
#include "agerec/profiles.h"
#include "agerec/synth.h"
#include "test_util.h"

namespace agerec {
namespace {

TEST(GridTest, ParseFormatEnumerate) {
  const Grid g = ParseGrid("alpha=0.3,0.6;beta=0,0.2,0.4");
  ASSERT_EQ(g.size(), 2u);
  EXPECT_EQ(FormatGrid(g), "alpha=0.3,0.6;beta=0,0.2,0.4");
  const auto points = EnumerateGrid(g);
  ASSERT_EQ(points.size(), 6u);
  // First axis varies slowest.
  EXPECT_EQ(points[0], (HyperParams{{"alpha", 0.3}, {"beta", 0.0}}));
  EXPECT_EQ(points[1], (HyperParams{{"alpha", 0.3}, {"beta", 0.2}}));
  EXPECT_EQ(points[3], (HyperParams{{"alpha", 0.6}, {"beta", 0.0}}));
  EXPECT_THROW(ParseGrid("alpha=1;alpha=2"), ConfigError);
  EXPECT_THROW(ParseGrid("alpha="), ConfigError);
  EXPECT_THROW(ParseGrid("alpha"), ConfigError);
  EXPECT_THROW(ParseGrid("alpha=x"), ConfigError);
}

TEST(GridTest, Defaults) {
  EXPECT_EQ(EnumerateGrid(DefaultGrid(ModelFamily::kRp3Beta)).size(), 5u * 6u);
  EXPECT_EQ(EnumerateGrid(DefaultGrid(ModelFamily::kIals)).size(), 27u);
  EXPECT_EQ(EnumerateGrid(DefaultGrid(ModelFamily::kMostPop)).size(), 1u);
}

struct Fixture {
  std::shared_ptr<const TrainMatrix> matrix;
  std::vector<UserIndex> users;
  ExclusionIndex exclusions;
  RelevanceIndex validation;
  TuningTarget Target(std::uint64_t seed = 3) const {
    return TuningTarget{matrix, users, &exclusions, &validation, 20, seed};
  }
};

// Popularity-skewed log whose held-out items are each user's unseen tail.
Fixture AntiPopular() {
  SynthSpec spec;
  spec.users_per_group = {40, 40, 40};
  spec.n_items = 120;
  spec.zipf_s = 1.2;
  spec.seed = 21;
  const InteractionLog log = Generate(spec);
  Fixture f;
  f.matrix = std::make_shared<const TrainMatrix>(log.events, log.users.size(), log.items.size());
  f.exclusions = BuildExclusions(log.events, log.users.size());
  const auto pop = ItemPopularity(log.events, log.items.size());
  std::vector<ItemIndex> order(log.items.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](ItemIndex a, ItemIndex b) {
    return pop[a] < pop[b];
  });
  f.validation.resize(log.users.size());
  for (UserIndex u = 0; u < log.users.size(); ++u) {
    f.users.push_back(u);
    for (ItemIndex i : order) {
      if (pop[i] == 0) continue;
      if (!std::binary_search(f.exclusions[u].begin(), f.exclusions[u].end(), i)) {
        f.validation[u].push_back(i);
      }
      if (f.validation[u].size() == 10) break;
    }
    std::sort(f.validation[u].begin(), f.validation[u].end());
  }
  return f;
}

TEST(TuneTest, SingletonGrid) {
  const Fixture f = AntiPopular();
  const auto r = Tune(ModelFamily::kRp3Beta, ParseGrid("alpha=0.7;beta=0.3"), f.Target());
  EXPECT_EQ(r.best, (HyperParams{{"alpha", 0.7}, {"beta", 0.3}}));
  EXPECT_EQ(r.trace.size(), 1u);
}

TEST(TuneTest, AntiPopularTruthPrefersPenalty) {
  const Fixture f = AntiPopular();
  const auto r = Tune(ModelFamily::kRp3Beta, ParseGrid("alpha=1;beta=0,0.6"), f.Target());
  // Direct evaluation of both points.
  double direct[2];
  for (int k = 0; k < 2; ++k) {
    Rp3BetaRecommender model(f.matrix, 1.0, k == 0 ? 0.0 : 0.6);
    direct[k] = MeanNdcg(RecommendTopN(model, f.users, f.exclusions, 20), f.validation, 20);
    EXPECT_EQ(r.trace[k].objective, direct[k]);
  }
  EXPECT_GT(direct[1], direct[0]);
  EXPECT_EQ(GetParam(r.best, "beta"), 0.6);
}

TEST(TuneTest, DeterministicAndTiesGoToFirstPoint) {
  const Fixture f = AntiPopular();
  const Grid grid = ParseGrid("factors=2,4;reg=0.01;alpha=10;epochs=2");
  const auto a = Tune(ModelFamily::kIals, grid, f.Target());
  const auto b = Tune(ModelFamily::kIals, grid, f.Target());
  EXPECT_EQ(a.best, b.best);
  ASSERT_EQ(a.trace.size(), b.trace.size());
  for (std::size_t k = 0; k < a.trace.size(); ++k) EXPECT_EQ(a.trace[k].objective, b.trace[k].objective);

  // MostPop ignores its parameter, so every point ties.
  const auto tie = Tune(ModelFamily::kMostPop, ParseGrid("dummy=1,2,3"), f.Target());
  EXPECT_EQ(tie.best, (HyperParams{{"dummy", 1.0}}));
}

TEST(TuneTest, NoValidationUsersIsAnError) {
  Fixture f = AntiPopular();
  for (auto& v : f.validation) v.clear();
  EXPECT_THROW(Tune(ModelFamily::kMostPop, ParseGrid("dummy=1"), f.Target()), DataError);
}

}  // namespace
}  // namespace agerec
