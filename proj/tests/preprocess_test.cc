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


#include "agerec/preprocess.h"

#include <algorithm>
#include <array>
#include <map>
#include <optional>
#include <random>
#include <set>
#include <utility>

#include <gtest/gtest.h>

#include "agerec/common.h"
#include "test_util.h"

namespace agerec {
namespace {

using testing::MakeLog;
using Pair = std::pair<UserIndex, ItemIndex>;

std::multiset<Pair> Pairs(const std::vector<Interaction>& events) {
  std::multiset<Pair> s;
  for (const auto& e : events) s.emplace(e.user, e.item);
  return s;
}

InteractionLog RatedLog(const std::vector<int>& ratings) {
  std::vector<Pair> pairs;
  for (std::size_t k = 0; k < ratings.size(); ++k) pairs.emplace_back(0, static_cast<ItemIndex>(k));
  InteractionLog log = MakeLog(1, {30}, std::vector<std::vector<std::size_t>>(ratings.size(), {0}),
                               pairs);
  log.format = LogFormat::kRatingTable;
  for (std::size_t k = 0; k < ratings.size(); ++k) log.events[k].rating = ratings[k];
  return log;
}

TEST(BinarizeTest, RatingThreshold) {
  const InteractionLog out = Binarize(RatedLog({2, 3, 4, 5}), BinarizeMode::Parse("rating-threshold:3"));
  ASSERT_EQ(out.events.size(), 2u);
  EXPECT_EQ(*out.events[0].rating, 4);
  EXPECT_EQ(*out.events[1].rating, 5);
}

TEST(BinarizeTest, MinCountCollapsesPairs) {
  InteractionLog log = MakeLog(1, {30}, {{0}, {0}}, {{0, 0}, {0, 1}, {0, 1}});
  log.events[0].timestamp = 50;
  log.events[1].timestamp = 90;
  log.events[2].timestamp = 70;
  const InteractionLog out = Binarize(log, BinarizeMode::Parse("min-count:2"));
  ASSERT_EQ(out.events.size(), 1u);
  EXPECT_EQ(out.events[0].item, 1u);
  EXPECT_EQ(out.events[0].weight, 1u);
  EXPECT_EQ(*out.events[0].timestamp, 70);
}

TEST(BinarizeTest, KeepAllCoercesWeights) {
  InteractionLog log = MakeLog(1, {30}, {{0}, {0}}, {{0, 0}, {0, 1}, {0, 1}});
  log.events[0].weight = 7;
  const InteractionLog out = Binarize(log, BinarizeMode::Parse("keep-all"));
  ASSERT_EQ(out.events.size(), 3u);
  for (const auto& e : out.events) EXPECT_EQ(e.weight, 1u);
  EXPECT_THROW(BinarizeMode::Parse("threshold"), ConfigError);
  EXPECT_EQ(BinarizeMode::Parse("min-count:3").ToString(), "min-count:3");
}

TEST(KCoreTest, HandExample) {
  // A:{1,2}, B:{1,2,3}, C:{3}.
  const InteractionLog log = MakeLog(1, {20, 20, 20}, {{0}, {0}, {0}},
                                     {{0, 0}, {0, 1}, {1, 0}, {1, 1}, {1, 2}, {2, 2}});
  const InteractionLog out = KCore(log, 2, 2);
  EXPECT_EQ(Pairs(out.events), (std::multiset<Pair>{{0, 0}, {0, 1}, {1, 0}, {1, 1}}));
  EXPECT_EQ(Pairs(KCore(out, 2, 2).events), Pairs(out.events));
  EXPECT_EQ(Pairs(KCore(log, 1, 1).events), Pairs(log.events));
}

// Peels one offending node at a time.
std::multiset<Pair> PeelOracle(std::vector<Pair> events, std::size_t ku, std::size_t ki) {
  while (true) {
    std::map<UserIndex, std::size_t> du;
    std::map<ItemIndex, std::size_t> di;
    for (auto [u, i] : events) {
      ++du[u];
      ++di[i];
    }
    std::optional<UserIndex> bad_user;
    std::optional<ItemIndex> bad_item;
    for (auto [u, d] : du) {
      if (d < ku) {
        bad_user = u;
        break;
      }
    }
    if (!bad_user) {
      for (auto [i, d] : di) {
        if (d < ki) {
          bad_item = i;
          break;
        }
      }
    }
    if (!bad_user && !bad_item) break;
    std::erase_if(events, [&](const Pair& p) {
      return (bad_user && p.first == *bad_user) || (bad_item && p.second == *bad_item);
    });
  }
  return {events.begin(), events.end()};
}

TEST(KCoreTest, RandomGraphsMatchPeelingOracle) {
  std::mt19937_64 rng(101);
  int nonempty = 0;
  for (int trial = 0; trial < 100; ++trial) {
    const std::size_t users = 5 + rng() % 20;
    const std::size_t items = 5 + rng() % 20;
    const auto pairs = testing::RandomPairs(users, items, 0.1 + 0.3 * (trial % 4) / 3.0, rng);
    if (pairs.empty()) continue;
    const std::size_t ku = 1 + rng() % 4;
    const std::size_t ki = 1 + rng() % 4;
    const InteractionLog log = MakeLog(1, std::vector<int>(users, 25),
                                       std::vector<std::vector<std::size_t>>(items, {0}), pairs);
    const auto expected = PeelOracle(pairs, ku, ki);
    if (expected.empty()) {
      EXPECT_THROW(KCore(log, ku, ki), DataError);
      continue;
    }
    ++nonempty;
    const InteractionLog core = KCore(log, ku, ki);
    EXPECT_EQ(Pairs(core.events), expected);
    // Fixed point and idempotence.
    std::map<UserIndex, std::size_t> du;
    std::map<ItemIndex, std::size_t> di;
    for (const auto& e : core.events) {
      ++du[e.user];
      ++di[e.item];
    }
    for (auto [u, d] : du) EXPECT_GE(d, ku);
    for (auto [i, d] : di) EXPECT_GE(d, ki);
    EXPECT_EQ(Pairs(KCore(core, ku, ki).events), Pairs(core.events));
    // Order invariance.
    InteractionLog shuffled = log;
    std::shuffle(shuffled.events.begin(), shuffled.events.end(), rng);
    EXPECT_EQ(Pairs(KCore(shuffled, ku, ki).events), expected);
  }
  EXPECT_GT(nonempty, 50);
}

TEST(SplitTest, CutSizes) {
  SplitStrategy s;
  const RatioCut ten = CutSizes(10, s);
  EXPECT_EQ(ten.train, 6u);
  EXPECT_EQ(ten.validation, 2u);
  EXPECT_EQ(ten.test, 2u);
  const RatioCut nine = CutSizes(9, s);
  EXPECT_EQ(nine.train, 7u);
  EXPECT_EQ(nine.validation, 1u);
  EXPECT_EQ(nine.test, 1u);
}

TEST(SplitTest, RatioSplitPerUser) {
  // Twenty users over the same ten items keep evaluation items known to train.
  std::vector<Pair> pairs;
  for (UserIndex u = 0; u < 20; ++u) {
    for (ItemIndex i = 0; i < 10; ++i) pairs.emplace_back(u, i);
  }
  const InteractionLog log = MakeLog(1, std::vector<int>(20, 30),
                                     std::vector<std::vector<std::size_t>>(10, {0}), pairs);
  SplitStrategy s;
  s.seed = 4;
  const SplitBundle b = Split(log, s);
  std::map<UserIndex, std::array<std::size_t, 3>> counts;
  for (const auto& e : b.train) ++counts[e.user][0];
  for (const auto& e : b.validation) ++counts[e.user][1];
  for (const auto& e : b.test) ++counts[e.user][2];
  EXPECT_EQ(counts.size(), 20u);
  for (const auto& [u, c] : counts) {
    EXPECT_EQ(c[0], 6u);
    EXPECT_EQ(c[1], 2u);
    EXPECT_EQ(c[2], 2u);
  }
}

TEST(SplitTest, PartitionPropertiesUnderSeeds) {
  std::mt19937_64 rng(77);
  const auto pairs = testing::RandomPairs(60, 40, 0.25, rng);
  std::vector<int> ages;
  for (int u = 0; u < 60; ++u) ages.push_back(13 + u % 50);
  const InteractionLog log = MakeLog(1, ages, std::vector<std::vector<std::size_t>>(40, {0}), pairs);
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    SplitStrategy s;
    s.seed = seed;
    const SplitBundle b = Split(log, s);
    const SplitBundle again = Split(log, s);
    EXPECT_EQ(Pairs(b.train), Pairs(again.train));
    EXPECT_EQ(Pairs(b.test), Pairs(again.test));

    // Disjoint (no pair is duplicated in the input).
    std::multiset<Pair> all = Pairs(b.train);
    for (const auto& p : Pairs(b.validation)) all.insert(p);
    for (const auto& p : Pairs(b.test)) all.insert(p);
    EXPECT_EQ(std::set<Pair>(all.begin(), all.end()).size(), all.size());

    // Exhaustive: every input event of a surviving user is in a partition
    // unless it is an evaluation event whose item never reached train.
    std::set<ItemIndex> train_items;
    for (const auto& e : b.train) train_items.insert(e.item);
    std::size_t unplaced_known = 0;
    for (auto [u, i] : pairs) {
      if (!b.surviving_users[u]) continue;
      if (all.count({u, i}) == 0 && train_items.count(i)) ++unplaced_known;
    }
    EXPECT_EQ(unplaced_known, 0u);

    // Closed world and complete users.
    std::map<UserIndex, std::array<int, 3>> per_user;
    for (const auto& e : b.train) per_user[e.user][0]++;
    for (const auto& e : b.validation) {
      per_user[e.user][1]++;
      EXPECT_TRUE(train_items.count(e.item));
    }
    for (const auto& e : b.test) {
      per_user[e.user][2]++;
      EXPECT_TRUE(train_items.count(e.item));
    }
    for (const auto& [u, c] : per_user) {
      EXPECT_GT(c[0], 0);
      EXPECT_GT(c[1], 0);
      EXPECT_GT(c[2], 0);
    }
    EXPECT_EQ(per_user.size(), b.SurvivingUserCount());
  }
}

TEST(SplitTest, TemporalRangesAndIncompleteUsers) {
  const std::int64_t aug = ParseDate("2009-08-10");
  const std::int64_t sep = ParseDate("2009-09-15");
  const std::int64_t oct = ParseDate("2009-10-03");
  InteractionLog log = MakeLog(1, {20, 30}, {{0}, {0}, {0}},
                               {{0, 0}, {0, 1}, {0, 2}, {1, 0}, {1, 2}});
  log.events[0].timestamp = aug;
  log.events[1].timestamp = sep;
  log.events[2].timestamp = oct;
  log.events[3].timestamp = aug;  // user 1 has no validation event
  log.events[4].timestamp = oct;
  SplitStrategy s;
  s.kind = SplitStrategy::Kind::kTemporalGlobal;
  s.train_range = TimeRange::Parse("2009-06-01..2009-09-01");
  s.validation_range = TimeRange::Parse("2009-09-01..2009-10-01");
  s.test_range = TimeRange::Parse("2009-10-01..2009-11-01");
  InteractionLog known = log;
  // User 2 trains on items 1 and 2 and is evaluated on item 0.
  known.users.push_back({"u2", 40, AgeGroup::kNma});
  for (auto [item, t] : {std::pair<ItemIndex, std::int64_t>{1, aug}, {2, aug}, {0, sep}, {0, oct}}) {
    Interaction e;
    e.user = 2;
    e.item = item;
    e.timestamp = t;
    e.age = 40;
    known.events.push_back(e);
  }
  const SplitBundle b = Split(known, s);
  ASSERT_EQ(b.validation.size(), 2u);
  for (const auto& e : b.validation) EXPECT_EQ(*e.timestamp, sep);
  EXPECT_FALSE(b.surviving_users[1]);
  EXPECT_TRUE(b.surviving_users[0]);
}

TEST(ChildSetTest, OnlyChildTrainEvents) {
  std::vector<Pair> pairs;
  for (UserIndex u = 0; u < 2; ++u) {
    for (ItemIndex i = 0; i < 10; ++i) pairs.emplace_back(u, i);
  }
  const InteractionLog log = MakeLog(1, {14, 30}, std::vector<std::vector<std::size_t>>(10, {0}),
                                     pairs);
  const SplitBundle b = Split(log, SplitStrategy{});
  ASSERT_TRUE(b.surviving_users[0]);
  SplitBundle with_child = b;
  with_child.child_train = DeriveChildSet(b);
  EXPECT_FALSE(with_child.child_train.empty());
  for (const auto& e : with_child.child_train) EXPECT_EQ(e.user, 0u);
  std::size_t child_train = 0;
  for (const auto& e : b.train) child_train += e.user == 0;
  EXPECT_EQ(with_child.child_train.size(), child_train);

  const InteractionLog adults = MakeLog(1, {30, 40}, std::vector<std::vector<std::size_t>>(10, {0}),
                                        pairs);
  EXPECT_THROW(DeriveChildSet(Split(adults, SplitStrategy{})), DataError);
}

TEST(TimeRangeTest, ParseAndFormat) {
  const TimeRange r = TimeRange::Parse("2009-06-01..2009-09-01");
  EXPECT_EQ(r.ToString(), "2009-06-01..2009-09-01");
  EXPECT_TRUE(r.Contains(ParseDate("2009-06-01")));
  EXPECT_FALSE(r.Contains(ParseDate("2009-09-01")));
  EXPECT_EQ(FormatDate(0), "1970-01-01");
  EXPECT_THROW(TimeRange::Parse("2009-09-01..2009-06-01"), ConfigError);
}

TEST(BundleTest, WriteReadRoundTrip) {
  std::mt19937_64 rng(9);
  const auto pairs = testing::RandomPairs(30, 20, 0.4, rng);
  std::vector<int> ages;
  for (int u = 0; u < 30; ++u) ages.push_back(13 + u);
  const InteractionLog log = MakeLog(1, ages, std::vector<std::vector<std::size_t>>(20, {0}), pairs);
  PreprocessOptions options;
  const SplitBundle b = Preprocess(log, options);
  const auto dir = testing::TempDir("bundle");
  WriteBundle(dir, b, log, options, "h");
  const SplitBundle back = ReadBundle(dir, log);
  EXPECT_EQ(Pairs(back.train), Pairs(b.train));
  EXPECT_EQ(Pairs(back.validation), Pairs(b.validation));
  EXPECT_EQ(Pairs(back.test), Pairs(b.test));
  EXPECT_EQ(Pairs(back.child_train), Pairs(b.child_train));
  EXPECT_EQ(back.surviving_users, b.surviving_users);
}

}  // namespace
}  // namespace agerec
