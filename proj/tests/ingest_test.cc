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


#include "agerec/ingest.h"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <random>
#include <tuple>

#include <gtest/gtest.h>

#include "agerec/common.h"
#include "agerec/io.h"
#include "test_util.h"

namespace agerec {
namespace {

using testing::MakeLog;
using testing::TempDir;
using testing::WriteText;

struct RawFiles {
  std::filesystem::path events, users, genres;
  GenreVocabulary vocabulary{{"Action", "Drama", "Comedy"}};
};

RawFiles WriteRaw(const std::string& name, const std::string& events) {
  const auto dir = TempDir(name);
  RawFiles f{dir / "events.tsv", dir / "users.tsv", dir / "genres.tsv"};
  WriteText(f.users, "u1\t15\nu2\t30\nu3\t55\n");
  WriteText(f.genres, "m1\tAction|Drama\nm2\tComedy\nm3\tAction\n");
  WriteText(f.events, events);
  return f;
}

TEST(LoadLogTest, DropsUnannotatedItem) {
  auto f = WriteRaw("unannotated", "u1\tm1\t5\nu2\tm2\t3\nu3\tm9\t4\n");
  const InteractionLog log = LoadLog(f.events, f.users, f.genres, f.vocabulary, {});
  EXPECT_EQ(log.events.size(), 2u);
  EXPECT_EQ(log.drops.Get("unannotated_item"), 1u);
  EXPECT_EQ(log.drops.counts.count("unknown_user"), 0u);
}

TEST(LoadLogTest, ItemGenresAndGroups) {
  auto f = WriteRaw("genres", "u1\tm1\t5\nu2\tm2\t3\nu3\tm3\t4\n");
  const InteractionLog log = LoadLog(f.events, f.users, f.genres, f.vocabulary, {});
  ASSERT_EQ(log.items.size(), 3u);
  EXPECT_EQ(log.items[0].genres.weights(), (std::vector<double>{0.5, 0.5, 0.0}));
  EXPECT_EQ(log.users[0].group, AgeGroup::kChild);
  EXPECT_EQ(log.users[1].group, AgeGroup::kMainstream);
  EXPECT_EQ(log.users[2].group, AgeGroup::kNma);
  EXPECT_TRUE(log.HasRatings());
}

TEST(LoadLogTest, AgeRecodeAndRange) {
  const auto dir = TempDir("recode");
  WriteText(dir / "users.tsv", "u1\t1\nu2\t8\nu3\t25\n");
  WriteText(dir / "genres.tsv", "m1\tAction\n");
  WriteText(dir / "events.tsv", "u1\tm1\t5\nu2\tm1\t5\nu3\tm1\t5\n");
  LoadOptions options;
  options.age_recode = {{1, 17}};
  const InteractionLog log = LoadLog(dir / "events.tsv", dir / "users.tsv",
                                     dir / "genres.tsv", GenreVocabulary({"Action"}), options);
  ASSERT_EQ(log.users.size(), 2u);
  EXPECT_EQ(log.users[0].age, 17);
  EXPECT_EQ(log.users[0].group, AgeGroup::kChild);
  EXPECT_EQ(log.drops.Get("age_out_of_range"), 1u);
  EXPECT_EQ(log.drops.Get("unknown_user"), 1u);
}

TEST(LoadLogTest, StrictModeRejectsMalformedRows) {
  auto f = WriteRaw("strict", "u1\tm1\t5\nu2\tm2\n");
  const InteractionLog lenient = LoadLog(f.events, f.users, f.genres, f.vocabulary, {});
  EXPECT_EQ(lenient.drops.Get("malformed_row"), 1u);
  LoadOptions strict;
  strict.strict = true;
  EXPECT_THROW(LoadLog(f.events, f.users, f.genres, f.vocabulary, strict), DataError);
}

TEST(LoadLogTest, ListeningEventAgeAttribution) {
  const auto dir = TempDir("listening");
  WriteText(dir / "users.tsv", "u1\t20\n");
  WriteText(dir / "genres.tsv", "t1\tAction\n");
  // 2009-06-15 and 2013-06-15.
  WriteText(dir / "events.tsv", "u1\tt1\t3\t1245024000\nu1\tt1\t1\t1371254400\n");
  LoadOptions options;
  options.format = LogFormat::kListeningEvents;
  options.grouping.reference_year = 2014;
  const InteractionLog log = LoadLog(dir / "events.tsv", dir / "users.tsv", dir / "genres.tsv",
                                     GenreVocabulary({"Action"}), options);
  ASSERT_EQ(log.events.size(), 2u);
  EXPECT_EQ(log.events[0].age, 15);
  EXPECT_EQ(log.events[0].weight, 3u);
  EXPECT_EQ(log.events[1].age, 19);
  EXPECT_EQ(log.users[0].group, AgeGroup::kChild);
  EXPECT_TRUE(log.HasPerEventAges());

  options.grouping.reference_year.reset();
  EXPECT_THROW(LoadLog(dir / "events.tsv", dir / "users.tsv", dir / "genres.tsv",
                       GenreVocabulary({"Action"}), options),
               ConfigError);
}

TEST(CanonicalTest, RoundTrip) {
  auto f = WriteRaw("roundtrip_raw", "u1\tm1\t5\nu2\tm2\t3\nu3\tm3\t4\nu1\tm2\t2\n");
  const InteractionLog log = LoadLog(f.events, f.users, f.genres, f.vocabulary, {});
  const auto dir = TempDir("roundtrip");
  WriteCanonical(log, dir, "abc123");
  const InteractionLog back = LoadCanonical(dir, log.format, log.grouping);
  EXPECT_EQ(back.vocabulary, log.vocabulary);
  ASSERT_EQ(back.users.size(), log.users.size());
  for (std::size_t u = 0; u < log.users.size(); ++u) {
    EXPECT_EQ(back.users[u].user_id, log.users[u].user_id);
    EXPECT_EQ(back.users[u].age, log.users[u].age);
  }
  ASSERT_EQ(back.items.size(), log.items.size());
  for (std::size_t i = 0; i < log.items.size(); ++i) {
    EXPECT_EQ(back.items[i].item_id, log.items[i].item_id);
    EXPECT_EQ(back.items[i].genre_indices, log.items[i].genre_indices);
  }
  auto key = [](const Interaction& e) {
    return std::make_tuple(e.user, e.item, e.weight, e.rating, e.timestamp, e.age);
  };
  std::vector<decltype(key(log.events[0]))> a, b;
  for (const auto& e : log.events) a.push_back(key(e));
  for (const auto& e : back.events) b.push_back(key(e));
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  EXPECT_EQ(a, b);
  EXPECT_NE(ReadFile(dir / "events.tsv").find("# manifest_hash=abc123"), std::string::npos);
}

TEST(SummaryTest, SharesSumToHundred) {
  std::mt19937_64 rng(3);
  std::vector<int> ages;
  std::uniform_int_distribution<int> age(12, 65);
  for (int u = 0; u < 37; ++u) ages.push_back(age(rng));
  auto pairs = testing::RandomPairs(37, 11, 0.3, rng);
  for (std::size_t u = 0; u < 37; ++u) pairs.emplace_back(static_cast<UserIndex>(u), 0);
  const InteractionLog log = MakeLog(2, ages, std::vector<std::vector<std::size_t>>(11, {0}),
                                     pairs);
  const LogSummary s = Summarize(log);
  EXPECT_EQ(s.users, 37u);
  EXPECT_NEAR(s.user_share_pct[0] + s.user_share_pct[1] + s.user_share_pct[2], 100.0, 0.01);
  EXPECT_NEAR(s.event_share_pct[0] + s.event_share_pct[1] + s.event_share_pct[2], 100.0, 0.01);
}

InteractionLog ActivityLog(const std::vector<int>& counts) {
  std::vector<std::pair<UserIndex, ItemIndex>> events;
  for (std::size_t u = 0; u < counts.size(); ++u) {
    for (int k = 0; k < counts[u]; ++k) events.emplace_back(static_cast<UserIndex>(u), 0);
  }
  return MakeLog(1, std::vector<int>(counts.size(), 30), {{0}}, events);
}

TEST(SampleTest, ActivityCap) {
  // Four users cannot exceed mean + sqrt(3) * stddev, so 500 survives.
  EXPECT_TRUE(ActivityOutliers(ActivityLog({10, 12, 11, 500}), 2.0).empty());
  std::vector<int> counts(20, 10);
  counts.push_back(5000);
  const auto out = ActivityOutliers(ActivityLog(counts), 2.0);
  ASSERT_EQ(out.size(), 1u);
  EXPECT_EQ(out[0], 20u);
}

TEST(SampleTest, IdentityAndDeterminism) {
  std::mt19937_64 rng(11);
  std::vector<int> ages;
  for (int u = 0; u < 40; ++u) ages.push_back(14 + u);
  auto pairs = testing::RandomPairs(40, 6, 0.5, rng);
  for (std::size_t u = 0; u < 40; ++u) pairs.emplace_back(static_cast<UserIndex>(u), 1);
  const InteractionLog log = MakeLog(1, ages, std::vector<std::vector<std::size_t>>(6, {0}),
                                     pairs);
  SampleOptions all{40, 5};
  EXPECT_EQ(SampleUsers(log, all).users.size(), 40u);

  SampleOptions some{15, 9};
  auto ids = [](const InteractionLog& l) {
    std::vector<std::string> v;
    for (const auto& u : l.users) v.push_back(u.user_id);
    return v;
  };
  const auto first = ids(SampleUsers(log, some));
  EXPECT_EQ(first.size(), 15u);
  EXPECT_EQ(first, ids(SampleUsers(log, some)));
  some.seed = 10;
  EXPECT_NE(first, ids(SampleUsers(log, some)));
  EXPECT_THROW(SampleUsers(log, SampleOptions{41, 1}), DataError);
}

TEST(SampleTest, StratifiedQuotasAreProportional) {
  std::mt19937_64 rng(5);
  std::uniform_int_distribution<std::size_t> size(1, 60);
  for (int trial = 0; trial < 200; ++trial) {
    std::map<int, std::size_t> population;
    std::size_t total = 0;
    for (int age = 12; age < 12 + 1 + trial % 20; ++age) {
      population[age] = size(rng);
      total += population[age];
    }
    const std::size_t n = 1 + rng() % total;
    const auto quotas = StratifiedQuotas(population, population, n);
    std::size_t sum = 0;
    for (const auto& [age, q] : quotas) {
      const double share = static_cast<double>(n) * population[age] / total;
      EXPECT_LE(std::abs(static_cast<double>(q) - share), 1.0) << age;
      sum += q;
    }
    EXPECT_EQ(sum, n);
  }
}

TEST(CompactTest, RenumbersSurvivors) {
  InteractionLog log = MakeLog(1, {20, 30, 40}, {{0}, {0}, {0}}, {{0, 2}, {2, 2}});
  const InteractionLog c = Compact(log);
  ASSERT_EQ(c.users.size(), 2u);
  ASSERT_EQ(c.items.size(), 1u);
  EXPECT_EQ(c.users[1].user_id, "u2");
  EXPECT_EQ(c.items[0].item_id, "i2");
  EXPECT_EQ(c.events[1].user, 1u);
  EXPECT_EQ(c.events[1].item, 0u);
}

}  // namespace
}  // namespace agerec
