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
#include <cmath>
#include <map>
#include <unordered_set>

#include "agerec/io.h"

namespace agerec {
namespace {

struct Accumulator {
  std::vector<double> mass;
  std::size_t events = 0;
  std::uint64_t weight = 0;
  int age = 0;
};

void AddEvent(Accumulator& acc, const Interaction& e, const ItemRecord& item) {
  if (acc.mass.empty()) acc.mass.assign(item.genres.size(), 0.0);
  for (std::size_t g : item.genre_indices) acc.mass[g] += e.weight * item.genres[g];
  ++acc.events;
  acc.weight += e.weight;
  acc.age = e.age;
}

GenreDistribution Normalize(const Accumulator& acc) {
  std::vector<double> w = acc.mass;
  for (double& x : w) x /= static_cast<double>(acc.weight);
  return GenreDistribution(std::move(w));
}

std::vector<double> MeanOf(std::span<const UserGenreProfile> members) {
  std::vector<double> mean(members.front().distribution.size(), 0.0);
  for (const auto& m : members) {
    for (std::size_t g = 0; g < mean.size(); ++g) mean[g] += m.distribution[g];
  }
  for (double& x : mean) x /= static_cast<double>(members.size());
  return mean;
}

}  // namespace

std::optional<UserGenreProfile> BuildUgp(const InteractionLog& log,
                                         UserIndex user,
                                         std::optional<int> period) {
  if (period && !log.HasTimestamps()) {
    throw ConfigError("yearly profiles need a timestamped log");
  }
  Accumulator acc;
  for (const auto& e : log.events) {
    if (e.user != user) continue;
    if (period && YearOf(*e.timestamp) != *period) continue;
    AddEvent(acc, e, log.items[e.item]);
  }
  if (acc.weight == 0) return std::nullopt;
  UserGenreProfile ugp;
  ugp.user = user;
  ugp.period = period;
  ugp.age = period ? acc.age : log.users[user].age;
  ugp.group = period ? AssignGroup(acc.age, log.grouping) : log.users[user].group;
  ugp.distribution = Normalize(acc);
  ugp.event_count = acc.events;
  ugp.total_weight = acc.weight;
  return ugp;
}

std::vector<UserGenreProfile> BuildAllUgps(const InteractionLog& log,
                                           bool yearly) {
  if (yearly && !log.HasTimestamps()) {
    throw ConfigError("yearly profiles need a timestamped log");
  }
  std::map<std::pair<UserIndex, int>, Accumulator> accs;
  for (const auto& e : log.events) {
    const int period = yearly ? YearOf(*e.timestamp) : 0;
    AddEvent(accs[{e.user, period}], e, log.items[e.item]);
  }
  std::vector<UserGenreProfile> out;
  out.reserve(accs.size());
  for (const auto& [key, acc] : accs) {
    UserGenreProfile ugp;
    ugp.user = key.first;
    if (yearly) {
      ugp.period = key.second;
      ugp.age = acc.age;
      ugp.group = AssignGroup(acc.age, log.grouping);
    } else {
      ugp.age = log.users[key.first].age;
      ugp.group = log.users[key.first].group;
    }
    ugp.distribution = Normalize(acc);
    ugp.event_count = acc.events;
    ugp.total_weight = acc.weight;
    out.push_back(std::move(ugp));
  }
  return out;
}

std::vector<std::optional<GenreDistribution>> UgpsFromEvents(
    std::span<const Interaction> events, const std::vector<ItemRecord>& items,
    std::size_t num_users, std::size_t num_genres) {
  std::vector<Accumulator> accs(num_users);
  for (const auto& e : events) AddEvent(accs[e.user], e, items[e.item]);
  std::vector<std::optional<GenreDistribution>> out(num_users);
  for (std::size_t u = 0; u < num_users; ++u) {
    if (accs[u].weight > 0) {
      out[u] = Normalize(accs[u]);
      if (out[u]->size() != num_genres) throw ConfigError("genre dimension mismatch");
    }
  }
  return out;
}

std::optional<AgeGenreProfile> BuildAgp(
    std::span<const UserGenreProfile> members, const std::string& bucket) {
  if (members.empty()) return std::nullopt;
  AgeGenreProfile agp;
  agp.bucket = bucket;
  agp.distribution = GenreDistribution(MeanOf(members));
  agp.member_count = members.size();
  return agp;
}

double Igd(const AgeGenreProfile& agp,
           std::span<const UserGenreProfile> members, LogBase base) {
  if (members.size() != agp.member_count || members.empty()) {
    throw ValidationError("IGD members do not match AGP member count");
  }
  const auto mean = MeanOf(members);
  if (mean.size() != agp.distribution.size()) {
    throw ConfigError("IGD dimension mismatch");
  }
  for (std::size_t g = 0; g < mean.size(); ++g) {
    if (std::abs(mean[g] - agp.distribution[g]) > 1e-9) {
      throw ValidationError("IGD members are not the AGP's constituents");
    }
  }
  double total = 0.0;
  for (const auto& m : members) total += Jsd(agp.distribution, m.distribution, base);
  return total / static_cast<double>(members.size());
}

double Apd(const AgeGenreProfile& a, const AgeGenreProfile& b, LogBase base) {
  return Jsd(a.distribution, b.distribution, base);
}

std::vector<double> ItemPopularity(std::span<const Interaction> events,
                                   std::size_t num_items) {
  std::unordered_set<std::uint64_t> pairs;
  pairs.reserve(events.size());
  std::vector<double> count(num_items, 0.0);
  for (const auto& e : events) {
    const std::uint64_t key = (static_cast<std::uint64_t>(e.user) << 32) | e.item;
    if (pairs.insert(key).second) count[e.item] += 1.0;
  }
  const double max = count.empty() ? 0.0 : *std::max_element(count.begin(), count.end());
  if (max > 0.0) {
    for (double& c : count) c /= max;
  }
  return count;
}

std::vector<PopularityProfile> PopularityProfiles(const InteractionLog& log) {
  if (log.events.empty()) throw DataError("popularity profiles of an empty log");
  const std::size_t num_items = log.items.size();
  const std::vector<double> popularity = ItemPopularity(log.events, num_items);

  std::array<std::vector<Interaction>, 3> by_group;
  for (const auto& e : log.events) {
    by_group[static_cast<int>(log.users[e.user].group)].push_back(e);
  }
  std::array<std::vector<double>, 3> age_popularity;
  for (int g = 0; g < 3; ++g) age_popularity[g] = ItemPopularity(by_group[g], num_items);

  std::vector<std::vector<ItemIndex>> profile(log.users.size());
  std::vector<std::uint64_t> weight(log.users.size(), 0);
  for (const auto& e : log.events) {
    profile[e.user].push_back(e.item);
    weight[e.user] += e.weight;
  }
  std::vector<PopularityProfile> out;
  for (std::size_t u = 0; u < log.users.size(); ++u) {
    auto& items = profile[u];
    if (items.empty()) continue;
    std::sort(items.begin(), items.end());
    items.erase(std::unique(items.begin(), items.end()), items.end());
    const int g = static_cast<int>(log.users[u].group);
    PopularityProfile p;
    p.user = static_cast<UserIndex>(u);
    p.group = log.users[u].group;
    p.n_interactions = weight[u];
    p.profile_size = items.size();
    for (ItemIndex i : items) {
      p.profile_popularity += popularity[i];
      p.profile_age_popularity += age_popularity[g][i];
    }
    p.profile_popularity /= static_cast<double>(items.size());
    p.profile_age_popularity /= static_cast<double>(items.size());
    out.push_back(p);
  }
  return out;
}

std::string AgeBucketName(int age) { return "age:" + std::to_string(age); }

ExplorationResult Explore(const InteractionLog& log, LogBase base) {
  ExplorationResult result;
  result.ugps = BuildAllUgps(log, log.HasPerEventAges());

  std::map<int, std::vector<UserGenreProfile>> by_age;
  std::array<std::vector<UserGenreProfile>, 3> by_group;
  for (const auto& ugp : result.ugps) {
    by_age[ugp.age].push_back(ugp);
    by_group[static_cast<int>(ugp.group)].push_back(ugp);
  }
  auto add_bucket = [&](const std::string& name,
                        const std::vector<UserGenreProfile>& members,
                        std::vector<AgeGenreProfile>& into) {
    auto agp = BuildAgp(members, name);
    if (!agp) return;
    result.igd.emplace_back(name, Igd(*agp, members, base));
    into.push_back(std::move(*agp));
  };
  for (AgeGroup g : kAllGroups) {
    add_bucket(std::string(GroupName(g)), by_group[static_cast<int>(g)],
               result.group_agps);
  }
  for (const auto& [age, members] : by_age) {
    add_bucket(AgeBucketName(age), members, result.age_agps);
  }
  auto pairs = [&](const std::vector<AgeGenreProfile>& agps) {
    for (std::size_t a = 0; a < agps.size(); ++a) {
      for (std::size_t b = a + 1; b < agps.size(); ++b) {
        result.apd.emplace_back(agps[a].bucket, agps[b].bucket,
                                Apd(agps[a], agps[b], base));
      }
    }
  };
  pairs(result.group_agps);
  pairs(result.age_agps);
  result.popularity = PopularityProfiles(log);
  return result;
}

std::vector<std::tuple<AgeGroup, std::string, double>> PopularityGroupMeans(
    std::span<const PopularityProfile> profiles) {
  std::vector<std::tuple<AgeGroup, std::string, double>> rows;
  for (AgeGroup g : kAllGroups) {
    std::array<double, 4> sums{};
    std::size_t n = 0;
    for (const auto& p : profiles) {
      if (p.group != g) continue;
      ++n;
      sums[0] += static_cast<double>(p.n_interactions);
      sums[1] += static_cast<double>(p.profile_size);
      sums[2] += p.profile_popularity;
      sums[3] += p.profile_age_popularity;
    }
    if (n == 0) continue;
    const char* names[] = {"n_interactions", "profile_size", "profile_popularity",
                           "profile_age_popularity"};
    for (int k = 0; k < 4; ++k) rows.emplace_back(g, names[k], sums[k] / n);
  }
  return rows;
}

void WriteAgpTable(const std::filesystem::path& path,
                   const ExplorationResult& result,
                   const GenreVocabulary& vocabulary,
                   const std::string& manifest_hash) {
  TextTable table;
  table.metadata = {{"manifest_hash", manifest_hash}, {"table", "agp"}};
  table.columns = {"bucket", "members", "genre", "mean_share"};
  auto emit = [&](const std::vector<AgeGenreProfile>& agps) {
    for (const auto& agp : agps) {
      for (std::size_t g = 0; g < vocabulary.size(); ++g) {
        table.rows.push_back({agp.bucket, std::to_string(agp.member_count),
                              vocabulary.name(g), FormatFixed(agp.distribution[g])});
      }
    }
  };
  emit(result.group_agps);
  emit(result.age_agps);
  WriteTable(path, table);
}

void WriteDeviationTable(const std::filesystem::path& path,
                         const ExplorationResult& result, LogBase base,
                         const std::string& manifest_hash) {
  TextTable table;
  table.metadata = {{"manifest_hash", manifest_hash},
                    {"table", "deviation"},
                    {"jsd_base", std::string(LogBaseName(base))}};
  table.columns = {"metric", "bucket_a", "bucket_b", "value"};
  for (const auto& [a, b, v] : result.apd) {
    table.rows.push_back({"APD", a, b, FormatFixed(v)});
  }
  for (const auto& [bucket, v] : result.igd) {
    table.rows.push_back({"IGD", bucket, "-", FormatFixed(v)});
  }
  WriteTable(path, table);
}

void WritePopularityTable(const std::filesystem::path& path,
                          const ExplorationResult& result,
                          const std::string& manifest_hash) {
  TextTable table;
  table.metadata = {{"manifest_hash", manifest_hash}, {"table", "popularity"}};
  table.columns = {"group", "metric", "mean"};
  for (const auto& [g, metric, mean] : PopularityGroupMeans(result.popularity)) {
    table.rows.push_back({std::string(GroupName(g)), metric, FormatFixed(mean)});
  }
  WriteTable(path, table);
}

}  // namespace agerec
