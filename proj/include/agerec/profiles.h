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

// Genre profiles of users and age buckets, the deviation measures built on
// them, and per-user popularity statistics.

#ifndef AGEREC_PROFILES_H_
#define AGEREC_PROFILES_H_

#include <array>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <tuple>
#include <vector>

#include "agerec/domain.h"
#include "agerec/ingest.h"

namespace agerec {

// Weighted mean genre vector of one user's consumption, optionally
// restricted to one calendar year.
struct UserGenreProfile {
  UserIndex user = 0;
  std::optional<int> period;
  int age = 0;  // age during `period`, or the reported age
  AgeGroup group = AgeGroup::kMainstream;
  GenreDistribution distribution;
  std::size_t event_count = 0;
  std::uint64_t total_weight = 0;
};

// Unweighted mean of member UGPs.
struct AgeGenreProfile {
  std::string bucket;
  GenreDistribution distribution;
  std::size_t member_count = 0;
};

struct PopularityProfile {
  UserIndex user = 0;
  AgeGroup group = AgeGroup::kMainstream;
  std::uint64_t n_interactions = 0;
  std::size_t profile_size = 0;
  double profile_popularity = 0.0;
  double profile_age_popularity = 0.0;
};

// nullopt when the user has no events (in `period`, if given).
std::optional<UserGenreProfile> BuildUgp(const InteractionLog& log,
                                         UserIndex user,
                                         std::optional<int> period = {});

// One profile per user, or per (user, year) when `yearly` is set; yearly
// profiles require a timestamped log. Ordered by user, then year.
std::vector<UserGenreProfile> BuildAllUgps(const InteractionLog& log,
                                           bool yearly);

// Per-user genre profile over an arbitrary event subset; entry u is empty
// when user u has no events in `events`.
std::vector<std::optional<GenreDistribution>> UgpsFromEvents(
    std::span<const Interaction> events, const std::vector<ItemRecord>& items,
    std::size_t num_users, std::size_t num_genres);

// nullopt for an empty bucket.
std::optional<AgeGenreProfile> BuildAgp(
    std::span<const UserGenreProfile> members, const std::string& bucket);

// Mean JSD between the AGP and each member. Throws ValidationError when the
// members are not the AGP's constituents.
double Igd(const AgeGenreProfile& agp,
           std::span<const UserGenreProfile> members,
           LogBase base = LogBase::kTwo);

double Apd(const AgeGenreProfile& a, const AgeGenreProfile& b,
           LogBase base = LogBase::kTwo);

// Distinct-user count of every item normalized by the largest count.
std::vector<double> ItemPopularity(std::span<const Interaction> events,
                                   std::size_t num_items);

// Profile statistics for every user with events. Age-popularity uses the
// user's coarse group as the peer set.
std::vector<PopularityProfile> PopularityProfiles(const InteractionLog& log);

// Everything the preference-deviation exploration reports.
struct ExplorationResult {
  std::vector<UserGenreProfile> ugps;
  std::vector<AgeGenreProfile> group_agps;  // Children, Mainstream, NMA order
  std::vector<AgeGenreProfile> age_agps;    // ascending age
  std::vector<std::pair<std::string, double>> igd;
  std::vector<std::tuple<std::string, std::string, double>> apd;
  std::vector<PopularityProfile> popularity;
};

ExplorationResult Explore(const InteractionLog& log, LogBase base);

// Mean of each popularity metric per group; rows (group, metric, mean).
std::vector<std::tuple<AgeGroup, std::string, double>> PopularityGroupMeans(
    std::span<const PopularityProfile> profiles);

std::string AgeBucketName(int age);

void WriteAgpTable(const std::filesystem::path& path,
                   const ExplorationResult& result,
                   const GenreVocabulary& vocabulary,
                   const std::string& manifest_hash);
void WriteDeviationTable(const std::filesystem::path& path,
                         const ExplorationResult& result, LogBase base,
                         const std::string& manifest_hash);
void WritePopularityTable(const std::filesystem::path& path,
                          const ExplorationResult& result,
                          const std::string& manifest_hash);

}  // namespace agerec

#endif  // AGEREC_PROFILES_H_
