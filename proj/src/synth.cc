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

#include "agerec/synth.h"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <random>

#include "agerec/common.h"

namespace agerec {
namespace {

std::vector<double> Preference(const SynthSpec& spec, int group) {
  const auto& raw = spec.group_preferences[group];
  std::vector<double> pref = raw.empty() ? std::vector<double>(spec.n_genres, 1.0) : raw;
  const double total = std::accumulate(pref.begin(), pref.end(), 0.0);
  for (double& p : pref) p /= total;
  return pref;
}

std::pair<int, int> AgeRange(AgeGroup group, const AgeGrouping& grouping) {
  switch (group) {
    case AgeGroup::kChild:
      return {kMinAge, grouping.child_max};
    case AgeGroup::kMainstream:
      return {grouping.child_max + 1, grouping.mainstream_max};
    case AgeGroup::kNma:
      return {grouping.mainstream_max + 1, kMaxAge};
  }
  return {kMinAge, kMaxAge};
}

std::string PaddedId(char prefix, std::size_t index, std::size_t total) {
  const int width = static_cast<int>(std::to_string(total).size());
  char buf[32];
  std::snprintf(buf, sizeof buf, "%c%0*zu", prefix, width, index + 1);
  return buf;
}

}  // namespace

void SynthSpec::Validate() const {
  grouping.Validate();
  for (std::size_t n : users_per_group) {
    if (n < 1) throw ConfigError("synth needs at least one user per group");
  }
  if (n_items < 1 || n_genres < 1) throw ConfigError("synth needs items and genres");
  if (!(concentration > 0.0)) throw ConfigError("synth concentration must be > 0");
  if (!(zipf_s >= 0.0)) throw ConfigError("synth zipf exponent must be >= 0");
  if (events_min < 1 || events_max < events_min) {
    throw ConfigError("synth events range must satisfy 1 <= min <= max");
  }
  if (!(repeat_p >= 0.0 && repeat_p < 1.0)) {
    throw ConfigError("synth repeat probability must be in [0, 1)");
  }
  for (int g = 0; g < 3; ++g) {
    const auto& pref = group_preferences[g];
    if (pref.empty()) continue;
    if (pref.size() != n_genres) {
      throw ConfigError("synth preference vector has the wrong dimension");
    }
    double total = 0.0;
    for (double p : pref) {
      if (!(p >= 0.0)) throw ConfigError("synth preferences must be non-negative");
      total += p;
    }
    if (!(total > 0.0)) throw ConfigError("synth preference vector sums to zero");
  }
  for (int g = 0; g < 3; ++g) {
    const auto pref = Preference(*this, g);
    std::size_t reachable = 0;
    for (std::size_t i = 0; i < n_items; ++i) reachable += pref[i % n_genres] > 0.0;
    if (reachable < events_max) {
      throw DataError("synth group " + std::string(GroupName(kAllGroups[g])) +
                      " can reach " + std::to_string(reachable) +
                      " items but users need up to " + std::to_string(events_max));
    }
  }
}

InteractionLog Generate(const SynthSpec& spec) {
  spec.Validate();
  std::vector<std::string> genre_names;
  for (std::size_t g = 0; g < spec.n_genres; ++g) {
    genre_names.push_back(PaddedId('g', g, spec.n_genres));
  }
  InteractionLog log;
  log.vocabulary = GenreVocabulary(genre_names);
  log.grouping = spec.grouping;
  log.format = LogFormat::kImplicitTable;

  std::vector<double> popularity(spec.n_items);
  for (std::size_t i = 0; i < spec.n_items; ++i) {
    const std::size_t genre = i % spec.n_genres;
    ItemRecord item;
    item.item_id = PaddedId('i', i, spec.n_items);
    item.genre_indices = {genre};
    item.genres = GenreDistribution::EqualWeights(item.genre_indices, spec.n_genres);
    log.items.push_back(std::move(item));
    popularity[i] = std::pow(static_cast<double>(i + 1), -spec.zipf_s);
  }

  std::vector<AgeGroup> user_group;
  for (AgeGroup g : kAllGroups) {
    for (std::size_t k = 0; k < spec.users_per_group[static_cast<int>(g)]; ++k) {
      user_group.push_back(g);
    }
  }
  const std::size_t n_users = user_group.size();
  log.users.resize(n_users);
  std::vector<std::vector<Interaction>> per_user(n_users);
  const std::array<std::vector<double>, 3> prefs = {Preference(spec, 0), Preference(spec, 1),
                                                    Preference(spec, 2)};

  ParallelFor(n_users, [&](std::size_t u) {
    std::mt19937_64 rng = SeededRng(spec.seed, u + 1);
    const AgeGroup group = user_group[u];
    const auto [lo, hi] = AgeRange(group, spec.grouping);
    UserRecord& user = log.users[u];
    user.user_id = PaddedId('u', u, n_users);
    user.age = std::uniform_int_distribution<int>(lo, hi)(rng);
    user.group = group;

    const auto& pref = prefs[static_cast<int>(group)];
    std::vector<double> theta(spec.n_genres, 0.0);
    double total = 0.0;
    for (std::size_t g = 0; g < spec.n_genres; ++g) {
      if (pref[g] <= 0.0) continue;
      theta[g] = std::gamma_distribution<double>(spec.concentration * pref[g], 1.0)(rng);
      total += theta[g];
    }
    if (total > 0.0) {
      for (double& t : theta) t /= total;
    } else {
      theta = pref;  // every gamma draw underflowed
    }

    const std::size_t count =
        std::uniform_int_distribution<std::size_t>(spec.events_min, spec.events_max)(rng);
    // Weighted sampling without replacement: largest log(u) / w keys.
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    std::vector<std::pair<double, ItemIndex>> keys;
    keys.reserve(spec.n_items);
    for (std::size_t i = 0; i < spec.n_items; ++i) {
      const double draw = unit(rng);
      const double w = popularity[i] * theta[i % spec.n_genres];
      if (w <= 0.0) continue;
      keys.emplace_back(std::log(std::max(draw, 1e-300)) / w, static_cast<ItemIndex>(i));
    }
    if (keys.size() < count) {
      // Only reachable when theta concentrated on fewer genres than pref.
      for (std::size_t i = 0; i < spec.n_items && keys.size() < count; ++i) {
        if (pref[i % spec.n_genres] > 0.0 && theta[i % spec.n_genres] <= 0.0) {
          keys.emplace_back(-1e300, static_cast<ItemIndex>(i));
        }
      }
    }
    std::partial_sort(keys.begin(), keys.begin() + static_cast<std::ptrdiff_t>(count),
                      keys.end(), [](const auto& a, const auto& b) {
                        return a.first != b.first ? a.first > b.first : a.second < b.second;
                      });
    std::vector<ItemIndex> chosen;
    for (std::size_t k = 0; k < count; ++k) chosen.push_back(keys[k].second);
    std::sort(chosen.begin(), chosen.end());
    std::geometric_distribution<std::uint32_t> repeats(1.0 - spec.repeat_p);
    for (ItemIndex i : chosen) {
      Interaction e;
      e.user = static_cast<UserIndex>(u);
      e.item = i;
      e.weight = 1 + (spec.repeat_p > 0.0 ? repeats(rng) : 0);
      e.age = user.age;
      per_user[u].push_back(e);
    }
  });
  for (auto& events : per_user) {
    log.events.insert(log.events.end(), events.begin(), events.end());
  }
  return Compact(std::move(log));
}

}  // namespace agerec
