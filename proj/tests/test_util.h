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


// Small builders shared by the unit tests.

#ifndef AGEREC_TESTS_TEST_UTIL_H_
#define AGEREC_TESTS_TEST_UTIL_H_

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include "agerec/domain.h"
#include "agerec/ingest.h"

namespace agerec::testing {

inline std::filesystem::path TempDir(const std::string& name) {
  auto dir = std::filesystem::temp_directory_path() / ("agerec_test_" + name);
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

inline void WriteText(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  out << text;
}

// Log with `num_genres` genres g1..gN, one user per entry of `ages` and one
// item per entry of `item_genres` (each item gets equal weight over its
// listed genres). Events are (user, item) pairs with weight 1.
inline InteractionLog MakeLog(std::size_t num_genres, const std::vector<int>& ages,
                              const std::vector<std::vector<std::size_t>>& item_genres,
                              const std::vector<std::pair<UserIndex, ItemIndex>>& events,
                              const AgeGrouping& grouping = {}) {
  InteractionLog log;
  std::vector<std::string> names;
  for (std::size_t g = 0; g < num_genres; ++g) names.push_back("g" + std::to_string(g + 1));
  log.vocabulary = GenreVocabulary(names);
  log.grouping = grouping;
  log.format = LogFormat::kImplicitTable;
  for (std::size_t u = 0; u < ages.size(); ++u) {
    log.users.push_back({"u" + std::to_string(u), ages[u], AssignGroup(ages[u], grouping)});
  }
  for (std::size_t i = 0; i < item_genres.size(); ++i) {
    ItemRecord item;
    item.item_id = "i" + std::to_string(i);
    item.genre_indices = item_genres[i];
    item.genres = GenreDistribution::EqualWeights(item_genres[i], num_genres);
    log.items.push_back(std::move(item));
  }
  for (auto [u, i] : events) {
    Interaction e;
    e.user = u;
    e.item = i;
    e.age = ages[u];
    log.events.push_back(e);
  }
  return log;
}

// Random bipartite event list without duplicate pairs.
inline std::vector<std::pair<UserIndex, ItemIndex>> RandomPairs(std::size_t users,
                                                                std::size_t items,
                                                                double density,
                                                                std::mt19937_64& rng) {
  std::bernoulli_distribution keep(density);
  std::vector<std::pair<UserIndex, ItemIndex>> pairs;
  for (std::size_t u = 0; u < users; ++u) {
    for (std::size_t i = 0; i < items; ++i) {
      if (keep(rng)) pairs.emplace_back(static_cast<UserIndex>(u), static_cast<ItemIndex>(i));
    }
  }
  return pairs;
}

}  // namespace agerec::testing

#endif  // AGEREC_TESTS_TEST_UTIL_H_
