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

// Seeded synthetic logs with known group genre preferences and popularity
// skew.

#ifndef AGEREC_SYNTH_H_
#define AGEREC_SYNTH_H_

#include <array>
#include <cstdint>
#include <vector>

#include "agerec/ingest.h"

namespace agerec {

struct SynthSpec {
  std::array<std::size_t, 3> users_per_group = {100, 100, 100};
  std::size_t n_items = 200;
  std::size_t n_genres = 5;
  // One non-negative preference vector of n_genres entries per group
  // (Children, Mainstream, NMA); normalized on use. Empty means uniform.
  std::array<std::vector<double>, 3> group_preferences;
  // Dirichlet concentration around the group vector; larger is tighter.
  double concentration = 100.0;
  // Item base popularity is proportional to rank^-zipf_s.
  double zipf_s = 1.0;
  // Distinct items per user, drawn uniformly from [events_min, events_max].
  std::size_t events_min = 10;
  std::size_t events_max = 30;
  // Each consumed item is repeated 1 + Geometric(1 - repeat_p) times.
  double repeat_p = 0.0;
  std::uint64_t seed = 0;
  AgeGrouping grouping;

  // Throws ConfigError for out-of-range parameters and DataError when a
  // group cannot supply events_max distinct items.
  void Validate() const;
};

// Items get genre (index mod n_genres) and popularity rank index + 1. Each
// user draws a genre mixture from Dirichlet(concentration * preference) and
// samples distinct items with weight popularity * mixture[genre] without
// replacement. Ages are uniform within the group's range.
InteractionLog Generate(const SynthSpec& spec);

}  // namespace agerec

#endif  // AGEREC_SYNTH_H_
