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

// Core value types shared by every stage: the genre vocabulary, genre
// distributions, age groups, catalog records and the Jensen-Shannon
// divergence used by all preference metrics.

#ifndef AGEREC_DOMAIN_H_
#define AGEREC_DOMAIN_H_

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "agerec/common.h"

namespace agerec {

inline constexpr int kMinAge = 12;
inline constexpr int kMaxAge = 65;
inline constexpr double kNormalizationTolerance = 1e-9;

// Ordered, duplicate-free list of genre labels. Index positions define the
// coordinates of every GenreDistribution in a run.
class GenreVocabulary {
 public:
  GenreVocabulary() = default;
  explicit GenreVocabulary(std::vector<std::string> names);

  std::size_t size() const { return names_.size(); }
  const std::vector<std::string>& names() const { return names_; }
  const std::string& name(std::size_t index) const { return names_.at(index); }

  // Index of `label`, or nullopt when the label is not in the vocabulary.
  std::optional<std::size_t> Find(std::string_view label) const;

  bool operator==(const GenreVocabulary& other) const {
    return names_ == other.names_;
  }

 private:
  std::vector<std::string> names_;
  std::unordered_map<std::string, std::size_t> index_;
};

// Probability vector over a GenreVocabulary.
class GenreDistribution {
 public:
  GenreDistribution() = default;
  explicit GenreDistribution(std::vector<double> weights);

  // Item genre vector: 1/k on each of the k annotated genres.
  static GenreDistribution EqualWeights(std::span<const std::size_t> genres,
                                        std::size_t dimension);

  std::size_t size() const { return weights_.size(); }
  const std::vector<double>& weights() const { return weights_; }
  double operator[](std::size_t i) const { return weights_[i]; }

  double Total() const;
  bool IsNormalized(double tolerance = kNormalizationTolerance) const;

  // Throws ValidationError unless all entries are >= 0 and sum to 1.
  void Validate() const;

 private:
  std::vector<double> weights_;
};

enum class AgeGroup : std::uint8_t { kChild = 0, kMainstream = 1, kNma = 2 };

inline constexpr std::array<AgeGroup, 3> kAllGroups = {
    AgeGroup::kChild, AgeGroup::kMainstream, AgeGroup::kNma};

std::string_view GroupName(AgeGroup group);
// Single-letter tag used in significance annotations (c, m, n).
char GroupLetter(AgeGroup group);
AgeGroup ParseGroup(std::string_view name);

// Dataset-specific mapping from age in years to a coarse group.
struct AgeGrouping {
  int child_max = 17;
  int mainstream_max = 49;
  // Calendar year in which every user is assumed to have turned the reported
  // age on January 1st; enables per-event ages for timestamped logs.
  std::optional<int> reference_year;

  void Validate() const;
};

// Throws FilteredInputError for ages outside [12, 65].
AgeGroup AssignGroup(int age, const AgeGrouping& grouping);

// Age in `event_year` of a user who reported `reported_age` in
// grouping.reference_year. Returns reported_age when no reference year is set.
int AgeAtYear(int reported_age, int event_year, const AgeGrouping& grouping);

// Calendar year (UTC) of an epoch-seconds timestamp.
int YearOf(std::int64_t epoch_seconds);

struct UserRecord {
  std::string user_id;
  int age = 0;  // reported age, integer years
  AgeGroup group = AgeGroup::kMainstream;
};

struct ItemRecord {
  std::string item_id;
  GenreDistribution genres;
  std::vector<std::size_t> genre_indices;  // annotated genres, ascending
};

struct Interaction {
  UserIndex user = 0;
  ItemIndex item = 0;
  std::uint32_t weight = 1;
  std::optional<int> rating;
  std::optional<std::int64_t> timestamp;
  // Age of the user when the event happened. Equals the reported age for
  // untimestamped logs.
  int age = 0;
};

enum class LogBase { kTwo, kE };

LogBase ParseLogBase(std::string_view text);
std::string_view LogBaseName(LogBase base);

// Jensen-Shannon divergence H(m) - (H(p) + H(q)) / 2 with m = (p + q) / 2.
// Base two gives a value in [0, 1]; base e gives [0, ln 2].
double Jsd(const GenreDistribution& p, const GenreDistribution& q,
           LogBase base = LogBase::kTwo);
double Jsd(std::span<const double> p, std::span<const double> q,
           LogBase base = LogBase::kTwo);

}  // namespace agerec

#endif  // AGEREC_DOMAIN_H_
