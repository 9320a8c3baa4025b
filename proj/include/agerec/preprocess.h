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

// Turning a raw log into train/validation/test partitions: binarization,
// iterative k-core filtering, splitting and the children-only training set.
// Pipeline order is binarize -> k-core -> split -> remove incomplete users ->
// derive the Child Set.

#ifndef AGEREC_PREPROCESS_H_
#define AGEREC_PREPROCESS_H_

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "agerec/ingest.h"

namespace agerec {

struct BinarizeMode {
  enum class Kind { kRatingThreshold, kMinCount, kKeepAll };
  Kind kind = Kind::kKeepAll;
  int rating_threshold = 3;      // keep rating > threshold
  std::uint32_t min_count = 2;   // keep pairs with total weight >= min_count

  // "rating-threshold:3", "min-count:2" or "keep-all".
  static BinarizeMode Parse(std::string_view text);
  std::string ToString() const;
};

// Surviving events carry weight 1. min-count collapses each (user, item)
// pair to one event stamped with its earliest timestamp.
InteractionLog Binarize(const InteractionLog& log, const BinarizeMode& mode);

// Half-open [from, to) interval of epoch seconds.
struct TimeRange {
  std::int64_t from = 0;
  std::int64_t to = 0;

  bool Contains(std::int64_t t) const { return t >= from && t < to; }
  // "2009-06-01..2009-09-01" (end exclusive).
  static TimeRange Parse(std::string_view text);
  std::string ToString() const;
};

// Parses "YYYY-MM-DD" as UTC midnight.
std::int64_t ParseDate(std::string_view text);
std::string FormatDate(std::int64_t epoch_seconds);

InteractionLog FilterTimeRange(const InteractionLog& log, const TimeRange& range);

// Iteratively removes users with fewer than k_user events and items with
// fewer than k_item events until every survivor meets its threshold. Throws
// DataError (with the iteration trace) when nothing survives.
InteractionLog KCore(const InteractionLog& log, std::size_t k_user,
                     std::size_t k_item);

struct SplitStrategy {
  enum class Kind { kPerUserRatio, kTemporalGlobal };
  Kind kind = Kind::kPerUserRatio;
  double train_pct = 60.0;
  double validation_pct = 20.0;
  double test_pct = 20.0;
  std::uint64_t seed = 0;
  TimeRange train_range;
  TimeRange validation_range;
  TimeRange test_range;

  void Validate() const;
  std::string ToString() const;
};

// Partition sizes of one user's n events under the ratio split: validation
// and test get floors, train the remainder.
struct RatioCut {
  std::size_t train = 0;
  std::size_t validation = 0;
  std::size_t test = 0;
};
RatioCut CutSizes(std::size_t n, const SplitStrategy& strategy);

// Event partitions over the catalogs of the log they were split from.
struct SplitBundle {
  std::vector<Interaction> train;
  std::vector<Interaction> validation;
  std::vector<Interaction> test;
  std::vector<Interaction> child_train;
  std::size_t num_users = 0;  // catalog sizes of the source log
  std::size_t num_items = 0;
  std::vector<char> surviving_users;
  std::vector<char> surviving_items;
  // Group of each user in the experiment (age at the user's earliest
  // training event).
  std::vector<AgeGroup> user_group;

  const std::vector<Interaction>& general_train() const { return train; }
  std::size_t SurvivingUserCount() const;
  std::size_t SurvivingItemCount() const;
};

// Splits, then repeatedly removes users lacking events in any partition and
// validation/test events whose item never occurs in train. Leaves
// child_train empty.
SplitBundle Split(const InteractionLog& log, const SplitStrategy& strategy);

// Train events of Child users. Throws DataError when there are none.
std::vector<Interaction> DeriveChildSet(const SplitBundle& bundle);

struct PreprocessOptions {
  BinarizeMode binarize;
  std::optional<TimeRange> time_range;
  std::size_t k_user = 1;
  std::size_t k_item = 1;
  SplitStrategy split;
};

// Full pipeline; the returned bundle has its Child Set populated.
SplitBundle Preprocess(const InteractionLog& log, const PreprocessOptions& options);

// Four event files (train/validation/test/child_train) plus bundle_manifest.
void WriteBundle(const std::filesystem::path& directory, const SplitBundle& bundle,
                 const InteractionLog& log, const PreprocessOptions& options,
                 const std::string& manifest_hash);
SplitBundle ReadBundle(const std::filesystem::path& directory,
                       const InteractionLog& log);

}  // namespace agerec

#endif  // AGEREC_PREPROCESS_H_
