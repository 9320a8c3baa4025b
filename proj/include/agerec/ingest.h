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

// Loading interaction logs with age and genre metadata, the global
// age/genre filters, user sampling, and the canonical on-disk form.

#ifndef AGEREC_INGEST_H_
#define AGEREC_INGEST_H_

#include <array>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "agerec/domain.h"

namespace agerec {

enum class LogFormat { kRatingTable, kImplicitTable, kListeningEvents };

LogFormat ParseLogFormat(std::string_view text);
std::string_view LogFormatName(LogFormat format);

// Counts of everything filtered out on the way in, keyed by reason. Only
// nonzero reasons are present.
struct DropReport {
  std::map<std::string, std::size_t> counts;

  void Add(const std::string& reason, std::size_t n = 1);
  std::size_t Get(const std::string& reason) const;
};

struct InteractionLog {
  GenreVocabulary vocabulary;
  AgeGrouping grouping;
  LogFormat format = LogFormat::kRatingTable;
  std::vector<UserRecord> users;
  std::vector<ItemRecord> items;
  std::vector<Interaction> events;
  DropReport drops;

  bool HasTimestamps() const;
  // Listening-event logs attribute an age to every event; other formats use
  // the reported age throughout (and get one profile per user).
  bool HasPerEventAges() const;
  bool HasRatings() const;
};

struct LoadOptions {
  LogFormat format = LogFormat::kRatingTable;
  std::string delimiter = "\t";
  bool header = false;
  // Abort on the first malformed row instead of skipping it.
  bool strict = false;
  // Treat lines starting with '#' as comments.
  bool skip_comments = false;
  // Column of the users file holding the age (user id is column 0).
  std::size_t age_column = 1;
  // Column of the genres file holding the '|'-separated labels.
  std::size_t genre_column = 1;
  // Maps coded age values (e.g. a dataset's "under 18" code) to years.
  std::map<int, int> age_recode;
  AgeGrouping grouping;
};

GenreVocabulary LoadVocabulary(const std::filesystem::path& path);

// Parses and validates a log. Rows citing unknown users, users without a
// valid age in [12, 65] and items without a recognized genre are dropped and
// counted in the log's drop report. Users and items left without events are
// pruned. For timestamped logs each event carries the user's age in the
// event's calendar year and the user's group is taken at the earliest event.
InteractionLog LoadLog(const std::filesystem::path& events_path,
                       const std::filesystem::path& users_path,
                       const std::filesystem::path& genres_path,
                       const GenreVocabulary& vocabulary,
                       const LoadOptions& options);

// Drops users and items without events and renumbers the survivors,
// preserving their relative order.
InteractionLog Compact(InteractionLog log);

struct LogSummary {
  std::size_t users = 0;
  std::size_t items = 0;
  std::size_t events = 0;
  std::uint64_t total_weight = 0;
  std::array<std::size_t, 3> users_per_group{};
  std::array<std::size_t, 3> events_per_group{};
  std::array<double, 3> user_share_pct{};
  std::array<double, 3> event_share_pct{};
};

// Recomputed from the events; catalog entries without events do not count.
LogSummary Summarize(const InteractionLog& log);

struct SampleOptions {
  std::size_t n = 0;
  std::uint64_t seed = 0;
  bool stratify_by_age = false;
  // Users whose activity exceeds mean + sigma * stddev are ineligible.
  std::optional<double> activity_cap_sigma;
  // Eligible users' first event is in or before this year...
  std::optional<int> first_before_year;
  // ...and their last event in or after this one.
  std::optional<int> last_after_year;
};

// Users ineligible under the activity cap. Activity is the total event
// weight; the standard deviation is the population one.
std::vector<UserIndex> ActivityOutliers(const InteractionLog& log, double sigma);

// Per-age quotas for a proportional stratified sample of `n` users, using
// the age shares of `log` and capped by `eligible_per_age`.
std::map<int, std::size_t> StratifiedQuotas(
    const std::map<int, std::size_t>& population_per_age,
    const std::map<int, std::size_t>& eligible_per_age, std::size_t n);

// Seeded user sample. Throws DataError when n exceeds the eligible pool.
InteractionLog SampleUsers(const InteractionLog& log,
                           const SampleOptions& options);

// Writes events.tsv, users.tsv, genres.tsv, vocabulary.txt and summary.json.
// Re-ingesting the directory with CanonicalLoadOptions reproduces the log.
void WriteCanonical(const InteractionLog& log,
                    const std::filesystem::path& directory,
                    const std::string& manifest_hash);

LoadOptions CanonicalLoadOptions(const InteractionLog& log);
InteractionLog LoadCanonical(const std::filesystem::path& directory,
                             LogFormat format, const AgeGrouping& grouping);

std::string SummaryJson(const InteractionLog& log,
                        const std::string& manifest_hash);

}  // namespace agerec

#endif  // AGEREC_INGEST_H_
