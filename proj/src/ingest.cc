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
#include <limits>
#include <numeric>
#include <random>
#include <unordered_map>

#include "agerec/io.h"
#include "json.hpp"

namespace agerec {
namespace {

constexpr char kEventsFile[] = "events.tsv";
constexpr char kUsersFile[] = "users.tsv";
constexpr char kGenresFile[] = "genres.tsv";
constexpr char kVocabularyFile[] = "vocabulary.txt";
constexpr char kSummaryFile[] = "summary.json";

// Reads data lines, skipping blanks, "#" lines when `comments` is set, and
// an optional header line.
template <typename Fn>
void ForEachRow(const std::filesystem::path& path, bool header, Fn&& fn,
                bool comments = false) {
  auto in = OpenInput(path);
  std::string line;
  std::size_t line_no = 0;
  bool skipped_header = !header;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (Trim(line).empty()) continue;
    if (comments && line.front() == '#') continue;
    if (!skipped_header) {
      skipped_header = true;
      continue;
    }
    fn(std::string_view(line), line_no);
  }
}

[[noreturn]] void Malformed(const std::filesystem::path& path,
                            std::size_t line_no, const std::string& why) {
  throw DataError(path.string() + ":" + std::to_string(line_no) +
                  ": malformed row (" + why + ")");
}

std::uint64_t PairKey(UserIndex u, ItemIndex i) {
  return (static_cast<std::uint64_t>(u) << 32) | i;
}

}  // namespace

LogFormat ParseLogFormat(std::string_view text) {
  if (text == "rating-table") return LogFormat::kRatingTable;
  if (text == "implicit-table") return LogFormat::kImplicitTable;
  if (text == "listening-events") return LogFormat::kListeningEvents;
  throw ConfigError("unknown log format '" + std::string(text) + "'");
}

std::string_view LogFormatName(LogFormat format) {
  switch (format) {
    case LogFormat::kRatingTable:
      return "rating-table";
    case LogFormat::kImplicitTable:
      return "implicit-table";
    case LogFormat::kListeningEvents:
      return "listening-events";
  }
  return "?";
}

void DropReport::Add(const std::string& reason, std::size_t n) {
  if (n > 0) counts[reason] += n;
}

std::size_t DropReport::Get(const std::string& reason) const {
  auto it = counts.find(reason);
  return it == counts.end() ? 0 : it->second;
}

bool InteractionLog::HasTimestamps() const {
  return !events.empty() &&
         std::all_of(events.begin(), events.end(),
                     [](const Interaction& e) { return e.timestamp.has_value(); });
}

bool InteractionLog::HasPerEventAges() const {
  return format == LogFormat::kListeningEvents;
}

bool InteractionLog::HasRatings() const {
  return !events.empty() &&
         std::all_of(events.begin(), events.end(),
                     [](const Interaction& e) { return e.rating.has_value(); });
}

GenreVocabulary LoadVocabulary(const std::filesystem::path& path) {
  std::vector<std::string> names;
  ForEachRow(path, false, [&](std::string_view line, std::size_t) {
    names.emplace_back(Trim(line));
  }, true);
  if (names.empty()) throw ConfigError("empty genre vocabulary " + path.string());
  return GenreVocabulary(std::move(names));
}

InteractionLog LoadLog(const std::filesystem::path& events_path,
                       const std::filesystem::path& users_path,
                       const std::filesystem::path& genres_path,
                       const GenreVocabulary& vocabulary,
                       const LoadOptions& options) {
  options.grouping.Validate();
  const bool timestamped = options.format == LogFormat::kListeningEvents;
  if (timestamped && !options.grouping.reference_year) {
    throw ConfigError("listening-events logs need a grouping reference_year");
  }

  InteractionLog log;
  log.vocabulary = vocabulary;
  log.grouping = options.grouping;
  log.format = options.format;
  DropReport& drops = log.drops;

  auto on_malformed = [&](const std::filesystem::path& path,
                          std::size_t line_no, const std::string& why) {
    if (options.strict) Malformed(path, line_no, why);
    drops.Add("malformed_row");
  };

  // Users.
  std::unordered_map<std::string, UserIndex> user_index;
  ForEachRow(users_path, options.header, [&](std::string_view line,
                                             std::size_t line_no) {
    auto fields = SplitFields(line, options.delimiter);
    if (fields.size() <= options.age_column) {
      on_malformed(users_path, line_no, "missing age column");
      return;
    }
    const std::string id(Trim(fields[0]));
    auto age = ParseInt(fields[options.age_column]);
    if (id.empty()) {
      on_malformed(users_path, line_no, "empty user id");
      return;
    }
    if (!age) {
      drops.Add("invalid_age");
      return;
    }
    int years = static_cast<int>(*age);
    if (auto it = options.age_recode.find(years); it != options.age_recode.end()) {
      years = it->second;
    }
    if (!timestamped && (years < kMinAge || years > kMaxAge)) {
      drops.Add("age_out_of_range");
      return;
    }
    if (years < 0) {
      drops.Add("invalid_age");
      return;
    }
    UserRecord record{id, years, AgeGroup::kMainstream};
    if (!timestamped) record.group = AssignGroup(years, options.grouping);
    auto [it, inserted] = user_index.emplace(id, log.users.size());
    if (inserted) {
      log.users.push_back(std::move(record));
    } else {
      drops.Add("duplicate_user");
      log.users[it->second] = std::move(record);
    }
  }, options.skip_comments);

  // Items.
  std::unordered_map<std::string, ItemIndex> item_index;
  ForEachRow(genres_path, options.header, [&](std::string_view line,
                                              std::size_t line_no) {
    auto fields = SplitFields(line, options.delimiter);
    if (fields.size() <= options.genre_column) {
      on_malformed(genres_path, line_no, "missing genre column");
      return;
    }
    const std::string id(Trim(fields[0]));
    if (id.empty()) {
      on_malformed(genres_path, line_no, "empty item id");
      return;
    }
    std::vector<std::size_t> genres;
    for (auto label : SplitFields(fields[options.genre_column], "|")) {
      label = Trim(label);
      if (label.empty()) continue;
      if (auto g = vocabulary.Find(label)) {
        genres.push_back(*g);
      } else {
        drops.Add("unknown_genre_label");
      }
    }
    std::sort(genres.begin(), genres.end());
    genres.erase(std::unique(genres.begin(), genres.end()), genres.end());
    if (genres.empty()) {
      drops.Add("item_without_genre");
      return;
    }
    ItemRecord record{id, GenreDistribution::EqualWeights(genres, vocabulary.size()),
                      genres};
    auto [it, inserted] = item_index.emplace(id, log.items.size());
    if (inserted) {
      log.items.push_back(std::move(record));
    } else {
      drops.Add("duplicate_item");
      log.items[it->second] = std::move(record);
    }
  }, options.skip_comments);

  // Events.
  const std::size_t min_columns = timestamped ? 4 : 3;
  std::unordered_map<std::uint64_t, std::size_t> last_rating;
  ForEachRow(events_path, options.header, [&](std::string_view line,
                                              std::size_t line_no) {
    auto fields = SplitFields(line, options.delimiter);
    if (fields.size() < min_columns) {
      on_malformed(events_path, line_no, "expected at least " +
                                             std::to_string(min_columns) +
                                             " columns");
      return;
    }
    auto value = ParseInt(fields[2]);
    std::optional<std::int64_t> ts;
    if (fields.size() >= 4) {
      ts = ParseInt(fields[3]);
      if (!ts) {
        on_malformed(events_path, line_no, "bad timestamp");
        return;
      }
    }
    if (!value) {
      on_malformed(events_path, line_no, "bad rating/count");
      return;
    }
    auto u = user_index.find(std::string(Trim(fields[0])));
    if (u == user_index.end()) {
      drops.Add("unknown_user");
      return;
    }
    auto i = item_index.find(std::string(Trim(fields[1])));
    if (i == item_index.end()) {
      drops.Add("unannotated_item");
      return;
    }
    Interaction event;
    event.user = u->second;
    event.item = i->second;
    event.timestamp = ts;
    const UserRecord& user = log.users[event.user];
    if (options.format == LogFormat::kRatingTable) {
      event.rating = static_cast<int>(*value);
      event.weight = 1;
    } else {
      if (*value < 1) {
        drops.Add("nonpositive_count");
        return;
      }
      event.weight = static_cast<std::uint32_t>(
          std::min<std::int64_t>(*value, std::numeric_limits<std::uint32_t>::max()));
    }
    event.age = user.age;
    if (timestamped) {
      event.age = AgeAtYear(user.age, YearOf(*ts), options.grouping);
      if (event.age < kMinAge || event.age > kMaxAge) {
        drops.Add("event_age_out_of_range");
        return;
      }
    }
    if (options.format == LogFormat::kRatingTable) {
      auto [it, inserted] =
          last_rating.emplace(PairKey(event.user, event.item), log.events.size());
      if (!inserted) {
        drops.Add("duplicate_rating");
        log.events[it->second].weight = 0;  // superseded, removed below
        it->second = log.events.size();
      }
    }
    log.events.push_back(std::move(event));
  }, options.skip_comments);
  std::erase_if(log.events, [](const Interaction& e) { return e.weight == 0; });

  if (timestamped) {
    // Group at the earliest surviving event.
    std::vector<std::optional<std::pair<std::int64_t, int>>> first(log.users.size());
    for (const auto& e : log.events) {
      auto& f = first[e.user];
      if (!f || *e.timestamp < f->first) f = std::make_pair(*e.timestamp, e.age);
    }
    for (std::size_t u = 0; u < log.users.size(); ++u) {
      if (first[u]) log.users[u].group = AssignGroup(first[u]->second, log.grouping);
    }
  }

  log = Compact(std::move(log));
  if (log.events.empty()) {
    throw DataError("no events survived ingestion of " + events_path.string());
  }
  return log;
}

InteractionLog Compact(InteractionLog log) {
  constexpr UserIndex kNone = std::numeric_limits<UserIndex>::max();
  std::vector<UserIndex> user_map(log.users.size(), kNone);
  std::vector<ItemIndex> item_map(log.items.size(), kNone);
  for (const auto& e : log.events) {
    user_map[e.user] = 0;
    item_map[e.item] = 0;
  }
  std::vector<UserRecord> users;
  for (std::size_t u = 0; u < log.users.size(); ++u) {
    if (user_map[u] == kNone) continue;
    user_map[u] = static_cast<UserIndex>(users.size());
    users.push_back(std::move(log.users[u]));
  }
  std::vector<ItemRecord> items;
  for (std::size_t i = 0; i < log.items.size(); ++i) {
    if (item_map[i] == kNone) continue;
    item_map[i] = static_cast<ItemIndex>(items.size());
    items.push_back(std::move(log.items[i]));
  }
  log.drops.Add("user_without_events", log.users.size() - users.size());
  log.drops.Add("item_without_events", log.items.size() - items.size());
  for (auto& e : log.events) {
    e.user = user_map[e.user];
    e.item = item_map[e.item];
  }
  log.users = std::move(users);
  log.items = std::move(items);
  return log;
}

LogSummary Summarize(const InteractionLog& log) {
  LogSummary s;
  std::vector<char> user_seen(log.users.size(), 0);
  std::vector<char> item_seen(log.items.size(), 0);
  for (const auto& e : log.events) {
    ++s.events;
    s.total_weight += e.weight;
    user_seen[e.user] = 1;
    item_seen[e.item] = 1;
    const AgeGroup g = log.HasPerEventAges() ? AssignGroup(e.age, log.grouping)
                                           : log.users[e.user].group;
    ++s.events_per_group[static_cast<int>(g)];
  }
  for (std::size_t u = 0; u < log.users.size(); ++u) {
    if (!user_seen[u]) continue;
    ++s.users;
    ++s.users_per_group[static_cast<int>(log.users[u].group)];
  }
  s.items = static_cast<std::size_t>(
      std::count(item_seen.begin(), item_seen.end(), 1));
  for (int g = 0; g < 3; ++g) {
    s.user_share_pct[g] =
        s.users ? 100.0 * s.users_per_group[g] / static_cast<double>(s.users) : 0.0;
    s.event_share_pct[g] =
        s.events ? 100.0 * s.events_per_group[g] / static_cast<double>(s.events)
                 : 0.0;
  }
  return s;
}

std::vector<UserIndex> ActivityOutliers(const InteractionLog& log, double sigma) {
  std::vector<double> activity(log.users.size(), 0.0);
  for (const auto& e : log.events) activity[e.user] += e.weight;
  if (activity.empty()) return {};
  const double n = static_cast<double>(activity.size());
  const double mean = std::accumulate(activity.begin(), activity.end(), 0.0) / n;
  double ss = 0.0;
  for (double a : activity) ss += (a - mean) * (a - mean);
  const double threshold = mean + sigma * std::sqrt(ss / n);
  std::vector<UserIndex> outliers;
  for (std::size_t u = 0; u < activity.size(); ++u) {
    if (activity[u] > threshold) outliers.push_back(static_cast<UserIndex>(u));
  }
  return outliers;
}

std::map<int, std::size_t> StratifiedQuotas(
    const std::map<int, std::size_t>& population_per_age,
    const std::map<int, std::size_t>& eligible_per_age, std::size_t n) {
  std::map<int, std::size_t> quota;
  std::map<int, bool> capped;
  for (const auto& [age, count] : population_per_age) {
    if (count > 0) quota[age] = 0;
  }
  std::size_t remaining = n;
  // Largest-remainder allocation over uncapped ages; ages whose allocation
  // exceeds their eligible pool are capped and the excess re-allocated.
  while (remaining > 0) {
    double weight_total = 0.0;
    for (const auto& [age, count] : population_per_age) {
      if (quota.count(age) && !capped[age]) weight_total += count;
    }
    if (weight_total <= 0.0) break;
    std::vector<std::pair<double, int>> remainders;
    std::map<int, std::size_t> extra;
    std::size_t assigned = 0;
    for (const auto& [age, count] : population_per_age) {
      if (!quota.count(age) || capped[age]) continue;
      const double exact = remaining * (count / weight_total);
      extra[age] = static_cast<std::size_t>(std::floor(exact));
      assigned += extra[age];
      remainders.emplace_back(exact - std::floor(exact), age);
    }
    std::stable_sort(remainders.begin(), remainders.end(),
                     [](const auto& a, const auto& b) { return a.first > b.first; });
    for (std::size_t k = 0; assigned < remaining && k < remainders.size(); ++k) {
      ++extra[remainders[k].second];
      ++assigned;
    }
    std::size_t overflow = 0;
    for (auto& [age, add] : extra) {
      auto e = eligible_per_age.find(age);
      const std::size_t cap = e == eligible_per_age.end() ? 0 : e->second;
      quota[age] += add;
      if (quota[age] >= cap) {
        overflow += quota[age] - cap;
        quota[age] = cap;
        capped[age] = true;
      }
    }
    remaining = overflow;
  }
  std::erase_if(quota, [](const auto& kv) { return kv.second == 0; });
  return quota;
}

InteractionLog SampleUsers(const InteractionLog& log,
                           const SampleOptions& options) {
  const bool windowed = options.first_before_year || options.last_after_year;
  if (windowed && !log.HasTimestamps()) {
    throw ConfigError("activity window requires a timestamped log");
  }
  std::vector<char> eligible(log.users.size(), 1);
  if (windowed) {
    std::vector<std::int64_t> first(log.users.size(),
                                    std::numeric_limits<std::int64_t>::max());
    std::vector<std::int64_t> last(log.users.size(),
                                   std::numeric_limits<std::int64_t>::min());
    for (const auto& e : log.events) {
      first[e.user] = std::min(first[e.user], *e.timestamp);
      last[e.user] = std::max(last[e.user], *e.timestamp);
    }
    for (std::size_t u = 0; u < log.users.size(); ++u) {
      if (options.first_before_year && YearOf(first[u]) > *options.first_before_year) {
        eligible[u] = 0;
      }
      if (options.last_after_year && YearOf(last[u]) < *options.last_after_year) {
        eligible[u] = 0;
      }
    }
  }
  if (options.activity_cap_sigma) {
    for (UserIndex u : ActivityOutliers(log, *options.activity_cap_sigma)) {
      eligible[u] = 0;
    }
  }
  const std::size_t pool =
      static_cast<std::size_t>(std::count(eligible.begin(), eligible.end(), 1));
  if (options.n > pool) {
    throw DataError("cannot sample " + std::to_string(options.n) +
                    " users: eligible pool has " + std::to_string(pool));
  }

  std::vector<char> chosen(log.users.size(), 0);
  if (options.stratify_by_age) {
    std::map<int, std::size_t> population, eligible_per_age;
    std::map<int, std::vector<UserIndex>> candidates;
    for (std::size_t u = 0; u < log.users.size(); ++u) {
      const int age = log.users[u].age;
      ++population[age];
      if (eligible[u]) {
        ++eligible_per_age[age];
        candidates[age].push_back(static_cast<UserIndex>(u));
      }
    }
    const auto quotas = StratifiedQuotas(population, eligible_per_age, options.n);
    for (const auto& [age, q] : quotas) {
      auto& pool_a = candidates[age];
      auto rng = SeededRng(options.seed, static_cast<std::uint64_t>(age));
      std::shuffle(pool_a.begin(), pool_a.end(), rng);
      for (std::size_t k = 0; k < q; ++k) chosen[pool_a[k]] = 1;
    }
  } else {
    std::vector<UserIndex> candidates;
    for (std::size_t u = 0; u < log.users.size(); ++u) {
      if (eligible[u]) candidates.push_back(static_cast<UserIndex>(u));
    }
    auto rng = SeededRng(options.seed);
    std::shuffle(candidates.begin(), candidates.end(), rng);
    for (std::size_t k = 0; k < options.n; ++k) chosen[candidates[k]] = 1;
  }

  InteractionLog out;
  out.vocabulary = log.vocabulary;
  out.grouping = log.grouping;
  out.format = log.format;
  out.users = log.users;
  out.items = log.items;
  out.drops = log.drops;
  for (const auto& e : log.events) {
    if (chosen[e.user]) out.events.push_back(e);
  }
  // Sampling is not a drop; pruning counters are reported relative to input.
  DropReport before = out.drops;
  out = Compact(std::move(out));
  out.drops = std::move(before);
  if (out.events.empty()) throw DataError("sample contains no events");
  return out;
}

LoadOptions CanonicalLoadOptions(const InteractionLog& log) {
  LoadOptions options;
  options.format = log.format;
  options.delimiter = "\t";
  options.header = true;
  options.strict = true;
  options.skip_comments = true;
  options.grouping = log.grouping;
  return options;
}

std::string SummaryJson(const InteractionLog& log,
                        const std::string& manifest_hash) {
  const LogSummary s = Summarize(log);
  nlohmann::ordered_json j;
  j["manifest_hash"] = manifest_hash;
  j["format"] = std::string(LogFormatName(log.format));
  j["users"] = s.users;
  j["items"] = s.items;
  j["events"] = s.events;
  j["total_weight"] = s.total_weight;
  j["genres"] = log.vocabulary.size();
  for (AgeGroup g : kAllGroups) {
    const int k = static_cast<int>(g);
    const std::string name(GroupName(g));
    j["groups"][name]["users"] = s.users_per_group[k];
    j["groups"][name]["events"] = s.events_per_group[k];
    j["groups"][name]["user_share_pct"] = std::round(s.user_share_pct[k] * 1e4) / 1e4;
    j["groups"][name]["event_share_pct"] =
        std::round(s.event_share_pct[k] * 1e4) / 1e4;
  }
  j["drop_report"] = nlohmann::ordered_json::object();
  for (const auto& [reason, n] : log.drops.counts) j["drop_report"][reason] = n;
  return j.dump(2) + "\n";
}

void WriteCanonical(const InteractionLog& log,
                    const std::filesystem::path& directory,
                    const std::string& manifest_hash) {
  {
    auto out = OpenOutput(directory / kEventsFile);
    out << "# manifest_hash=" << manifest_hash << '\n';
    const bool ts = log.HasTimestamps();
    out << "user_id\titem_id\trating_or_count" << (ts ? "\ttimestamp" : "") << '\n';
    for (const auto& e : log.events) {
      out << log.users[e.user].user_id << '\t' << log.items[e.item].item_id << '\t'
          << (e.rating ? *e.rating : static_cast<std::int64_t>(e.weight));
      if (ts) out << '\t' << *e.timestamp;
      out << '\n';
    }
  }
  {
    auto out = OpenOutput(directory / kUsersFile);
    out << "# manifest_hash=" << manifest_hash << '\n';
    out << "user_id\tage\n";
    for (const auto& u : log.users) out << u.user_id << '\t' << u.age << '\n';
  }
  {
    auto out = OpenOutput(directory / kGenresFile);
    out << "# manifest_hash=" << manifest_hash << '\n';
    out << "item_id\tgenres\n";
    for (const auto& item : log.items) {
      out << item.item_id << '\t';
      for (std::size_t k = 0; k < item.genre_indices.size(); ++k) {
        out << (k ? "|" : "") << log.vocabulary.name(item.genre_indices[k]);
      }
      out << '\n';
    }
  }
  {
    auto out = OpenOutput(directory / kVocabularyFile);
    out << "# manifest_hash=" << manifest_hash << '\n';
    for (const auto& name : log.vocabulary.names()) out << name << '\n';
  }
  auto out = OpenOutput(directory / kSummaryFile);
  out << SummaryJson(log, manifest_hash);
}

InteractionLog LoadCanonical(const std::filesystem::path& directory,
                             LogFormat format, const AgeGrouping& grouping) {
  InteractionLog shape;
  shape.format = format;
  shape.grouping = grouping;
  const GenreVocabulary vocabulary = LoadVocabulary(directory / kVocabularyFile);
  return LoadLog(directory / kEventsFile, directory / kUsersFile,
                 directory / kGenresFile, vocabulary, CanonicalLoadOptions(shape));
}

}  // namespace agerec
