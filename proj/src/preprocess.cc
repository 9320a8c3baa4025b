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

#include "agerec/preprocess.h"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <limits>
#include <numeric>
#include <sstream>
#include <unordered_map>

#include "agerec/io.h"

namespace agerec {
namespace {

std::uint64_t PairKey(UserIndex u, ItemIndex i) {
  return (static_cast<std::uint64_t>(u) << 32) | i;
}

InteractionLog WithEvents(const InteractionLog& log, std::vector<Interaction> events) {
  InteractionLog out;
  out.vocabulary = log.vocabulary;
  out.grouping = log.grouping;
  out.format = log.format;
  out.users = log.users;
  out.items = log.items;
  out.drops = log.drops;
  out.events = std::move(events);
  return out;
}

enum class Part : std::uint8_t { kNone, kTrain, kValidation, kTest };

}  // namespace

BinarizeMode BinarizeMode::Parse(std::string_view text) {
  BinarizeMode mode;
  const auto colon = text.find(':');
  const std::string_view kind = text.substr(0, colon);
  const std::string_view arg =
      colon == std::string_view::npos ? std::string_view() : text.substr(colon + 1);
  if (kind == "keep-all") {
    mode.kind = Kind::kKeepAll;
  } else if (kind == "rating-threshold") {
    auto t = ParseInt(arg);
    if (!t) throw ConfigError("rating-threshold needs an integer, e.g. rating-threshold:3");
    mode.kind = Kind::kRatingThreshold;
    mode.rating_threshold = static_cast<int>(*t);
  } else if (kind == "min-count") {
    auto c = ParseInt(arg);
    if (!c || *c < 1) throw ConfigError("min-count needs a positive integer, e.g. min-count:2");
    mode.kind = Kind::kMinCount;
    mode.min_count = static_cast<std::uint32_t>(*c);
  } else {
    throw ConfigError("unknown binarize mode '" + std::string(text) + "'");
  }
  return mode;
}

std::string BinarizeMode::ToString() const {
  switch (kind) {
    case Kind::kKeepAll:
      return "keep-all";
    case Kind::kRatingThreshold:
      return "rating-threshold:" + std::to_string(rating_threshold);
    case Kind::kMinCount:
      return "min-count:" + std::to_string(min_count);
  }
  return "?";
}

InteractionLog Binarize(const InteractionLog& log, const BinarizeMode& mode) {
  std::vector<Interaction> events;
  switch (mode.kind) {
    case BinarizeMode::Kind::kKeepAll:
      events = log.events;
      for (auto& e : events) e.weight = 1;
      break;
    case BinarizeMode::Kind::kRatingThreshold:
      if (!log.HasRatings()) {
        throw ConfigError("rating-threshold binarization on a log without ratings");
      }
      for (const auto& e : log.events) {
        if (*e.rating > mode.rating_threshold) {
          events.push_back(e);
          events.back().weight = 1;
        }
      }
      break;
    case BinarizeMode::Kind::kMinCount: {
      std::unordered_map<std::uint64_t, std::size_t> slot;
      std::vector<std::uint64_t> totals;
      for (const auto& e : log.events) {
        auto [it, inserted] = slot.emplace(PairKey(e.user, e.item), events.size());
        if (inserted) {
          events.push_back(e);
          totals.push_back(e.weight);
          continue;
        }
        Interaction& first = events[it->second];
        totals[it->second] += e.weight;
        if (e.timestamp && (!first.timestamp || *e.timestamp < *first.timestamp)) {
          first.timestamp = e.timestamp;
          first.age = e.age;
        }
      }
      std::vector<Interaction> kept;
      for (std::size_t k = 0; k < events.size(); ++k) {
        if (totals[k] >= mode.min_count) {
          kept.push_back(events[k]);
          kept.back().weight = 1;
        }
      }
      events = std::move(kept);
      break;
    }
  }
  return WithEvents(log, std::move(events));
}

std::int64_t ParseDate(std::string_view text) {
  using namespace std::chrono;
  int y = 0;
  unsigned m = 0, d = 0;
  const std::string owned(Trim(text));
  char tail = 0;
  if (std::sscanf(owned.c_str(), "%d-%u-%u%c", &y, &m, &d, &tail) != 3) {
    throw ConfigError("expected a YYYY-MM-DD date, got '" + owned + "'");
  }
  const year_month_day ymd{year{y}, month{m}, day{d}};
  if (!ymd.ok()) throw ConfigError("invalid date '" + owned + "'");
  return duration_cast<seconds>(sys_days{ymd}.time_since_epoch()).count();
}

std::string FormatDate(std::int64_t epoch_seconds) {
  using namespace std::chrono;
  const year_month_day ymd{floor<days>(sys_seconds{seconds{epoch_seconds}})};
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%04d-%02u-%02u", static_cast<int>(ymd.year()),
                static_cast<unsigned>(ymd.month()), static_cast<unsigned>(ymd.day()));
  return buf;
}

TimeRange TimeRange::Parse(std::string_view text) {
  const auto sep = text.find("..");
  if (sep == std::string_view::npos) {
    throw ConfigError("time range must look like 2009-06-01..2009-09-01");
  }
  TimeRange r{ParseDate(text.substr(0, sep)), ParseDate(text.substr(sep + 2))};
  if (r.from >= r.to) throw ConfigError("empty time range '" + std::string(text) + "'");
  return r;
}

std::string TimeRange::ToString() const {
  return FormatDate(from) + ".." + FormatDate(to);
}

InteractionLog FilterTimeRange(const InteractionLog& log, const TimeRange& range) {
  if (!log.HasTimestamps()) throw ConfigError("time range filter needs timestamps");
  std::vector<Interaction> events;
  for (const auto& e : log.events) {
    if (range.Contains(*e.timestamp)) events.push_back(e);
  }
  return WithEvents(log, std::move(events));
}

InteractionLog KCore(const InteractionLog& log, std::size_t k_user,
                     std::size_t k_item) {
  if (k_user < 1 || k_item < 1) throw ConfigError("k-core thresholds must be >= 1");
  std::vector<char> alive(log.events.size(), 1);
  std::vector<char> user_ok(log.users.size(), 1);
  std::vector<char> item_ok(log.items.size(), 1);
  std::ostringstream trace;
  for (int round = 1;; ++round) {
    std::vector<std::size_t> user_deg(log.users.size(), 0);
    std::vector<std::size_t> item_deg(log.items.size(), 0);
    std::size_t live = 0;
    for (std::size_t k = 0; k < log.events.size(); ++k) {
      if (!alive[k]) continue;
      ++live;
      ++user_deg[log.events[k].user];
      ++item_deg[log.events[k].item];
    }
    bool changed = false;
    std::size_t users_left = 0, items_left = 0;
    for (std::size_t u = 0; u < user_deg.size(); ++u) {
      if (user_ok[u] && user_deg[u] < k_user) {
        user_ok[u] = 0;
        changed = changed || user_deg[u] > 0;
      }
      users_left += user_ok[u] && user_deg[u] > 0;
    }
    for (std::size_t i = 0; i < item_deg.size(); ++i) {
      if (item_ok[i] && item_deg[i] < k_item) {
        item_ok[i] = 0;
        changed = changed || item_deg[i] > 0;
      }
      items_left += item_ok[i] && item_deg[i] > 0;
    }
    trace << " round " << round << ": " << live << " events, " << users_left
          << " users, " << items_left << " items;";
    if (!changed) break;
    for (std::size_t k = 0; k < log.events.size(); ++k) {
      const auto& e = log.events[k];
      if (alive[k] && (!user_ok[e.user] || !item_ok[e.item])) alive[k] = 0;
    }
  }
  std::vector<Interaction> events;
  for (std::size_t k = 0; k < log.events.size(); ++k) {
    if (alive[k]) events.push_back(log.events[k]);
  }
  if (events.empty()) {
    throw DataError("k-core (" + std::to_string(k_user) + ", " +
                    std::to_string(k_item) + ") left no events:" + trace.str());
  }
  return WithEvents(log, std::move(events));
}

void SplitStrategy::Validate() const {
  if (kind == Kind::kPerUserRatio) {
    if (train_pct < 0 || validation_pct < 0 || test_pct < 0 ||
        std::abs(train_pct + validation_pct + test_pct - 100.0) > 1e-9) {
      throw ConfigError("split ratios must be non-negative and sum to 100");
    }
  } else {
    const TimeRange* r[] = {&train_range, &validation_range, &test_range};
    for (const TimeRange* t : r) {
      if (t->from >= t->to) throw ConfigError("empty temporal split range");
    }
    if (train_range.to > validation_range.from ||
        validation_range.to > test_range.from) {
      throw ConfigError("temporal split ranges must be disjoint and ordered");
    }
  }
}

std::string SplitStrategy::ToString() const {
  if (kind == Kind::kPerUserRatio) {
    return "per-user-ratio:" + FormatFixed(train_pct, 1) + "/" +
           FormatFixed(validation_pct, 1) + "/" + FormatFixed(test_pct, 1) +
           " seed=" + std::to_string(seed);
  }
  return "temporal-global:train=" + train_range.ToString() +
         " validation=" + validation_range.ToString() +
         " test=" + test_range.ToString();
}

RatioCut CutSizes(std::size_t n, const SplitStrategy& strategy) {
  // Tiny epsilon so that e.g. 10 * 0.2 is not floored to 1 by rounding.
  auto floor_share = [&](double pct) {
    return static_cast<std::size_t>(std::floor(n * pct / 100.0 + 1e-9));
  };
  RatioCut cut;
  cut.validation = floor_share(strategy.validation_pct);
  cut.test = floor_share(strategy.test_pct);
  cut.train = n - cut.validation - cut.test;
  return cut;
}

std::size_t SplitBundle::SurvivingUserCount() const {
  return static_cast<std::size_t>(
      std::count(surviving_users.begin(), surviving_users.end(), 1));
}

std::size_t SplitBundle::SurvivingItemCount() const {
  return static_cast<std::size_t>(
      std::count(surviving_items.begin(), surviving_items.end(), 1));
}

SplitBundle Split(const InteractionLog& log, const SplitStrategy& strategy) {
  strategy.Validate();
  const std::size_t n_events = log.events.size();
  std::vector<Part> part(n_events, Part::kNone);

  if (strategy.kind == SplitStrategy::Kind::kPerUserRatio) {
    std::vector<std::vector<std::size_t>> by_user(log.users.size());
    for (std::size_t k = 0; k < n_events; ++k) by_user[log.events[k].user].push_back(k);
    ParallelFor(by_user.size(), [&](std::size_t u) {
      auto& events = by_user[u];
      if (events.size() < 3) return;  // cannot populate three partitions
      auto rng = SeededRng(strategy.seed, u);
      std::shuffle(events.begin(), events.end(), rng);
      const RatioCut cut = CutSizes(events.size(), strategy);
      for (std::size_t k = 0; k < events.size(); ++k) {
        part[events[k]] = k < cut.train                    ? Part::kTrain
                          : k < cut.train + cut.validation ? Part::kValidation
                                                           : Part::kTest;
      }
    });
  } else {
    if (!log.HasTimestamps()) throw ConfigError("temporal split needs timestamps");
    for (std::size_t k = 0; k < n_events; ++k) {
      const std::int64_t t = *log.events[k].timestamp;
      if (strategy.train_range.Contains(t)) {
        part[k] = Part::kTrain;
      } else if (strategy.validation_range.Contains(t)) {
        part[k] = Part::kValidation;
      } else if (strategy.test_range.Contains(t)) {
        part[k] = Part::kTest;
      }
    }
  }

  // Fixed point: every user has all three partitions and every evaluated
  // item is known to train.
  while (true) {
    std::vector<std::array<std::size_t, 4>> per_user(log.users.size(), {0, 0, 0, 0});
    std::vector<char> in_train(log.items.size(), 0);
    for (std::size_t k = 0; k < n_events; ++k) {
      const auto& e = log.events[k];
      ++per_user[e.user][static_cast<int>(part[k])];
      if (part[k] == Part::kTrain) in_train[e.item] = 1;
    }
    bool changed = false;
    for (std::size_t k = 0; k < n_events; ++k) {
      if (part[k] == Part::kNone) continue;
      const auto& e = log.events[k];
      const auto& c = per_user[e.user];
      const bool complete = c[1] > 0 && c[2] > 0 && c[3] > 0;
      const bool cold = part[k] != Part::kTrain && !in_train[e.item];
      if (!complete || cold) {
        part[k] = Part::kNone;
        changed = true;
      }
    }
    if (!changed) break;
  }

  SplitBundle bundle;
  bundle.num_users = log.users.size();
  bundle.num_items = log.items.size();
  bundle.surviving_users.assign(bundle.num_users, 0);
  bundle.surviving_items.assign(bundle.num_items, 0);
  bundle.user_group.resize(bundle.num_users);
  for (std::size_t u = 0; u < bundle.num_users; ++u) {
    bundle.user_group[u] = log.users[u].group;
  }
  std::vector<std::int64_t> earliest(bundle.num_users,
                                     std::numeric_limits<std::int64_t>::max());
  for (std::size_t k = 0; k < n_events; ++k) {
    const auto& e = log.events[k];
    switch (part[k]) {
      case Part::kNone:
        continue;
      case Part::kTrain:
        bundle.train.push_back(e);
        if (e.timestamp && *e.timestamp < earliest[e.user]) {
          earliest[e.user] = *e.timestamp;
          bundle.user_group[e.user] = AssignGroup(e.age, log.grouping);
        }
        break;
      case Part::kValidation:
        bundle.validation.push_back(e);
        break;
      case Part::kTest:
        bundle.test.push_back(e);
        break;
    }
    bundle.surviving_users[e.user] = 1;
    bundle.surviving_items[e.item] = 1;
  }
  if (bundle.train.empty()) throw DataError("split left no complete users");
  return bundle;
}

std::vector<Interaction> DeriveChildSet(const SplitBundle& bundle) {
  std::vector<Interaction> child;
  for (const auto& e : bundle.train) {
    if (bundle.user_group[e.user] == AgeGroup::kChild) child.push_back(e);
  }
  if (child.empty()) throw DataError("no Child users in the training partition");
  return child;
}

SplitBundle Preprocess(const InteractionLog& log, const PreprocessOptions& options) {
  InteractionLog current = log;
  if (options.time_range) current = FilterTimeRange(current, *options.time_range);
  current = Binarize(current, options.binarize);
  current = KCore(current, options.k_user, options.k_item);
  SplitBundle bundle = Split(current, options.split);
  bundle.child_train = DeriveChildSet(bundle);
  return bundle;
}

namespace {

void WriteEvents(const std::filesystem::path& path,
                 const std::vector<Interaction>& events, const InteractionLog& log,
                 const std::string& manifest_hash) {
  auto out = OpenOutput(path);
  out << "# manifest_hash=" << manifest_hash << '\n';
  out << "user_id\titem_id\tweight\ttimestamp\tage\n";
  for (const auto& e : events) {
    out << log.users[e.user].user_id << '\t' << log.items[e.item].item_id << '\t'
        << e.weight << '\t';
    if (e.timestamp) {
      out << *e.timestamp;
    } else {
      out << '-';
    }
    out << '\t' << e.age << '\n';
  }
}

std::vector<Interaction> ReadEvents(
    const std::filesystem::path& path,
    const std::unordered_map<std::string, UserIndex>& users,
    const std::unordered_map<std::string, ItemIndex>& items) {
  const TextTable table = ReadTable(path);
  std::vector<Interaction> events;
  events.reserve(table.rows.size());
  for (const auto& row : table.rows) {
    auto u = users.find(row[0]);
    auto i = items.find(row[1]);
    auto w = ParseInt(row[2]);
    auto age = ParseInt(row[4]);
    if (u == users.end() || i == items.end() || !w || !age) {
      throw DataError(path.string() + ": row does not match the log catalogs");
    }
    Interaction e;
    e.user = u->second;
    e.item = i->second;
    e.weight = static_cast<std::uint32_t>(*w);
    if (row[3] != "-") e.timestamp = ParseInt(row[3]);
    e.age = static_cast<int>(*age);
    events.push_back(e);
  }
  return events;
}

}  // namespace

void WriteBundle(const std::filesystem::path& directory, const SplitBundle& bundle,
                 const InteractionLog& log, const PreprocessOptions& options,
                 const std::string& manifest_hash) {
  WriteEvents(directory / "train.tsv", bundle.train, log, manifest_hash);
  WriteEvents(directory / "validation.tsv", bundle.validation, log, manifest_hash);
  WriteEvents(directory / "test.tsv", bundle.test, log, manifest_hash);
  WriteEvents(directory / "child_train.tsv", bundle.child_train, log, manifest_hash);

  std::size_t child_users = 0;
  std::vector<char> child_items(bundle.num_items, 0), seen(bundle.num_users, 0);
  for (const auto& e : bundle.child_train) {
    child_items[e.item] = 1;
    if (!seen[e.user]) ++child_users;
    seen[e.user] = 1;
  }
  auto out = OpenOutput(directory / "bundle_manifest.txt");
  out << "manifest_hash=" << manifest_hash << '\n'
      << "binarize=" << options.binarize.ToString() << '\n'
      << "time_range=" << (options.time_range ? options.time_range->ToString() : "-")
      << '\n'
      << "k_user=" << options.k_user << '\n'
      << "k_item=" << options.k_item << '\n'
      << "split=" << options.split.ToString() << '\n'
      << "ratio_remainder_policy=validation-and-test-floor,train-remainder\n"
      << "train_events=" << bundle.train.size() << '\n'
      << "validation_events=" << bundle.validation.size() << '\n'
      << "test_events=" << bundle.test.size() << '\n'
      << "child_train_events=" << bundle.child_train.size() << '\n'
      << "general_users=" << bundle.SurvivingUserCount() << '\n'
      << "general_items=" << bundle.SurvivingItemCount() << '\n'
      << "child_users=" << child_users << '\n'
      << "child_items=" << std::count(child_items.begin(), child_items.end(), 1)
      << '\n';
}

SplitBundle ReadBundle(const std::filesystem::path& directory,
                       const InteractionLog& log) {
  std::unordered_map<std::string, UserIndex> users;
  std::unordered_map<std::string, ItemIndex> items;
  for (std::size_t u = 0; u < log.users.size(); ++u) {
    users.emplace(log.users[u].user_id, static_cast<UserIndex>(u));
  }
  for (std::size_t i = 0; i < log.items.size(); ++i) {
    items.emplace(log.items[i].item_id, static_cast<ItemIndex>(i));
  }
  SplitBundle bundle;
  bundle.num_users = log.users.size();
  bundle.num_items = log.items.size();
  bundle.train = ReadEvents(directory / "train.tsv", users, items);
  bundle.validation = ReadEvents(directory / "validation.tsv", users, items);
  bundle.test = ReadEvents(directory / "test.tsv", users, items);
  bundle.child_train = ReadEvents(directory / "child_train.tsv", users, items);
  bundle.surviving_users.assign(bundle.num_users, 0);
  bundle.surviving_items.assign(bundle.num_items, 0);
  bundle.user_group.resize(bundle.num_users);
  for (std::size_t u = 0; u < bundle.num_users; ++u) {
    bundle.user_group[u] = log.users[u].group;
  }
  std::vector<std::int64_t> earliest(bundle.num_users,
                                     std::numeric_limits<std::int64_t>::max());
  for (const auto* part : {&bundle.train, &bundle.validation, &bundle.test}) {
    for (const auto& e : *part) {
      bundle.surviving_users[e.user] = 1;
      bundle.surviving_items[e.item] = 1;
    }
  }
  for (const auto& e : bundle.train) {
    if (e.timestamp && *e.timestamp < earliest[e.user]) {
      earliest[e.user] = *e.timestamp;
      bundle.user_group[e.user] = AssignGroup(e.age, log.grouping);
    }
  }
  return bundle;
}

}  // namespace agerec
