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

#include "agerec/evaluation.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <unordered_map>

#include "agerec/common.h"
#include "agerec/io.h"
#include "agerec/profiles.h"

namespace agerec {
namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

bool IsRelevant(std::span<const ItemIndex> relevant, ItemIndex item) {
  return std::binary_search(relevant.begin(), relevant.end(), item);
}

std::string FormatMetric(double value) {
  return std::isnan(value) ? "NA" : FormatFixed(value, 9);
}

double ParseMetric(const std::string& text) {
  if (text == "NA") return kNaN;
  auto v = ParseDouble(text);
  if (!v) throw DataError("bad metric value '" + text + "'");
  return *v;
}

}  // namespace

std::string_view VariantName(TrainingVariant variant) {
  return variant == TrainingVariant::kGeneral ? "General" : "Child";
}

TrainingVariant ParseVariant(std::string_view text) {
  if (text == "General" || text == "general") return TrainingVariant::kGeneral;
  if (text == "Child" || text == "child") return TrainingVariant::kChild;
  throw ConfigError("unknown training variant '" + std::string(text) + "'");
}

double NdcgAtK(std::span<const ItemIndex> ranked,
               std::span<const ItemIndex> relevant, std::size_t k) {
  if (relevant.empty()) throw ValidationError("nDCG needs a nonempty relevant set");
  const std::size_t depth = std::min(k, ranked.size());
  double dcg = 0.0;
  for (std::size_t r = 0; r < depth; ++r) {
    if (IsRelevant(relevant, ranked[r])) dcg += 1.0 / std::log2(static_cast<double>(r) + 2.0);
  }
  double idcg = 0.0;
  const std::size_t ideal = std::min(k, relevant.size());
  for (std::size_t r = 0; r < ideal; ++r) idcg += 1.0 / std::log2(static_cast<double>(r) + 2.0);
  return dcg / idcg;
}

double MrrAtK(std::span<const ItemIndex> ranked,
              std::span<const ItemIndex> relevant, std::size_t k) {
  if (relevant.empty()) throw ValidationError("MRR needs a nonempty relevant set");
  const std::size_t depth = std::min(k, ranked.size());
  for (std::size_t r = 0; r < depth; ++r) {
    if (IsRelevant(relevant, ranked[r])) return 1.0 / static_cast<double>(r + 1);
  }
  return 0.0;
}

double MapAtK(std::span<const ItemIndex> ranked,
              std::span<const ItemIndex> relevant, std::size_t k) {
  if (relevant.empty()) throw ValidationError("MAP needs a nonempty relevant set");
  const std::size_t depth = std::min(k, ranked.size());
  double sum = 0.0;
  std::size_t hits = 0;
  for (std::size_t r = 0; r < depth; ++r) {
    if (IsRelevant(relevant, ranked[r])) {
      ++hits;
      sum += static_cast<double>(hits) / static_cast<double>(r + 1);
    }
  }
  return sum / static_cast<double>(std::min(k, relevant.size()));
}

std::optional<GenreDistribution> RecommendationGenreProfile(
    std::span<const ItemIndex> ranked, const std::vector<ItemRecord>& items,
    std::size_t num_genres) {
  if (ranked.empty()) return std::nullopt;
  std::vector<double> mean(num_genres, 0.0);
  for (ItemIndex i : ranked) {
    const auto& w = items[i].genres.weights();
    if (w.size() != num_genres) throw ConfigError("genre dimension mismatch");
    for (std::size_t g = 0; g < num_genres; ++g) mean[g] += w[g];
  }
  for (double& m : mean) m /= static_cast<double>(ranked.size());
  return GenreDistribution(std::move(mean));
}

double GenreMiscalibration(const GenreDistribution& train_ugp,
                           const GenreDistribution& rgp, LogBase base) {
  return Jsd(train_ugp, rgp, base);
}

double PopularityLift(double profile_pop, double rec_pop) {
  if (!(profile_pop > 0.0)) {
    throw ValidationError("popularity lift needs a positive profile popularity");
  }
  return (rec_pop - profile_pop) / profile_pop;
}

RelevanceIndex BuildRelevance(std::span<const Interaction> events,
                              std::size_t num_users) {
  RelevanceIndex index(num_users);
  for (const Interaction& e : events) index.at(e.user).push_back(e.item);
  for (auto& items : index) {
    std::sort(items.begin(), items.end());
    items.erase(std::unique(items.begin(), items.end()), items.end());
  }
  return index;
}

EvaluationContext MakeEvaluationContext(const SplitBundle& bundle,
                                        const InteractionLog& log,
                                        std::span<const Interaction> ground_truth,
                                        LogBase base, std::size_t k) {
  EvaluationContext ctx;
  ctx.k = k;
  ctx.base = base;
  ctx.num_genres = log.vocabulary.size();
  ctx.items = &log.items;
  ctx.user_group = bundle.user_group;
  ctx.relevance = BuildRelevance(ground_truth, bundle.num_users);
  ctx.train_ugp = UgpsFromEvents(bundle.train, log.items, bundle.num_users,
                                 ctx.num_genres);
  ctx.item_popularity = ItemPopularity(bundle.train, bundle.num_items);
  const RelevanceIndex profiles = BuildRelevance(bundle.train, bundle.num_users);
  ctx.profile_popularity.assign(bundle.num_users, kNaN);
  for (std::size_t u = 0; u < bundle.num_users; ++u) {
    if (profiles[u].empty()) continue;
    double sum = 0.0;
    for (ItemIndex i : profiles[u]) sum += ctx.item_popularity[i];
    ctx.profile_popularity[u] = sum / static_cast<double>(profiles[u].size());
  }
  return ctx;
}

std::vector<UserEvaluation> EvaluateTable(const RecommendationTable& table,
                                          const EvaluationContext& ctx,
                                          TrainingVariant variant) {
  std::vector<const RankedList*> lists;
  for (const RankedList& list : table.lists) {
    if (list.user < ctx.relevance.size() && !ctx.relevance[list.user].empty()) {
      lists.push_back(&list);
    }
  }
  std::vector<UserEvaluation> out(lists.size());
  ParallelFor(lists.size(), [&](std::size_t k) {
    const RankedList& list = *lists[k];
    std::vector<ItemIndex> ranked;
    ranked.reserve(list.items.size());
    for (const auto& [item, score] : list.items) ranked.push_back(item);
    if (ranked.size() > ctx.k) ranked.resize(ctx.k);
    const auto& relevant = ctx.relevance[list.user];

    UserEvaluation& ev = out[k];
    ev.user = list.user;
    ev.group = ctx.user_group.at(list.user);
    ev.recommender = table.recommender;
    ev.variant = variant;
    ev.shortfall = list.shortfall;
    ev.metrics = {NdcgAtK(ranked, relevant, ctx.k), MrrAtK(ranked, relevant, ctx.k),
                  MapAtK(ranked, relevant, ctx.k), kNaN, kNaN};
    const auto rgp = RecommendationGenreProfile(ranked, *ctx.items, ctx.num_genres);
    if (!rgp) {
      ev.excluded = true;
      return;
    }
    const auto& ugp = ctx.train_ugp.at(list.user);
    if (!ugp) throw ValidationError("evaluated user has no training profile");
    ev.metrics[3] = GenreMiscalibration(*ugp, *rgp, ctx.base);
    double rec_pop = 0.0;
    for (ItemIndex i : ranked) rec_pop += ctx.item_popularity[i];
    rec_pop /= static_cast<double>(ranked.size());
    ev.metrics[4] = PopularityLift(ctx.profile_popularity[list.user], rec_pop);
  });
  return out;
}

double MeanNdcg(const RecommendationTable& table, const RelevanceIndex& relevance,
                std::size_t k) {
  double sum = 0.0;
  std::size_t n = 0;
  std::vector<ItemIndex> ranked;
  for (const RankedList& list : table.lists) {
    if (list.user >= relevance.size() || relevance[list.user].empty()) continue;
    ranked.clear();
    for (const auto& [item, score] : list.items) ranked.push_back(item);
    sum += NdcgAtK(ranked, relevance[list.user], k);
    ++n;
  }
  return n == 0 ? kNaN : sum / static_cast<double>(n);
}

std::vector<GroupCell> Aggregate(std::span<const UserEvaluation> evaluations) {
  std::vector<std::pair<std::string, TrainingVariant>> keys;
  for (const UserEvaluation& ev : evaluations) {
    const std::pair<std::string, TrainingVariant> key{ev.recommender, ev.variant};
    if (std::find(keys.begin(), keys.end(), key) == keys.end()) keys.push_back(key);
  }
  std::vector<GroupCell> cells;
  for (const auto& [rec, variant] : keys) {
    for (AgeGroup group : kAllGroups) {
      for (std::size_t m = 0; m < kMetricNames.size(); ++m) {
        const auto values = CellValues(evaluations, rec, variant, group, m);
        GroupCell cell;
        cell.recommender = rec;
        cell.variant = variant;
        cell.group = group;
        cell.metric = std::string(kMetricNames[m]);
        cell.n = values.size();
        if (!values.empty()) {
          double sum = 0.0;
          for (double v : values) sum += v;
          cell.mean = sum / static_cast<double>(values.size());
        }
        cells.push_back(std::move(cell));
      }
    }
  }
  return cells;
}

std::vector<double> CellValues(std::span<const UserEvaluation> evaluations,
                               std::string_view recommender,
                               TrainingVariant variant, AgeGroup group,
                               std::size_t metric) {
  // Sorted by user so the result (and any sum over it) is independent of
  // the input order.
  std::vector<std::pair<UserIndex, double>> picked;
  for (const UserEvaluation& ev : evaluations) {
    if (ev.excluded || ev.recommender != recommender || ev.variant != variant ||
        ev.group != group || std::isnan(ev.metrics[metric])) {
      continue;
    }
    picked.emplace_back(ev.user, ev.metrics[metric]);
  }
  std::sort(picked.begin(), picked.end());
  std::vector<double> values;
  values.reserve(picked.size());
  for (const auto& [user, v] : picked) values.push_back(v);
  return values;
}

void WritePerUserMetrics(const std::filesystem::path& path,
                         std::span<const UserEvaluation> evaluations,
                         const std::vector<UserRecord>& users,
                         const std::string& manifest_hash) {
  TextTable out;
  out.metadata = {{"manifest_hash", manifest_hash}};
  out.columns = {"user_id", "group", "recommender", "variant", "ndcg", "mrr",
                 "map", "gmc", "pl", "flag"};
  for (const UserEvaluation& ev : evaluations) {
    std::vector<std::string> row = {users.at(ev.user).user_id,
                                    std::string(GroupName(ev.group)), ev.recommender,
                                    std::string(VariantName(ev.variant))};
    for (double v : ev.metrics) row.push_back(FormatMetric(v));
    row.push_back(ev.excluded ? "no_recommendations" : ev.shortfall ? "shortfall" : "-");
    out.rows.push_back(std::move(row));
  }
  WriteTable(path, out);
}

std::vector<UserEvaluation> ReadPerUserMetrics(const std::filesystem::path& path,
                                               const InteractionLog& log) {
  const TextTable table = ReadTable(path);
  std::unordered_map<std::string, UserIndex> index;
  for (std::size_t u = 0; u < log.users.size(); ++u) {
    index.emplace(log.users[u].user_id, static_cast<UserIndex>(u));
  }
  const std::size_t c_user = table.Column("user_id");
  const std::size_t c_group = table.Column("group");
  const std::size_t c_rec = table.Column("recommender");
  const std::size_t c_var = table.Column("variant");
  const std::size_t c_flag = table.Column("flag");
  std::array<std::size_t, 5> c_metric{};
  for (std::size_t m = 0; m < kMetricNames.size(); ++m) {
    c_metric[m] = table.Column(kMetricNames[m]);
  }
  std::vector<UserEvaluation> out;
  out.reserve(table.rows.size());
  for (const auto& row : table.rows) {
    auto it = index.find(row[c_user]);
    if (it == index.end()) {
      throw DataError("per-user metrics cite unknown user '" + row[c_user] + "'");
    }
    UserEvaluation ev;
    ev.user = it->second;
    ev.group = ParseGroup(row[c_group]);
    ev.recommender = row[c_rec];
    ev.variant = ParseVariant(row[c_var]);
    for (std::size_t m = 0; m < kMetricNames.size(); ++m) {
      ev.metrics[m] = ParseMetric(row[c_metric[m]]);
    }
    ev.excluded = row[c_flag] == "no_recommendations";
    ev.shortfall = row[c_flag] == "shortfall";
    out.push_back(std::move(ev));
  }
  return out;
}

void WriteGroupMetrics(const std::filesystem::path& path,
                       std::span<const GroupCell> cells,
                       const std::string& manifest_hash) {
  TextTable out;
  out.metadata = {{"manifest_hash", manifest_hash}};
  out.columns = {"recommender", "variant", "group", "metric", "mean", "n"};
  for (const GroupCell& cell : cells) {
    out.rows.push_back({cell.recommender, std::string(VariantName(cell.variant)),
                        std::string(GroupName(cell.group)), cell.metric,
                        cell.mean ? FormatFixed(*cell.mean, 6) : "NA",
                        std::to_string(cell.n)});
  }
  WriteTable(path, out);
}

}  // namespace agerec
