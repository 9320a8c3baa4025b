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

// Ranking accuracy, genre miscalibration and popularity lift of top-N
// lists, per user and aggregated per (recommender, variant, group).

#ifndef AGEREC_EVALUATION_H_
#define AGEREC_EVALUATION_H_

#include <array>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "agerec/domain.h"
#include "agerec/ingest.h"
#include "agerec/preprocess.h"
#include "agerec/recommenders.h"

namespace agerec {

enum class TrainingVariant { kGeneral, kChild };

std::string_view VariantName(TrainingVariant variant);  // "General" / "Child"
TrainingVariant ParseVariant(std::string_view text);

// `relevant` must be sorted ascending. The ranked list is truncated at k.
double NdcgAtK(std::span<const ItemIndex> ranked,
               std::span<const ItemIndex> relevant, std::size_t k);
double MrrAtK(std::span<const ItemIndex> ranked,
              std::span<const ItemIndex> relevant, std::size_t k);
// Average precision normalized by min(k, |relevant|).
double MapAtK(std::span<const ItemIndex> ranked,
              std::span<const ItemIndex> relevant, std::size_t k);

// Unweighted mean genre vector of the recommended items; nullopt when the
// list is empty.
std::optional<GenreDistribution> RecommendationGenreProfile(
    std::span<const ItemIndex> ranked, const std::vector<ItemRecord>& items,
    std::size_t num_genres);

double GenreMiscalibration(const GenreDistribution& train_ugp,
                           const GenreDistribution& rgp, LogBase base);

// (rec_pop - profile_pop) / profile_pop. Throws ValidationError unless
// profile_pop > 0.
double PopularityLift(double profile_pop, double rec_pop);

// Per-user sorted item sets from an event partition.
using RelevanceIndex = std::vector<std::vector<ItemIndex>>;
RelevanceIndex BuildRelevance(std::span<const Interaction> events,
                              std::size_t num_users);

inline constexpr std::array<std::string_view, 5> kMetricNames = {
    "ndcg", "mrr", "map", "gmc", "pl"};

struct UserEvaluation {
  UserIndex user = 0;
  AgeGroup group = AgeGroup::kMainstream;
  std::string recommender;
  TrainingVariant variant = TrainingVariant::kGeneral;
  std::array<double, 5> metrics{};  // kMetricNames order; NaN when undefined
  bool shortfall = false;
  // No recommendations: excluded from aggregation.
  bool excluded = false;

  double ndcg() const { return metrics[0]; }
  double mrr() const { return metrics[1]; }
  double map() const { return metrics[2]; }
  double gmc() const { return metrics[3]; }
  double pl() const { return metrics[4]; }
};

// Everything per-user evaluation needs that does not depend on the model.
// Training UGPs and popularity always come from the General training set so
// lifts and miscalibration are comparable across variants.
struct EvaluationContext {
  std::size_t k = 50;
  LogBase base = LogBase::kTwo;
  std::size_t num_genres = 0;
  const std::vector<ItemRecord>* items = nullptr;
  std::vector<AgeGroup> user_group;
  RelevanceIndex relevance;
  std::vector<std::optional<GenreDistribution>> train_ugp;
  std::vector<double> item_popularity;
  std::vector<double> profile_popularity;  // NaN for users without train events
};

EvaluationContext MakeEvaluationContext(const SplitBundle& bundle,
                                        const InteractionLog& log,
                                        std::span<const Interaction> ground_truth,
                                        LogBase base, std::size_t k);

// One evaluation per list whose user has a nonempty ground-truth set.
std::vector<UserEvaluation> EvaluateTable(const RecommendationTable& table,
                                          const EvaluationContext& context,
                                          TrainingVariant variant);

// Mean nDCG@k over the users of `table` with relevant items; NaN when there
// are none.
double MeanNdcg(const RecommendationTable& table, const RelevanceIndex& relevance,
                std::size_t k);

struct GroupCell {
  std::string recommender;
  TrainingVariant variant = TrainingVariant::kGeneral;
  AgeGroup group = AgeGroup::kMainstream;
  std::string metric;
  std::optional<double> mean;  // absent for an empty cell
  std::size_t n = 0;
};

// Unweighted per-user means for every (recommender, variant, group, metric)
// present in `evaluations`. Recommender order follows first appearance;
// every group is listed, empty ones without a mean.
std::vector<GroupCell> Aggregate(std::span<const UserEvaluation> evaluations);

// Metric values of the users in one cell, skipping undefined entries.
std::vector<double> CellValues(std::span<const UserEvaluation> evaluations,
                               std::string_view recommender,
                               TrainingVariant variant, AgeGroup group,
                               std::size_t metric);

void WritePerUserMetrics(const std::filesystem::path& path,
                         std::span<const UserEvaluation> evaluations,
                         const std::vector<UserRecord>& users,
                         const std::string& manifest_hash);
std::vector<UserEvaluation> ReadPerUserMetrics(const std::filesystem::path& path,
                                               const InteractionLog& log);
void WriteGroupMetrics(const std::filesystem::path& path,
                       std::span<const GroupCell> cells,
                       const std::string& manifest_hash);

}  // namespace agerec

#endif  // AGEREC_EVALUATION_H_
