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

// Rank-based significance tests, multiple-testing correction, and the
// group-comparison families run over exploration and evaluation outputs.

#ifndef AGEREC_STATS_H_
#define AGEREC_STATS_H_

#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "agerec/evaluation.h"
#include "agerec/profiles.h"

namespace agerec {

inline constexpr double kDefaultSignificance = 0.01;

struct TestResult {
  std::string family;
  std::string comparison;
  std::string test;  // "kruskal-wallis" or "mann-whitney"
  double statistic = 0.0;
  double p_value = 1.0;
  double corrected_p = 1.0;
  bool significant = false;
  std::size_t n_a = 0;
  std::size_t n_b = 0;  // total of the remaining samples for Kruskal-Wallis
  // Skipped comparisons keep p = 1 and carry the reason here.
  std::string note;
  bool skipped = false;
};

// Midranks (1-based) of `values`, in input order.
std::vector<double> Midranks(std::span<const double> values);

// H statistic with tie correction and its chi-square p-value on
// (groups - 1) degrees of freedom. Throws ValidationError for fewer than
// two samples or an empty sample.
TestResult KruskalWallis(std::span<const std::vector<double>> samples);

// Two-sided test; statistic is U of `a`. Exact when both samples have at
// most 20 values, otherwise normal with tie and continuity correction.
TestResult MannWhitneyU(std::span<const double> a, std::span<const double> b);
double MannWhitneyExactP(std::span<const double> a, std::span<const double> b);
double MannWhitneyNormalP(std::span<const double> a, std::span<const double> b);

enum class Correction { kHolm, kBonferroni, kNone };
Correction ParseCorrection(std::string_view text);
std::string_view CorrectionName(Correction method);

// Corrected p-values in input order, clipped at 1.
std::vector<double> Correct(std::span<const double> p_values, Correction method);

// Corrects the non-skipped tests of one family in place and sets
// `significant` as corrected_p < alpha.
void CorrectFamily(std::span<TestResult> family, Correction method, double alpha);

struct StatsOptions {
  Correction correction = Correction::kHolm;
  double alpha = kDefaultSignificance;
  std::size_t min_cell = 2;
};

// Kruskal-Wallis across the groups plus the three pairwise Mann-Whitney
// tests (corrected together) for one labeled set of group samples.
std::vector<TestResult> GroupFamily(const std::string& family,
                                    const std::array<std::vector<double>, 3>& samples,
                                    const StatsOptions& options);

// One family per genre over the users' (or user-years') genre shares.
std::vector<TestResult> GenreSignificance(std::span<const UserGenreProfile> ugps,
                                          const GenreVocabulary& vocabulary,
                                          const StatsOptions& options);

// One family per popularity metric.
std::vector<TestResult> PopularitySignificance(
    std::span<const PopularityProfile> profiles, const StatsOptions& options);

struct AnnotatedCell {
  std::string recommender;
  TrainingVariant variant = TrainingVariant::kGeneral;
  AgeGroup group = AgeGroup::kMainstream;
  std::string metric;
  std::optional<double> mean;
  std::size_t n = 0;
  std::string letters;    // groups this cell differs from significantly
  bool asterisk = false;  // Child-Set vs General-Set difference for Children
  bool flagged = false;   // some comparison was skipped for small cells
};

struct Annotation {
  std::vector<TestResult> tests;
  std::vector<AnnotatedCell> cells;
};

// Per (recommender, variant, metric): pairwise group tests corrected as a
// family, letters attached to both cells of each significant pair. Per
// (recommender, metric): Children's General-Set vs Child-Set values compared
// with an unpaired test, asterisk on the Child-Set Children cell.
Annotation Annotate(std::span<const GroupCell> cells,
                    std::span<const UserEvaluation> evaluations,
                    const StatsOptions& options);

void WriteSignificance(const std::filesystem::path& path,
                       std::span<const TestResult> tests, const StatsOptions& options,
                       const std::string& manifest_hash);
// Rows (recommender, variant, group, n, then one "mean letters" column per
// metric).
void WriteAnnotatedTable(const std::filesystem::path& path,
                         std::span<const AnnotatedCell> cells,
                         const std::string& manifest_hash);

}  // namespace agerec

#endif  // AGEREC_STATS_H_
