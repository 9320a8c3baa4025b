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

#include "agerec/stats.h"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>

#include <boost/math/distributions/chi_squared.hpp>

#include "agerec/common.h"
#include "agerec/io.h"

namespace agerec {
namespace {

constexpr std::size_t kExactLimit = 20;

// Sum over tie blocks of t^3 - t.
double TieTerm(std::vector<double> values) {
  std::sort(values.begin(), values.end());
  double term = 0.0;
  for (std::size_t i = 0; i < values.size();) {
    std::size_t j = i;
    while (j < values.size() && values[j] == values[i]) ++j;
    const double t = static_cast<double>(j - i);
    term += t * t * t - t;
    i = j;
  }
  return term;
}

double UStatistic(std::span<const double> a, std::span<const double> b) {
  std::vector<double> pooled(a.begin(), a.end());
  pooled.insert(pooled.end(), b.begin(), b.end());
  const auto ranks = Midranks(pooled);
  double rank_sum = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) rank_sum += ranks[i];
  const double na = static_cast<double>(a.size());
  return rank_sum - na * (na + 1.0) / 2.0;
}

std::string PairName(AgeGroup x, AgeGroup y) {
  return std::string(GroupName(x)) + "-" + std::string(GroupName(y));
}

constexpr std::array<std::pair<AgeGroup, AgeGroup>, 3> kPairs = {{
    {AgeGroup::kChild, AgeGroup::kMainstream},
    {AgeGroup::kChild, AgeGroup::kNma},
    {AgeGroup::kMainstream, AgeGroup::kNma},
}};

TestResult SkippedTest(const std::string& family, const std::string& comparison,
                       std::size_t n_a, std::size_t n_b, const std::string& why) {
  TestResult t;
  t.family = family;
  t.comparison = comparison;
  t.test = "mann-whitney";
  t.n_a = n_a;
  t.n_b = n_b;
  t.skipped = true;
  t.note = why;
  return t;
}

}  // namespace

std::vector<double> Midranks(std::span<const double> values) {
  std::vector<std::size_t> order(values.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t x, std::size_t y) { return values[x] < values[y]; });
  std::vector<double> ranks(values.size());
  for (std::size_t i = 0; i < order.size();) {
    std::size_t j = i;
    while (j < order.size() && values[order[j]] == values[order[i]]) ++j;
    const double mid = (static_cast<double>(i + 1) + static_cast<double>(j)) / 2.0;
    for (std::size_t k = i; k < j; ++k) ranks[order[k]] = mid;
    i = j;
  }
  return ranks;
}

TestResult KruskalWallis(std::span<const std::vector<double>> samples) {
  if (samples.size() < 2) throw ValidationError("Kruskal-Wallis needs >= 2 samples");
  std::vector<double> pooled;
  for (const auto& s : samples) {
    if (s.empty()) throw ValidationError("Kruskal-Wallis sample is empty");
    pooled.insert(pooled.end(), s.begin(), s.end());
  }
  for (double v : pooled) {
    if (std::isnan(v)) throw ValidationError("Kruskal-Wallis sample contains NaN");
  }
  const auto ranks = Midranks(pooled);
  const double n = static_cast<double>(pooled.size());
  double h = 0.0;
  std::size_t offset = 0;
  for (const auto& s : samples) {
    double r = 0.0;
    for (std::size_t i = 0; i < s.size(); ++i) r += ranks[offset + i];
    offset += s.size();
    h += r * r / static_cast<double>(s.size());
  }
  h = 12.0 / (n * (n + 1.0)) * h - 3.0 * (n + 1.0);
  const double correction = 1.0 - TieTerm(pooled) / (n * n * n - n);

  TestResult t;
  t.test = "kruskal-wallis";
  t.n_a = samples[0].size();
  t.n_b = pooled.size() - samples[0].size();
  if (correction <= 0.0) {  // every value identical
    t.statistic = 0.0;
    t.p_value = 1.0;
  } else {
    t.statistic = std::max(0.0, h / correction);
    const boost::math::chi_squared chi(static_cast<double>(samples.size() - 1));
    t.p_value = std::clamp(boost::math::cdf(boost::math::complement(chi, t.statistic)),
                           0.0, 1.0);
  }
  t.corrected_p = t.p_value;
  return t;
}

double MannWhitneyExactP(std::span<const double> a, std::span<const double> b) {
  if (a.empty() || b.empty()) throw ValidationError("Mann-Whitney sample is empty");
  std::vector<double> pooled(a.begin(), a.end());
  pooled.insert(pooled.end(), b.begin(), b.end());
  const auto ranks = Midranks(pooled);
  // Doubled midranks are integers, so rank sums can index a table.
  std::vector<int> doubled(ranks.size());
  for (std::size_t i = 0; i < ranks.size(); ++i) {
    doubled[i] = static_cast<int>(std::lround(2.0 * ranks[i]));
  }
  const std::size_t na = a.size();
  const int max_sum = std::accumulate(doubled.begin(), doubled.end(), 0);
  // ways[k][s]: subsets of size k with doubled rank sum s.
  std::vector<std::vector<double>> ways(na + 1, std::vector<double>(max_sum + 1, 0.0));
  ways[0][0] = 1.0;
  for (std::size_t idx = 0; idx < doubled.size(); ++idx) {
    const int r = doubled[idx];
    for (std::size_t k = std::min(na, idx + 1); k >= 1; --k) {
      auto& to = ways[k];
      const auto& from = ways[k - 1];
      for (int s = max_sum; s >= r; --s) to[s] += from[s - r];
    }
  }
  int observed = 0;
  for (std::size_t i = 0; i < na; ++i) observed += doubled[i];
  const double mean = static_cast<double>(na) * static_cast<double>(pooled.size() + 1);
  const double distance = std::abs(observed - mean);
  double extreme = 0.0;
  double total = 0.0;
  for (int s = 0; s <= max_sum; ++s) {
    const double w = ways[na][s];
    if (w == 0.0) continue;
    total += w;
    if (std::abs(s - mean) >= distance - 1e-9) extreme += w;
  }
  return std::min(1.0, extreme / total);
}

double MannWhitneyNormalP(std::span<const double> a, std::span<const double> b) {
  if (a.empty() || b.empty()) throw ValidationError("Mann-Whitney sample is empty");
  const double na = static_cast<double>(a.size());
  const double nb = static_cast<double>(b.size());
  const double n = na + nb;
  std::vector<double> pooled(a.begin(), a.end());
  pooled.insert(pooled.end(), b.begin(), b.end());
  const double u = UStatistic(a, b);
  const double mu = na * nb / 2.0;
  const double var = na * nb / 12.0 * ((n + 1.0) - TieTerm(pooled) / (n * (n - 1.0)));
  if (var <= 0.0) return 1.0;
  const double z = std::max(0.0, std::abs(u - mu) - 0.5) / std::sqrt(var);
  return std::min(1.0, std::erfc(z / std::sqrt(2.0)));
}

TestResult MannWhitneyU(std::span<const double> a, std::span<const double> b) {
  if (a.empty() || b.empty()) throw ValidationError("Mann-Whitney sample is empty");
  for (double v : a) {
    if (std::isnan(v)) throw ValidationError("Mann-Whitney sample contains NaN");
  }
  for (double v : b) {
    if (std::isnan(v)) throw ValidationError("Mann-Whitney sample contains NaN");
  }
  TestResult t;
  t.test = "mann-whitney";
  t.statistic = UStatistic(a, b);
  t.n_a = a.size();
  t.n_b = b.size();
  t.p_value = (a.size() <= kExactLimit && b.size() <= kExactLimit)
                  ? MannWhitneyExactP(a, b)
                  : MannWhitneyNormalP(a, b);
  t.corrected_p = t.p_value;
  return t;
}

Correction ParseCorrection(std::string_view text) {
  if (text == "holm") return Correction::kHolm;
  if (text == "bonferroni") return Correction::kBonferroni;
  if (text == "none") return Correction::kNone;
  throw ConfigError("unknown correction '" + std::string(text) + "'");
}

std::string_view CorrectionName(Correction method) {
  switch (method) {
    case Correction::kHolm:
      return "holm";
    case Correction::kBonferroni:
      return "bonferroni";
    case Correction::kNone:
      return "none";
  }
  return "?";
}

std::vector<double> Correct(std::span<const double> p_values, Correction method) {
  for (double p : p_values) {
    if (!(p >= 0.0 && p <= 1.0)) throw ValidationError("p-value outside [0, 1]");
  }
  const std::size_t m = p_values.size();
  std::vector<double> out(p_values.begin(), p_values.end());
  if (method == Correction::kNone || m == 0) return out;
  if (method == Correction::kBonferroni) {
    for (double& p : out) p = std::min(1.0, p * static_cast<double>(m));
    return out;
  }
  std::vector<std::size_t> order(m);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t x, std::size_t y) {
    return p_values[x] < p_values[y];
  });
  double running = 0.0;
  for (std::size_t j = 0; j < m; ++j) {
    const double scaled = std::min(1.0, static_cast<double>(m - j) * p_values[order[j]]);
    running = std::max(running, scaled);
    out[order[j]] = running;
  }
  return out;
}

void CorrectFamily(std::span<TestResult> family, Correction method, double alpha) {
  std::vector<double> raw;
  std::vector<TestResult*> live;
  for (TestResult& t : family) {
    if (t.skipped) {
      t.corrected_p = t.p_value;
      t.significant = false;
      continue;
    }
    raw.push_back(t.p_value);
    live.push_back(&t);
  }
  const auto corrected = Correct(raw, method);
  for (std::size_t i = 0; i < live.size(); ++i) {
    live[i]->corrected_p = corrected[i];
    live[i]->significant = corrected[i] < alpha;
  }
}

std::vector<TestResult> GroupFamily(const std::string& family,
                                    const std::array<std::vector<double>, 3>& samples,
                                    const StatsOptions& options) {
  std::vector<TestResult> out;
  std::vector<std::vector<double>> present;
  std::string labels;
  for (AgeGroup g : kAllGroups) {
    const auto& s = samples[static_cast<int>(g)];
    if (s.empty()) continue;
    present.push_back(s);
    labels += (labels.empty() ? "" : "-") + std::string(GroupName(g));
  }
  if (present.size() >= 2) {
    TestResult kw = KruskalWallis(present);
    kw.family = family;
    kw.comparison = labels;
    kw.significant = kw.p_value < options.alpha;
    out.push_back(std::move(kw));
  }
  std::vector<TestResult> pairs;
  for (const auto& [x, y] : kPairs) {
    const auto& a = samples[static_cast<int>(x)];
    const auto& b = samples[static_cast<int>(y)];
    if (a.size() < options.min_cell || b.size() < options.min_cell) {
      pairs.push_back(SkippedTest(family, PairName(x, y), a.size(), b.size(),
                                  "cell smaller than " + std::to_string(options.min_cell)));
      continue;
    }
    TestResult t = MannWhitneyU(a, b);
    t.family = family;
    t.comparison = PairName(x, y);
    pairs.push_back(std::move(t));
  }
  CorrectFamily(pairs, options.correction, options.alpha);
  out.insert(out.end(), pairs.begin(), pairs.end());
  return out;
}

std::vector<TestResult> GenreSignificance(std::span<const UserGenreProfile> ugps,
                                          const GenreVocabulary& vocabulary,
                                          const StatsOptions& options) {
  std::vector<std::vector<TestResult>> per_genre(vocabulary.size());
  ParallelFor(vocabulary.size(), [&](std::size_t g) {
    std::array<std::vector<double>, 3> samples;
    for (const UserGenreProfile& p : ugps) {
      samples[static_cast<int>(p.group)].push_back(p.distribution[g]);
    }
    per_genre[g] = GroupFamily("genre:" + vocabulary.name(g), samples, options);
  });
  std::vector<TestResult> out;
  for (auto& f : per_genre) out.insert(out.end(), f.begin(), f.end());
  return out;
}

std::vector<TestResult> PopularitySignificance(
    std::span<const PopularityProfile> profiles, const StatsOptions& options) {
  const std::array<std::string, 4> names = {"n_interactions", "profile_size",
                                            "profile_popularity",
                                            "profile_age_popularity"};
  std::vector<TestResult> out;
  for (std::size_t m = 0; m < names.size(); ++m) {
    std::array<std::vector<double>, 3> samples;
    for (const PopularityProfile& p : profiles) {
      const double v = m == 0   ? static_cast<double>(p.n_interactions)
                       : m == 1 ? static_cast<double>(p.profile_size)
                       : m == 2 ? p.profile_popularity
                                : p.profile_age_popularity;
      samples[static_cast<int>(p.group)].push_back(v);
    }
    auto family = GroupFamily("popularity:" + names[m], samples, options);
    out.insert(out.end(), family.begin(), family.end());
  }
  return out;
}

Annotation Annotate(std::span<const GroupCell> cells,
                    std::span<const UserEvaluation> evaluations,
                    const StatsOptions& options) {
  Annotation result;
  for (const GroupCell& c : cells) {
    AnnotatedCell a;
    a.recommender = c.recommender;
    a.variant = c.variant;
    a.group = c.group;
    a.metric = c.metric;
    a.mean = c.mean;
    a.n = c.n;
    result.cells.push_back(std::move(a));
  }
  auto find_cell = [&](const std::string& rec, TrainingVariant v, AgeGroup g,
                       const std::string& metric) -> AnnotatedCell* {
    for (AnnotatedCell& c : result.cells) {
      if (c.recommender == rec && c.variant == v && c.group == g && c.metric == metric) {
        return &c;
      }
    }
    return nullptr;
  };

  std::vector<std::pair<std::string, TrainingVariant>> keys;
  for (const GroupCell& c : cells) {
    const std::pair<std::string, TrainingVariant> key{c.recommender, c.variant};
    if (std::find(keys.begin(), keys.end(), key) == keys.end()) keys.push_back(key);
  }

  for (const auto& [rec, variant] : keys) {
    for (std::size_t m = 0; m < kMetricNames.size(); ++m) {
      const std::string metric(kMetricNames[m]);
      const std::string family =
          "rs:" + rec + ":" + std::string(VariantName(variant)) + ":" + metric;
      std::vector<TestResult> tests;
      for (const auto& [x, y] : kPairs) {
        const auto a = CellValues(evaluations, rec, variant, x, m);
        const auto b = CellValues(evaluations, rec, variant, y, m);
        if (a.size() < options.min_cell || b.size() < options.min_cell) {
          tests.push_back(SkippedTest(family, PairName(x, y), a.size(), b.size(),
                                      "cell smaller than " +
                                          std::to_string(options.min_cell)));
          continue;
        }
        TestResult t = MannWhitneyU(a, b);
        t.family = family;
        t.comparison = PairName(x, y);
        tests.push_back(std::move(t));
      }
      CorrectFamily(tests, options.correction, options.alpha);
      for (std::size_t k = 0; k < kPairs.size(); ++k) {
        const auto [x, y] = kPairs[k];
        AnnotatedCell* cx = find_cell(rec, variant, x, metric);
        AnnotatedCell* cy = find_cell(rec, variant, y, metric);
        if (tests[k].skipped) {
          // A pair with an empty cell (e.g. adults under the Child Set) is
          // absent rather than skipped for size.
          if (tests[k].n_a > 0 && tests[k].n_b > 0) {
            if (cx) cx->flagged = true;
            if (cy) cy->flagged = true;
          }
        } else if (tests[k].significant) {
          if (cx) cx->letters += GroupLetter(y);
          if (cy) cy->letters += GroupLetter(x);
        }
      }
      result.tests.insert(result.tests.end(), tests.begin(), tests.end());
    }
  }

  // Children's General-Set vs Child-Set comparison per (recommender, metric).
  std::vector<std::string> recs;
  for (const auto& [rec, variant] : keys) {
    if (std::find(recs.begin(), recs.end(), rec) == recs.end()) recs.push_back(rec);
  }
  for (const std::string& rec : recs) {
    const bool both =
        std::count(keys.begin(), keys.end(),
                   std::make_pair(rec, TrainingVariant::kGeneral)) > 0 &&
        std::count(keys.begin(), keys.end(),
                   std::make_pair(rec, TrainingVariant::kChild)) > 0;
    if (!both) continue;
    for (std::size_t m = 0; m < kMetricNames.size(); ++m) {
      const std::string metric(kMetricNames[m]);
      const std::string family = "rs:" + rec + ":Child-vs-General:" + metric;
      const auto general =
          CellValues(evaluations, rec, TrainingVariant::kGeneral, AgeGroup::kChild, m);
      const auto child =
          CellValues(evaluations, rec, TrainingVariant::kChild, AgeGroup::kChild, m);
      std::vector<TestResult> tests;
      if (general.size() < options.min_cell || child.size() < options.min_cell) {
        tests.push_back(SkippedTest(family, "Children:General-Child", general.size(),
                                    child.size(),
                                    "cell smaller than " +
                                        std::to_string(options.min_cell)));
      } else {
        TestResult t = MannWhitneyU(general, child);
        t.family = family;
        t.comparison = "Children:General-Child";
        tests.push_back(std::move(t));
      }
      CorrectFamily(tests, options.correction, options.alpha);
      if (AnnotatedCell* c = find_cell(rec, TrainingVariant::kChild, AgeGroup::kChild,
                                       metric)) {
        if (tests[0].skipped) c->flagged = true;
        c->asterisk = tests[0].significant;
      }
      result.tests.push_back(std::move(tests[0]));
    }
  }
  return result;
}

void WriteSignificance(const std::filesystem::path& path,
                       std::span<const TestResult> tests, const StatsOptions& options,
                       const std::string& manifest_hash) {
  TextTable out;
  out.metadata = {{"correction", std::string(CorrectionName(options.correction))},
                  {"alpha", FormatFixed(options.alpha, 4)},
                  {"min_cell", std::to_string(options.min_cell)},
                  {"manifest_hash", manifest_hash}};
  out.columns = {"family",     "comparison", "test", "statistic", "p",
                 "corrected_p", "significant", "n_a", "n_b",      "note"};
  for (const TestResult& t : tests) {
    char p[32];
    char cp[32];
    std::snprintf(p, sizeof p, "%.6e", t.p_value);
    std::snprintf(cp, sizeof cp, "%.6e", t.corrected_p);
    out.rows.push_back({t.family, t.comparison, t.test,
                        t.skipped ? "NA" : FormatFixed(t.statistic, 6),
                        t.skipped ? "NA" : p, t.skipped ? "NA" : cp,
                        t.significant ? "yes" : "no", std::to_string(t.n_a),
                        std::to_string(t.n_b), t.note.empty() ? "-" : t.note});
  }
  WriteTable(path, out);
}

void WriteAnnotatedTable(const std::filesystem::path& path,
                         std::span<const AnnotatedCell> cells,
                         const std::string& manifest_hash) {
  // Rows keyed by (recommender, variant, group) in first-appearance order.
  struct Row {
    std::string recommender;
    TrainingVariant variant;
    AgeGroup group;
    std::size_t n = 0;
    std::map<std::string, std::string> values;
  };
  std::vector<Row> rows;
  for (const AnnotatedCell& c : cells) {
    auto it = std::find_if(rows.begin(), rows.end(), [&](const Row& r) {
      return r.recommender == c.recommender && r.variant == c.variant &&
             r.group == c.group;
    });
    if (it == rows.end()) {
      rows.push_back({c.recommender, c.variant, c.group, 0, {}});
      it = rows.end() - 1;
    }
    it->n = std::max(it->n, c.n);
    std::string text = c.mean ? FormatFixed(*c.mean, 3) : "NA";
    std::string marks = c.letters + (c.asterisk ? "*" : "") + (c.flagged ? "?" : "");
    if (!marks.empty()) text += " " + marks;
    it->values[c.metric] = text;
  }
  TextTable out;
  out.metadata = {{"letters", "c=Children m=Mainstream n=NMA; *=Child vs General Set; "
                              "?=comparison skipped"},
                  {"manifest_hash", manifest_hash}};
  out.columns = {"recommender", "variant", "group", "n"};
  for (auto name : kMetricNames) out.columns.emplace_back(name);
  for (const Row& r : rows) {
    std::vector<std::string> line = {r.recommender, std::string(VariantName(r.variant)),
                                     std::string(GroupName(r.group)),
                                     std::to_string(r.n)};
    for (auto name : kMetricNames) {
      auto it = r.values.find(std::string(name));
      line.push_back(it == r.values.end() ? "NA" : it->second);
    }
    out.rows.push_back(std::move(line));
  }
  WriteTable(path, out);
}

}  // namespace agerec
