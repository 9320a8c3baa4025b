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

#include "agerec/pipeline.h"

#include <algorithm>
#include <fstream>
#include <iostream>
#include <set>
#include <unordered_map>

#include "agerec/common.h"
#include "agerec/evaluation.h"
#include "agerec/io.h"
#include "agerec/preprocess.h"
#include "agerec/profiles.h"
#include "agerec/recommenders.h"
#include "agerec/stats.h"
#include "agerec/synth.h"
#include "agerec/tuning.h"
#include "json.hpp"

namespace agerec {
namespace {

namespace fs = std::filesystem;
using Json = nlohmann::ordered_json;

constexpr const char* kBundleFiles[] = {"train.tsv", "validation.tsv", "test.tsv",
                                        "child_train.tsv", "bundle_manifest.txt"};
constexpr const char* kCanonicalFiles[] = {"events.tsv", "users.tsv", "genres.tsv",
                                           "vocabulary.txt", "summary.json"};
constexpr const char* kExploreFiles[] = {"agp.tsv", "deviation.tsv", "popularity.tsv",
                                         "significance.tsv"};

std::string RunName(ModelFamily family, TrainingVariant variant) {
  std::string name(ModelFamilyName(family));
  std::transform(name.begin(), name.end(), name.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  std::string v(VariantName(variant));
  std::transform(v.begin(), v.end(), v.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return name + "_" + v;
}

Json TableJson(const fs::path& path) {
  const TextTable table = ReadTable(path);
  Json j;
  j["metadata"] = Json::object();
  for (const auto& [k, v] : table.metadata) j["metadata"][k] = v;
  j["columns"] = table.columns;
  j["rows"] = table.rows;
  return j;
}

void WriteObjectiveTrace(const fs::path& path, const IalsRecommender& model,
                         const std::string& manifest_hash) {
  TextTable out;
  out.metadata = {{"manifest_hash", manifest_hash}};
  out.columns = {"half_sweep", "objective"};
  const auto& trace = model.objective_trace();
  for (std::size_t i = 0; i < trace.size(); ++i) {
    char buf[48];
    std::snprintf(buf, sizeof buf, "%.12g", trace[i]);
    out.rows.push_back({std::to_string(i), buf});
  }
  WriteTable(path, out);
}

}  // namespace

std::string DeclaredHash(const fs::path& path) {
  std::ifstream in(path);
  std::string line;
  for (int n = 0; n < 20 && std::getline(in, line); ++n) {
    const auto at = line.find("manifest_hash");
    if (at == std::string::npos) continue;
    std::string rest = line.substr(at + std::string("manifest_hash").size());
    std::string hex;
    for (char c : rest) {
      if (std::isxdigit(static_cast<unsigned char>(c))) {
        hex += c;
      } else if (!hex.empty()) {
        break;
      }
    }
    return hex;
  }
  return "";
}

Pipeline::Pipeline(const Manifest& manifest) : config_(ResolveConfig(manifest)) {
  SetWorkerCount(config_.workers);
}

fs::path Pipeline::StageDir(const std::string& stage) const {
  return config_.output_dir / stage;
}

void Pipeline::WriteManifestCopy() const {
  auto out = OpenOutput(config_.output_dir / "manifest.ini");
  out << "# manifest_hash=" << config_.manifest_hash << '\n' << config_.manifest_text;
}

void Pipeline::RequireHash(const fs::path& path) const {
  if (!fs::exists(path)) {
    throw DataError(path.string() + " is missing; run the producing stage first");
  }
  const std::string declared = DeclaredHash(path);
  if (declared != config_.manifest_hash) {
    throw ConfigError(path.string() + " was produced under manifest " +
                      (declared.empty() ? "<none>" : declared) + ", not " +
                      config_.manifest_hash + "; rerun the earlier stages");
  }
}

void Pipeline::Ingest() {
  InteractionLog log;
  if (config_.synthetic) {
    log = Generate(config_.synth);
  } else {
    const GenreVocabulary vocabulary = LoadVocabulary(config_.vocabulary_path);
    log = LoadLog(config_.events_path, config_.users_path, config_.genres_path,
                  vocabulary, config_.load);
  }
  WriteManifestCopy();
  WriteCanonical(log, StageDir("ingest"), config_.manifest_hash);
  const LogSummary s = Summarize(log);
  std::cout << "ingest: " << s.users << " users, " << s.items << " items, " << s.events
            << " events; Children " << FormatFixed(s.user_share_pct[0], 2)
            << "% of users, Mainstream " << FormatFixed(s.user_share_pct[1], 2) << "%\n";
}

void Pipeline::Sample() {
  WriteManifestCopy();
  if (!config_.sample) {
    std::cout << "sample: disabled (sample.n = 0); later stages read ingest/\n";
    return;
  }
  const fs::path in = StageDir("ingest");
  RequireHash(in / "summary.json");
  const InteractionLog log = LoadCanonical(in, config_.load.format, config_.load.grouping);
  const InteractionLog sampled = SampleUsers(log, *config_.sample);
  WriteCanonical(sampled, StageDir("sample"), config_.manifest_hash);
  std::cout << "sample: " << sampled.users.size() << " users, " << sampled.events.size()
            << " events\n";
}

InteractionLog Pipeline::WorkingLog() const {
  const fs::path dir = StageDir(config_.sample ? "sample" : "ingest");
  RequireHash(dir / "summary.json");
  return LoadCanonical(dir, config_.load.format, config_.load.grouping);
}

void Pipeline::Preprocess() {
  WriteManifestCopy();
  const InteractionLog log = WorkingLog();
  const SplitBundle bundle = agerec::Preprocess(log, config_.preprocess);
  WriteBundle(StageDir("preprocess"), bundle, log, config_.preprocess,
              config_.manifest_hash);
  std::cout << "preprocess: train " << bundle.train.size() << ", validation "
            << bundle.validation.size() << ", test " << bundle.test.size()
            << ", child train " << bundle.child_train.size() << " events\n";
}

void Pipeline::Explore() {
  WriteManifestCopy();
  const InteractionLog log = WorkingLog();
  const ExplorationResult result = agerec::Explore(log, config_.jsd_base);
  const fs::path dir = StageDir("explore");
  WriteAgpTable(dir / "agp.tsv", result, log.vocabulary, config_.manifest_hash);
  WriteDeviationTable(dir / "deviation.tsv", result, config_.jsd_base,
                      config_.manifest_hash);
  WritePopularityTable(dir / "popularity.tsv", result, config_.manifest_hash);
  std::vector<TestResult> tests = GenreSignificance(result.ugps, log.vocabulary, config_.stats);
  const auto pop = PopularitySignificance(result.popularity, config_.stats);
  tests.insert(tests.end(), pop.begin(), pop.end());
  WriteSignificance(dir / "significance.tsv", tests, config_.stats, config_.manifest_hash);
  for (const auto& [a, b, v] : result.apd) {
    if (a == "Children" && b == "Mainstream") {
      std::cout << "explore: APD(Children, Mainstream) = " << FormatFixed(v, 4)
                << " (JSD base " << LogBaseName(config_.jsd_base) << ")\n";
    }
  }
}

void Pipeline::RsExperiment() {
  WriteManifestCopy();
  const InteractionLog log = WorkingLog();
  const fs::path pre = StageDir("preprocess");
  for (const char* f : kBundleFiles) RequireHash(pre / f);
  const SplitBundle bundle = ReadBundle(pre, log);
  const RecommenderConfig& rc = config_.recommenders;
  const fs::path dir = StageDir("rs");

  const RelevanceIndex validation = BuildRelevance(bundle.validation, bundle.num_users);
  const ExclusionIndex train_exclusions = BuildExclusions(bundle.train, bundle.num_users);
  ExclusionIndex test_exclusions = train_exclusions;
  if (rc.exclude_validation) AddExclusions(test_exclusions, bundle.validation);
  const EvaluationContext context =
      MakeEvaluationContext(bundle, log, bundle.test, config_.jsd_base, rc.n);

  std::vector<UserEvaluation> evaluations;
  for (TrainingVariant variant : rc.variants) {
    const auto& events =
        variant == TrainingVariant::kGeneral ? bundle.train : bundle.child_train;
    if (events.empty()) {
      throw DataError(std::string(VariantName(variant)) + " training set is empty");
    }
    const auto matrix =
        std::make_shared<const TrainMatrix>(events, bundle.num_users, bundle.num_items);
    std::vector<UserIndex> tune_users;
    std::vector<UserIndex> test_users;
    for (std::size_t u = 0; u < bundle.num_users; ++u) {
      if (variant == TrainingVariant::kChild && bundle.user_group[u] != AgeGroup::kChild) {
        continue;
      }
      if (!validation[u].empty()) tune_users.push_back(static_cast<UserIndex>(u));
      if (!context.relevance[u].empty()) test_users.push_back(static_cast<UserIndex>(u));
    }

    for (ModelFamily family : rc.models) {
      const std::string name = RunName(family, variant);
      TuningTarget target;
      target.matrix = matrix;
      target.users = tune_users;
      target.exclusions = &train_exclusions;
      target.validation = &validation;
      target.n = rc.n;
      target.seed = rc.seed;
      const TuningResult tuning = Tune(family, rc.grids.at(family), target);
      WriteTuningTrace(dir / "tuning" / (name + ".tsv"), ModelFamilyName(family),
                       VariantName(variant), tuning, config_.manifest_hash);

      const auto model = TrainModel(family, matrix, tuning.best, rc.seed);
      if (const auto* ials = dynamic_cast<const IalsRecommender*>(model.get())) {
        WriteObjectiveTrace(dir / "tuning" / (name + "_objective.tsv"), *ials,
                            config_.manifest_hash);
      }
      RecommendationTable table =
          RecommendTopN(*model, test_users, test_exclusions, rc.n);
      table.variant = std::string(VariantName(variant));
      table.params = tuning.best;
      table.seed = rc.seed;
      table.exclude_validation = rc.exclude_validation;
      WriteRecommendationTable(dir / "recommendations" / (name + ".tsv"), table,
                               log.users, log.items, config_.manifest_hash);
      const auto evals = EvaluateTable(table, context, variant);
      evaluations.insert(evaluations.end(), evals.begin(), evals.end());
      std::cout << "rs-experiment: " << name << " best " << FormatParams(tuning.best)
                << " (validation nDCG " << FormatFixed(tuning.best_objective, 4) << ")\n";
    }
  }
  WritePerUserMetrics(dir / "per_user_metrics.tsv", evaluations, log.users,
                      config_.manifest_hash);
  WriteGroupMetrics(dir / "group_metrics.tsv", Aggregate(evaluations),
                    config_.manifest_hash);
}

void Pipeline::Stats() {
  WriteManifestCopy();
  const InteractionLog log = WorkingLog();
  const fs::path metrics = StageDir("rs") / "per_user_metrics.tsv";
  RequireHash(metrics);
  const auto evaluations = ReadPerUserMetrics(metrics, log);
  const auto cells = Aggregate(evaluations);
  const Annotation annotation = Annotate(cells, evaluations, config_.stats);
  const fs::path dir = StageDir("stats");
  WriteSignificance(dir / "significance.tsv", annotation.tests, config_.stats,
                    config_.manifest_hash);
  WriteAnnotatedTable(dir / "annotated_group_metrics.tsv", annotation.cells,
                      config_.manifest_hash);
  std::size_t significant = 0;
  for (const TestResult& t : annotation.tests) significant += t.significant ? 1 : 0;
  std::cout << "stats: " << annotation.tests.size() << " tests, " << significant
            << " significant at corrected p < " << config_.stats.alpha << "\n";
}

std::vector<std::string> Pipeline::ExpectedArtifacts() const {
  std::vector<std::string> out = {"manifest.ini"};
  for (const char* f : kCanonicalFiles) out.push_back(std::string("ingest/") + f);
  if (config_.sample) {
    for (const char* f : kCanonicalFiles) out.push_back(std::string("sample/") + f);
  }
  for (const char* f : kBundleFiles) out.push_back(std::string("preprocess/") + f);
  for (const char* f : kExploreFiles) out.push_back(std::string("explore/") + f);
  for (TrainingVariant v : config_.recommenders.variants) {
    for (ModelFamily m : config_.recommenders.models) {
      const std::string name = RunName(m, v);
      out.push_back("rs/recommendations/" + name + ".tsv");
      out.push_back("rs/tuning/" + name + ".tsv");
    }
  }
  out.push_back("rs/per_user_metrics.tsv");
  out.push_back("rs/group_metrics.tsv");
  out.push_back("stats/significance.tsv");
  out.push_back("stats/annotated_group_metrics.tsv");
  return out;
}

ReportResult Pipeline::Report() {
  const fs::path root = config_.output_dir;
  ReportResult result;
  Json artifacts = Json::array();
  for (const std::string& rel : ExpectedArtifacts()) {
    const fs::path path = root / rel;
    if (!fs::exists(path)) {
      result.missing.push_back(rel);
      continue;
    }
    // The manifest copy also lists run.workers and run.output_dir; its
    // digest is the manifest hash so the report does not depend on them.
    const std::string body = ReadFile(path);
    const std::string digest = rel == "manifest.ini" ? config_.manifest_hash : Sha256Hex(body);
    const std::string declared = DeclaredHash(path);
    if (declared != config_.manifest_hash) {
      result.errors.push_back(rel + " declares manifest hash '" + declared + "'");
    }
    artifacts.push_back({{"path", rel}, {"sha256", digest}});
  }

  Json tables = Json::object();
  Json summary;
  Json bundle_info = Json::object();
  if (result.missing.empty() && result.errors.empty()) {
    const InteractionLog log = WorkingLog();
    const SplitBundle bundle = ReadBundle(StageDir("preprocess"), log);
    std::unordered_map<std::string, UserIndex> user_index;
    std::unordered_map<std::string, ItemIndex> item_index;
    for (std::size_t u = 0; u < log.users.size(); ++u) {
      user_index.emplace(log.users[u].user_id, static_cast<UserIndex>(u));
    }
    for (std::size_t i = 0; i < log.items.size(); ++i) {
      item_index.emplace(log.items[i].item_id, static_cast<ItemIndex>(i));
    }
    const ExclusionIndex train = BuildExclusions(bundle.train, bundle.num_users);

    const TextTable per_user = ReadTable(StageDir("rs") / "per_user_metrics.tsv");
    const std::size_t c_user = per_user.Column("user_id");
    const std::size_t c_group = per_user.Column("group");
    for (const auto& row : per_user.rows) {
      auto it = user_index.find(row[c_user]);
      if (it == user_index.end()) {
        result.errors.push_back("per_user_metrics cites unknown user " + row[c_user]);
      } else if (row[c_group] != GroupName(bundle.user_group[it->second])) {
        result.errors.push_back("per_user_metrics gives user " + row[c_user] +
                                " group " + row[c_group]);
      }
    }
    for (TrainingVariant v : config_.recommenders.variants) {
      for (ModelFamily m : config_.recommenders.models) {
        const std::string rel = "rs/recommendations/" + RunName(m, v) + ".tsv";
        const TextTable recs = ReadTable(root / rel);
        for (const auto& row : recs.rows) {
          auto u = user_index.find(row[0]);
          auto i = item_index.find(row[2]);
          if (u == user_index.end() || i == item_index.end()) {
            result.errors.push_back(rel + " cites unknown user/item " + row[0] + "/" +
                                    row[2]);
          } else if (std::binary_search(train[u->second].begin(), train[u->second].end(),
                                        i->second)) {
            result.errors.push_back(rel + " recommends training item " + row[2] +
                                    " to user " + row[0]);
          }
        }
      }
    }

    const fs::path log_dir = StageDir(config_.sample ? "sample" : "ingest");
    summary = Json::parse(ReadFile(log_dir / "summary.json"));
    std::ifstream in(StageDir("preprocess") / "bundle_manifest.txt");
    std::string line;
    while (std::getline(in, line)) {
      const auto eq = line.find('=');
      if (eq != std::string::npos) bundle_info[line.substr(0, eq)] = line.substr(eq + 1);
    }
    for (const std::string& rel :
         {std::string("explore/agp.tsv"), std::string("explore/deviation.tsv"),
          std::string("explore/popularity.tsv"), std::string("explore/significance.tsv"),
          std::string("rs/group_metrics.tsv"), std::string("stats/significance.tsv"),
          std::string("stats/annotated_group_metrics.tsv")}) {
      tables[rel] = TableJson(root / rel);
    }
    for (TrainingVariant v : config_.recommenders.variants) {
      for (ModelFamily m : config_.recommenders.models) {
        const std::string rel = "rs/tuning/" + RunName(m, v) + ".tsv";
        tables[rel] = TableJson(root / rel);
      }
    }
  }

  Json report;
  report["format_version"] = 1;
  report["manifest_hash"] = config_.manifest_hash;
  report["status"] = result.ok() ? "ok" : "failed";
  report["missing"] = result.missing;
  report["errors"] = result.errors;
  report["manifest"] = config_.manifest_hashed_text;
  report["summary"] = summary;
  report["bundle"] = bundle_info;
  report["artifacts"] = artifacts;
  report["tables"] = tables;
  auto out = OpenOutput(StageDir("report") / "report.json");
  out << report.dump(2) << '\n';
  return result;
}

ReportResult Pipeline::RunAll() {
  Ingest();
  Sample();
  Preprocess();
  Explore();
  RsExperiment();
  Stats();
  return Report();
}

}  // namespace agerec
