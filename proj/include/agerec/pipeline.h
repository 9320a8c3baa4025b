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

// Stage runner. Each stage reads its inputs from the run directory, writes
// its outputs under a stage subdirectory, and refuses inputs produced under
// a different manifest.
//
//   <output_dir>/manifest.ini
//   ingest/      canonical log + summary.json
//   sample/      canonical sampled log (sample.n > 0 only)
//   preprocess/  train/validation/test/child_train + bundle_manifest.txt
//   explore/     agp.tsv deviation.tsv popularity.tsv significance.tsv
//   rs/          recommendations/ tuning/ per_user_metrics.tsv group_metrics.tsv
//   stats/       significance.tsv annotated_group_metrics.tsv
//   report/      report.json

#ifndef AGEREC_PIPELINE_H_
#define AGEREC_PIPELINE_H_

#include <filesystem>
#include <string>
#include <vector>

#include "agerec/ingest.h"
#include "agerec/manifest.h"

namespace agerec {

struct ReportResult {
  std::vector<std::string> missing;  // artifact paths relative to the run dir
  std::vector<std::string> errors;   // cross-reference failures
  bool ok() const { return missing.empty() && errors.empty(); }
};

class Pipeline {
 public:
  explicit Pipeline(const Manifest& manifest);

  const RunConfig& config() const { return config_; }
  std::filesystem::path StageDir(const std::string& stage) const;

  void Ingest();
  void Sample();
  void Preprocess();
  void Explore();
  void RsExperiment();
  void Stats();
  ReportResult Report();
  // Every stage in order; returns the report.
  ReportResult RunAll();

  // The log downstream stages work on (sampled when sampling is on).
  InteractionLog WorkingLog() const;

  // Artifacts a complete run contains, relative to the run directory.
  std::vector<std::string> ExpectedArtifacts() const;

 private:
  void WriteManifestCopy() const;
  // Throws ConfigError unless `path` declares this run's manifest hash.
  void RequireHash(const std::filesystem::path& path) const;

  RunConfig config_;
};

// "# manifest_hash=..." line, "manifest_hash=..." line or a JSON
// "manifest_hash" member; empty when absent.
std::string DeclaredHash(const std::filesystem::path& path);

}  // namespace agerec

#endif  // AGEREC_PIPELINE_H_
