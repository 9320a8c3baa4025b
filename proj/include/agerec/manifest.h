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

// The run manifest: an INI file with one section per stage. Every key has a
// default, the resolved copy lists them all, and its hash identifies every
// artifact of the run.

#ifndef AGEREC_MANIFEST_H_
#define AGEREC_MANIFEST_H_

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "agerec/evaluation.h"
#include "agerec/ingest.h"
#include "agerec/preprocess.h"
#include "agerec/recommenders.h"
#include "agerec/stats.h"
#include "agerec/synth.h"
#include "agerec/tuning.h"

namespace agerec {

struct ManifestKey {
  std::string_view section;
  std::string_view key;
  std::string_view default_value;
  std::string_view doc;
};

// Every recognized key in output order.
std::span<const ManifestKey> ManifestKeys();

class Manifest {
 public:
  // All keys at their defaults.
  Manifest();

  static Manifest Parse(const std::string& text);
  static Manifest Load(const std::filesystem::path& path);

  // Throws ConfigError for an unknown "section.key".
  void Set(std::string_view dotted_key, const std::string& value);
  const std::string& Get(std::string_view dotted_key) const;

  // Resolved INI text listing every key.
  std::string Text() const;
  // Resolved text without the keys that do not affect results.
  std::string HashedText() const;
  // SHA-256 of the resolved text without run.output_dir and run.workers,
  // which do not affect results.
  std::string Hash() const;

 private:
  std::map<std::string, std::string, std::less<>> values_;
};

// Lowercase hex SHA-256 digest.
std::string Sha256Hex(std::string_view data);

struct RecommenderConfig {
  std::vector<ModelFamily> models;
  std::vector<TrainingVariant> variants;
  std::size_t n = 50;
  bool exclude_validation = false;
  std::map<ModelFamily, Grid> grids;
  std::uint64_t seed = 0;
};

// Typed view of a manifest; construction validates every value.
struct RunConfig {
  std::filesystem::path output_dir;
  std::uint64_t seed = 0;
  int workers = 0;
  LogBase jsd_base = LogBase::kTwo;

  bool synthetic = false;
  SynthSpec synth;
  std::filesystem::path events_path;
  std::filesystem::path users_path;
  std::filesystem::path genres_path;
  std::filesystem::path vocabulary_path;
  LoadOptions load;

  std::optional<SampleOptions> sample;
  PreprocessOptions preprocess;
  RecommenderConfig recommenders;
  StatsOptions stats;

  std::string manifest_text;
  std::string manifest_hashed_text;
  std::string manifest_hash;
};

RunConfig ResolveConfig(const Manifest& manifest);

// Markdown reference of every manifest key.
std::string ManifestKeyReference();

}  // namespace agerec

#endif  // AGEREC_MANIFEST_H_
