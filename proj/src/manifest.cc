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

#include "agerec/manifest.h"

#include <algorithm>
#include <array>
#include <cstdio>
#include <sstream>

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>
#include <openssl/evp.h>

#include "agerec/common.h"
#include "agerec/io.h"

namespace agerec {
namespace {

constexpr ManifestKey kKeys[] = {
    {"run", "output_dir", "out", "Directory receiving every stage's outputs."},
    {"run", "seed", "42", "Base seed; stage seeds left empty fall back to it."},
    {"run", "workers", "0", "Thread cap for intra-stage parallelism (0 = all cores)."},
    {"run", "jsd_base", "2", "Logarithm base of every JSD: 2 or e."},

    {"data", "source", "files", "files (read the paths below) or synth ([synth] section)."},
    {"data", "format", "rating-table", "rating-table, implicit-table or listening-events."},
    {"data", "events", "", "Events file: user, item, rating/count[, timestamp]."},
    {"data", "users", "", "Users file: user id in column 0, age in age_column."},
    {"data", "genres", "", "Item file: item id in column 0, '|'-separated genres in genre_column."},
    {"data", "vocabulary", "", "Genre vocabulary, one label per line."},
    {"data", "delimiter", "\\t", "Field delimiter of the three data files (\\t, ',', '::')."},
    {"data", "header", "false", "Whether each data file starts with a header line."},
    {"data", "strict", "false", "Abort on malformed rows instead of counting them."},
    {"data", "age_column", "1", "Column of the users file holding the age."},
    {"data", "genre_column", "1", "Column of the item file holding the genres."},
    {"data", "age_recode", "", "Coded ages mapped to years, e.g. 1:17."},

    {"grouping", "child_max", "17", "Oldest age counted as Children."},
    {"grouping", "mainstream_max", "49", "Oldest age counted as Mainstream; older is NMA."},
    {"grouping", "reference_year", "", "Year of the reported ages (listening-events only)."},

    {"sample", "n", "0", "Users to sample; 0 keeps every user."},
    {"sample", "stratify_by_age", "false", "Proportional per-age quotas."},
    {"sample", "activity_cap_sigma", "", "Exclude users above mean + sigma * stddev activity."},
    {"sample", "first_before_year", "", "Eligible users' first event is in or before this year."},
    {"sample", "last_after_year", "", "Eligible users' last event is in or after this year."},
    {"sample", "seed", "", "Sampling seed (default run.seed)."},

    {"preprocess", "binarize", "keep-all", "rating-threshold:T, min-count:C or keep-all."},
    {"preprocess", "time_range", "", "Keep events in [from, to): YYYY-MM-DD..YYYY-MM-DD."},
    {"preprocess", "k_user", "1", "k-core minimum events per user."},
    {"preprocess", "k_item", "1", "k-core minimum events per item."},
    {"preprocess", "split", "per-user-ratio", "per-user-ratio or temporal-global."},
    {"preprocess", "train_pct", "60", "Ratio split: training share in percent."},
    {"preprocess", "validation_pct", "20", "Ratio split: validation share in percent."},
    {"preprocess", "test_pct", "20", "Ratio split: test share in percent."},
    {"preprocess", "train_range", "", "Temporal split: training date range."},
    {"preprocess", "validation_range", "", "Temporal split: validation date range."},
    {"preprocess", "test_range", "", "Temporal split: test date range."},
    {"preprocess", "seed", "", "Split seed (default run.seed)."},

    {"recommenders", "models", "random,mostpop,rp3beta,ials", "Recommenders to run."},
    {"recommenders", "variants", "general,child", "Training sets: general and/or child."},
    {"recommenders", "n", "50", "List length and metric cutoff."},
    {"recommenders", "exclude_validation", "false",
     "Also exclude validation items from test-time candidates."},
    {"recommenders", "rp3beta_grid", "default", "Grid such as alpha=0.3,0.6;beta=0,0.5."},
    {"recommenders", "rp3beta_top_k", "0", "Similarity row truncation (0 = off)."},
    {"recommenders", "ials_grid", "default", "Grid over factors, reg, alpha, epochs."},
    {"recommenders", "seed", "", "Model seed (default run.seed)."},

    {"stats", "correction", "holm", "holm, bonferroni or none."},
    {"stats", "alpha", "0.01", "Significance threshold on corrected p-values."},
    {"stats", "min_cell", "2", "Smallest sample a pairwise test runs on."},

    {"synth", "users_per_group", "100,100,100", "Children, Mainstream, NMA user counts."},
    {"synth", "n_items", "200", "Catalog size."},
    {"synth", "n_genres", "5", "Genres; item i has genre i mod n_genres."},
    {"synth", "preferences", "",
     "Three ';'-separated comma lists (Children;Mainstream;NMA); empty is uniform."},
    {"synth", "concentration", "100", "Dirichlet concentration around the group vector."},
    {"synth", "zipf_s", "1", "Item popularity exponent."},
    {"synth", "events_min", "10", "Fewest distinct items per user."},
    {"synth", "events_max", "30", "Most distinct items per user."},
    {"synth", "repeat_p", "0", "Geometric repeat probability per consumed item."},
    {"synth", "seed", "", "Generator seed (default run.seed)."},
};

bool IsUnhashed(std::string_view dotted) {
  return dotted == "run.output_dir" || dotted == "run.workers";
}

std::string Dotted(std::string_view section, std::string_view key) {
  return std::string(section) + "." + std::string(key);
}

std::string TextOf(const std::map<std::string, std::string, std::less<>>& values,
                   bool hashed_only) {
  std::ostringstream out;
  std::string_view section;
  for (const ManifestKey& k : kKeys) {
    const std::string dotted = Dotted(k.section, k.key);
    if (hashed_only && IsUnhashed(dotted)) continue;
    if (k.section != section) {
      if (!section.empty()) out << '\n';
      out << '[' << k.section << "]\n";
      section = k.section;
    }
    out << k.key << " = " << values.at(dotted) << '\n';
  }
  return out.str();
}

// Typed accessors that name the offending key on failure.
class Reader {
 public:
  explicit Reader(const Manifest& m) : m_(m) {}

  const std::string& Str(std::string_view key) const { return m_.Get(key); }

  std::int64_t Int(std::string_view key) const {
    auto v = ParseInt(Trim(Str(key)));
    if (!v) Fail(key, "an integer");
    return *v;
  }
  std::optional<std::int64_t> OptInt(std::string_view key) const {
    if (Trim(Str(key)).empty()) return std::nullopt;
    return Int(key);
  }
  std::size_t Count(std::string_view key) const {
    const auto v = Int(key);
    if (v < 0) Fail(key, "a non-negative integer");
    return static_cast<std::size_t>(v);
  }
  double Real(std::string_view key) const {
    auto v = ParseDouble(Trim(Str(key)));
    if (!v) Fail(key, "a number");
    return *v;
  }
  std::optional<double> OptReal(std::string_view key) const {
    if (Trim(Str(key)).empty()) return std::nullopt;
    return Real(key);
  }
  bool Bool(std::string_view key) const {
    const std::string_view v = Trim(Str(key));
    if (v == "true" || v == "yes" || v == "1") return true;
    if (v == "false" || v == "no" || v == "0") return false;
    Fail(key, "true or false");
  }
  std::uint64_t Seed(std::string_view key, std::uint64_t fallback) const {
    const auto v = OptInt(key);
    if (!v) return fallback;
    if (*v < 0) Fail(key, "a non-negative seed");
    return static_cast<std::uint64_t>(*v);
  }
  std::vector<std::string> List(std::string_view key) const {
    std::vector<std::string> out;
    for (auto part : SplitFields(Str(key), ",")) {
      part = Trim(part);
      if (!part.empty()) out.emplace_back(part);
    }
    return out;
  }

  [[noreturn]] void Fail(std::string_view key, std::string_view expected) const {
    throw ConfigError("manifest key " + std::string(key) + " = '" + Str(key) +
                      "' is not " + std::string(expected));
  }

 private:
  const Manifest& m_;
};

std::vector<double> ParseRealList(std::string_view text, std::string_view key) {
  std::vector<double> out;
  for (auto part : SplitFields(text, ",")) {
    auto v = ParseDouble(Trim(part));
    if (!v) throw ConfigError("manifest key " + std::string(key) + " has a bad number");
    out.push_back(*v);
  }
  return out;
}

}  // namespace

std::span<const ManifestKey> ManifestKeys() { return kKeys; }

Manifest::Manifest() {
  for (const ManifestKey& k : kKeys) {
    values_[Dotted(k.section, k.key)] = std::string(k.default_value);
  }
}

Manifest Manifest::Parse(const std::string& text) {
  namespace pt = boost::property_tree;
  pt::ptree tree;
  std::istringstream in(text);
  try {
    pt::read_ini(in, tree);
  } catch (const pt::ini_parser_error& e) {
    throw ConfigError(std::string("manifest: ") + e.what());
  }
  Manifest m;
  for (const auto& [section, body] : tree) {
    if (body.empty() && !body.data().empty()) {
      throw ConfigError("manifest key '" + section + "' is outside any section");
    }
    for (const auto& [key, value] : body) {
      m.Set(section + "." + key, value.data());
    }
  }
  return m;
}

Manifest Manifest::Load(const std::filesystem::path& path) {
  if (!std::filesystem::exists(path)) {
    throw ConfigError("manifest " + path.string() + " does not exist");
  }
  return Parse(ReadFile(path));
}

void Manifest::Set(std::string_view dotted_key, const std::string& value) {
  auto it = values_.find(dotted_key);
  if (it == values_.end()) {
    throw ConfigError("unknown manifest key '" + std::string(dotted_key) + "'");
  }
  it->second = std::string(Trim(value));
}

const std::string& Manifest::Get(std::string_view dotted_key) const {
  auto it = values_.find(dotted_key);
  if (it == values_.end()) {
    throw ConfigError("unknown manifest key '" + std::string(dotted_key) + "'");
  }
  return it->second;
}

std::string Manifest::Text() const { return TextOf(values_, false); }

std::string Manifest::HashedText() const { return TextOf(values_, true); }

std::string Manifest::Hash() const { return Sha256Hex(HashedText()); }

std::string Sha256Hex(std::string_view data) {
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int length = 0;
  if (EVP_Digest(data.data(), data.size(), digest, &length, EVP_sha256(), nullptr) != 1) {
    throw Error("SHA-256 digest failed");
  }
  std::string hex;
  hex.reserve(2 * length);
  for (unsigned int i = 0; i < length; ++i) {
    char buf[3];
    std::snprintf(buf, sizeof buf, "%02x", digest[i]);
    hex += buf;
  }
  return hex;
}

RunConfig ResolveConfig(const Manifest& manifest) {
  const Reader r(manifest);
  RunConfig c;
  c.manifest_text = manifest.Text();
  c.manifest_hashed_text = manifest.HashedText();
  c.manifest_hash = manifest.Hash();

  c.output_dir = r.Str("run.output_dir");
  if (c.output_dir.empty()) throw ConfigError("run.output_dir is empty");
  c.seed = r.Seed("run.seed", 0);
  c.workers = static_cast<int>(r.Count("run.workers"));
  c.jsd_base = ParseLogBase(r.Str("run.jsd_base"));

  const std::string& source = r.Str("data.source");
  if (source != "files" && source != "synth") r.Fail("data.source", "files or synth");
  c.synthetic = source == "synth";

  AgeGrouping grouping;
  grouping.child_max = static_cast<int>(r.Int("grouping.child_max"));
  grouping.mainstream_max = static_cast<int>(r.Int("grouping.mainstream_max"));
  if (auto y = r.OptInt("grouping.reference_year")) grouping.reference_year = static_cast<int>(*y);
  grouping.Validate();

  c.load.format = ParseLogFormat(r.Str("data.format"));
  c.load.delimiter = ResolveDelimiter(r.Str("data.delimiter"));
  c.load.header = r.Bool("data.header");
  c.load.strict = r.Bool("data.strict");
  c.load.age_column = r.Count("data.age_column");
  c.load.genre_column = r.Count("data.genre_column");
  c.load.grouping = grouping;
  for (const std::string& pair : r.List("data.age_recode")) {
    const auto fields = SplitFields(pair, ":");
    auto from = fields.size() == 2 ? ParseInt(Trim(fields[0])) : std::nullopt;
    auto to = fields.size() == 2 ? ParseInt(Trim(fields[1])) : std::nullopt;
    if (!from || !to) r.Fail("data.age_recode", "a list of code:age pairs");
    c.load.age_recode[static_cast<int>(*from)] = static_cast<int>(*to);
  }
  c.events_path = r.Str("data.events");
  c.users_path = r.Str("data.users");
  c.genres_path = r.Str("data.genres");
  c.vocabulary_path = r.Str("data.vocabulary");
  if (!c.synthetic) {
    for (const char* key : {"data.events", "data.users", "data.genres", "data.vocabulary"}) {
      if (r.Str(key).empty()) throw ConfigError("manifest key " + std::string(key) + " is required");
    }
  } else {
    c.load.format = LogFormat::kImplicitTable;
    SynthSpec& s = c.synth;
    const auto counts = r.List("synth.users_per_group");
    if (counts.size() != 3) r.Fail("synth.users_per_group", "three counts");
    for (int g = 0; g < 3; ++g) {
      auto v = ParseInt(counts[g]);
      if (!v || *v < 1) r.Fail("synth.users_per_group", "three positive counts");
      s.users_per_group[g] = static_cast<std::size_t>(*v);
    }
    s.n_items = r.Count("synth.n_items");
    s.n_genres = r.Count("synth.n_genres");
    const std::string& prefs = r.Str("synth.preferences");
    if (!prefs.empty()) {
      const auto groups = SplitFields(prefs, ";");
      if (groups.size() != 3) r.Fail("synth.preferences", "three ';'-separated vectors");
      for (int g = 0; g < 3; ++g) {
        s.group_preferences[g] = ParseRealList(groups[g], "synth.preferences");
      }
    }
    s.concentration = r.Real("synth.concentration");
    s.zipf_s = r.Real("synth.zipf_s");
    s.events_min = r.Count("synth.events_min");
    s.events_max = r.Count("synth.events_max");
    s.repeat_p = r.Real("synth.repeat_p");
    s.seed = r.Seed("synth.seed", c.seed);
    s.grouping = grouping;
    s.Validate();
  }

  if (const std::size_t n = r.Count("sample.n"); n > 0) {
    SampleOptions s;
    s.n = n;
    s.seed = r.Seed("sample.seed", c.seed);
    s.stratify_by_age = r.Bool("sample.stratify_by_age");
    s.activity_cap_sigma = r.OptReal("sample.activity_cap_sigma");
    if (auto y = r.OptInt("sample.first_before_year")) s.first_before_year = static_cast<int>(*y);
    if (auto y = r.OptInt("sample.last_after_year")) s.last_after_year = static_cast<int>(*y);
    c.sample = s;
  }

  PreprocessOptions& p = c.preprocess;
  p.binarize = BinarizeMode::Parse(r.Str("preprocess.binarize"));
  if (!r.Str("preprocess.time_range").empty()) {
    p.time_range = TimeRange::Parse(r.Str("preprocess.time_range"));
  }
  p.k_user = r.Count("preprocess.k_user");
  p.k_item = r.Count("preprocess.k_item");
  const std::string& split = r.Str("preprocess.split");
  if (split == "per-user-ratio") {
    p.split.kind = SplitStrategy::Kind::kPerUserRatio;
  } else if (split == "temporal-global") {
    p.split.kind = SplitStrategy::Kind::kTemporalGlobal;
    for (const char* key : {"preprocess.train_range", "preprocess.validation_range",
                            "preprocess.test_range"}) {
      if (r.Str(key).empty()) throw ConfigError(std::string(key) + " is required");
    }
    p.split.train_range = TimeRange::Parse(r.Str("preprocess.train_range"));
    p.split.validation_range = TimeRange::Parse(r.Str("preprocess.validation_range"));
    p.split.test_range = TimeRange::Parse(r.Str("preprocess.test_range"));
  } else {
    r.Fail("preprocess.split", "per-user-ratio or temporal-global");
  }
  p.split.train_pct = r.Real("preprocess.train_pct");
  p.split.validation_pct = r.Real("preprocess.validation_pct");
  p.split.test_pct = r.Real("preprocess.test_pct");
  p.split.seed = r.Seed("preprocess.seed", c.seed);
  p.split.Validate();

  RecommenderConfig& rc = c.recommenders;
  for (const std::string& m : r.List("recommenders.models")) {
    const ModelFamily family = ParseModelFamily(m);
    if (std::find(rc.models.begin(), rc.models.end(), family) != rc.models.end()) {
      r.Fail("recommenders.models", "free of duplicates");
    }
    rc.models.push_back(family);
  }
  for (const std::string& v : r.List("recommenders.variants")) {
    const TrainingVariant variant = ParseVariant(v);
    if (std::find(rc.variants.begin(), rc.variants.end(), variant) != rc.variants.end()) {
      r.Fail("recommenders.variants", "free of duplicates");
    }
    rc.variants.push_back(variant);
  }
  rc.n = r.Count("recommenders.n");
  if (rc.n == 0) r.Fail("recommenders.n", "positive");
  rc.exclude_validation = r.Bool("recommenders.exclude_validation");
  rc.seed = r.Seed("recommenders.seed", c.seed);
  for (ModelFamily family : {ModelFamily::kRandom, ModelFamily::kMostPop}) {
    rc.grids[family] = {};
  }
  const std::string& rp3 = r.Str("recommenders.rp3beta_grid");
  rc.grids[ModelFamily::kRp3Beta] =
      rp3 == "default" ? DefaultGrid(ModelFamily::kRp3Beta) : ParseGrid(rp3);
  if (const std::size_t top_k = r.Count("recommenders.rp3beta_top_k"); top_k > 0) {
    rc.grids[ModelFamily::kRp3Beta].push_back({"top_k", {static_cast<double>(top_k)}});
  }
  const std::string& ials = r.Str("recommenders.ials_grid");
  rc.grids[ModelFamily::kIals] =
      ials == "default" ? DefaultGrid(ModelFamily::kIals) : ParseGrid(ials);
  const auto check_axes = [&](ModelFamily family, std::vector<std::string_view> allowed,
                              std::vector<std::string_view> required, const char* key) {
    for (const GridAxis& axis : rc.grids[family]) {
      if (std::find(allowed.begin(), allowed.end(), axis.name) == allowed.end()) {
        throw ConfigError(std::string(key) + " has unknown axis '" + axis.name + "'");
      }
    }
    for (std::string_view name : required) {
      bool found = false;
      for (const GridAxis& axis : rc.grids[family]) found |= axis.name == name;
      if (!found) {
        throw ConfigError(std::string(key) + " lacks axis '" + std::string(name) + "'");
      }
    }
  };
  check_axes(ModelFamily::kRp3Beta, {"alpha", "beta", "top_k"}, {"alpha", "beta"},
             "recommenders.rp3beta_grid");
  check_axes(ModelFamily::kIals, {"factors", "reg", "alpha", "epochs"},
             {"factors", "reg", "alpha"}, "recommenders.ials_grid");

  c.stats.correction = ParseCorrection(r.Str("stats.correction"));
  c.stats.alpha = r.Real("stats.alpha");
  if (!(c.stats.alpha > 0.0 && c.stats.alpha < 1.0)) r.Fail("stats.alpha", "in (0, 1)");
  c.stats.min_cell = r.Count("stats.min_cell");
  if (c.stats.min_cell < 1) r.Fail("stats.min_cell", "at least 1");
  return c;
}

std::string ManifestKeyReference() {
  std::ostringstream out;
  std::string_view section;
  for (const ManifestKey& k : kKeys) {
    if (k.section != section) {
      out << (section.empty() ? "" : "\n") << "## [" << k.section << "]\n\n"
          << "| key | default | meaning |\n|---|---|---|\n";
      section = k.section;
    }
    std::string doc;
    for (char ch : k.doc) {
      if (ch == '|') doc += '\\';
      doc += ch;
    }
    out << "| `" << k.key << "` | "
        << (k.default_value.empty() ? std::string("(empty)")
                                    : "`" + std::string(k.default_value) + "`")
        << " | " << doc << " |\n";
  }
  return out.str();
}

}  // namespace agerec
