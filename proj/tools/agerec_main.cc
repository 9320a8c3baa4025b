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

// agerec: command-line driver of the audit pipeline.
//
//   agerec <stage> --config run.ini [--section.key value ...]
//
// Exit status: 0 ok, 1 data error (or incomplete report), 2 config error.

#include <iostream>
#include <map>
#include <string>

#include "CLI11.hpp"
#include "agerec/common.h"
#include "agerec/ingest.h"
#include "agerec/manifest.h"
#include "agerec/pipeline.h"
#include "agerec/synth.h"

namespace {

constexpr int kOk = 0;
constexpr int kDataError = 1;
constexpr int kConfigError = 2;

int PrintReport(const agerec::ReportResult& result, const std::filesystem::path& dir) {
  for (const auto& m : result.missing) std::cerr << "report: missing artifact " << m << '\n';
  for (const auto& e : result.errors) std::cerr << "report: " << e << '\n';
  std::cout << "report: " << (dir / "report" / "report.json").string() << " ("
            << (result.ok() ? "ok" : "failed") << ")\n";
  return result.ok() ? kOk : kDataError;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Age-group audit of recommender systems"};
  app.require_subcommand(1);
  app.fallthrough();

  std::string config_path;
  app.add_option("--config,-c", config_path, "Run manifest (INI)");
  std::map<std::string, std::string> overrides;
  for (const agerec::ManifestKey& k : agerec::ManifestKeys()) {
    const std::string dotted = std::string(k.section) + "." + std::string(k.key);
    app.add_option_function<std::string>(
           "--" + dotted, [&overrides, dotted](const std::string& v) { overrides[dotted] = v; },
           std::string(k.doc))
        ->group("Manifest overrides");
  }

  struct Command {
    const char* name;
    const char* help;
  };
  const Command commands[] = {
      {"ingest", "Load and filter the raw log; write the canonical copy"},
      {"sample", "Draw the seeded user sample (when sample.n > 0)"},
      {"preprocess", "Binarize, k-core, split and derive the Child Set"},
      {"explore", "Genre profiles, IGD/APD, popularity extension, per-genre tests"},
      {"rs-experiment", "Tune, train, recommend and evaluate all recommenders"},
      {"stats", "Significance tests and the annotated group table"},
      {"report", "Validate the run directory and write report.json"},
      {"run", "Every stage in order"},
      {"keys", "Print the manifest key reference"},
  };
  std::map<std::string, CLI::App*> subs;
  for (const Command& c : commands) subs[c.name] = app.add_subcommand(c.name, c.help);
  auto* synth = app.add_subcommand("synth", "Write a synthetic log in canonical form");
  std::string synth_out;
  synth->add_option("--out", synth_out, "Output directory")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kConfigError;
  }

  try {
    if (subs["keys"]->parsed()) {
      std::cout << agerec::ManifestKeyReference();
      return kOk;
    }
    agerec::Manifest manifest =
        config_path.empty() ? agerec::Manifest() : agerec::Manifest::Load(config_path);
    for (const auto& [key, value] : overrides) manifest.Set(key, value);

    if (synth->parsed()) {
      manifest.Set("data.source", "synth");
      const agerec::RunConfig config = agerec::ResolveConfig(manifest);
      agerec::SetWorkerCount(config.workers);
      const agerec::InteractionLog log = agerec::Generate(config.synth);
      agerec::WriteCanonical(log, synth_out, config.manifest_hash);
      std::cout << "synth: " << log.users.size() << " users, " << log.items.size()
                << " items, " << log.events.size() << " events -> " << synth_out << '\n';
      return kOk;
    }

    agerec::Pipeline pipeline(manifest);
    const auto dir = pipeline.config().output_dir;
    if (subs["ingest"]->parsed()) pipeline.Ingest();
    if (subs["sample"]->parsed()) pipeline.Sample();
    if (subs["preprocess"]->parsed()) pipeline.Preprocess();
    if (subs["explore"]->parsed()) pipeline.Explore();
    if (subs["rs-experiment"]->parsed()) pipeline.RsExperiment();
    if (subs["stats"]->parsed()) pipeline.Stats();
    if (subs["report"]->parsed()) return PrintReport(pipeline.Report(), dir);
    if (subs["run"]->parsed()) return PrintReport(pipeline.RunAll(), dir);
    return kOk;
  } catch (const agerec::ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kConfigError;
  } catch (const agerec::Error& e) {
    std::cerr << "data error: " << e.what() << '\n';
    return kDataError;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kDataError;
  }
}
