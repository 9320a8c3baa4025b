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

#include "agerec/tuning.h"

#include <cmath>
#include <cstdio>
#include <iostream>

#include "agerec/common.h"
#include "agerec/io.h"

namespace agerec {

Grid ParseGrid(std::string_view text) {
  Grid grid;
  if (Trim(text).empty()) return grid;
  for (std::string_view part : SplitFields(text, ";")) {
    part = Trim(part);
    if (part.empty()) continue;
    const auto eq = part.find('=');
    if (eq == std::string_view::npos) {
      throw ConfigError("grid axis '" + std::string(part) + "' lacks '='");
    }
    GridAxis axis;
    axis.name = std::string(Trim(part.substr(0, eq)));
    for (std::string_view v : SplitFields(part.substr(eq + 1), ",")) {
      auto value = ParseDouble(Trim(v));
      if (!value) throw ConfigError("bad grid value '" + std::string(v) + "'");
      axis.values.push_back(*value);
    }
    if (axis.name.empty() || axis.values.empty()) {
      throw ConfigError("empty grid axis in '" + std::string(text) + "'");
    }
    for (const GridAxis& other : grid) {
      if (other.name == axis.name) throw ConfigError("duplicate grid axis " + axis.name);
    }
    grid.push_back(std::move(axis));
  }
  return grid;
}

std::string FormatGrid(const Grid& grid) {
  std::string out;
  for (const GridAxis& axis : grid) {
    if (!out.empty()) out += ';';
    out += axis.name + '=';
    for (std::size_t i = 0; i < axis.values.size(); ++i) {
      char buf[64];
      std::snprintf(buf, sizeof buf, "%.10g", axis.values[i]);
      if (i > 0) out += ',';
      out += buf;
    }
  }
  return out;
}

Grid DefaultGrid(ModelFamily family) {
  switch (family) {
    case ModelFamily::kRandom:
    case ModelFamily::kMostPop:
      return {};
    case ModelFamily::kRp3Beta:
      return {{"alpha", {0.3, 0.6, 0.9, 1.2, 1.5}},
              {"beta", {0.0, 0.2, 0.4, 0.6, 0.8, 1.0}}};
    case ModelFamily::kIals:
      return {{"factors", {32, 64, 128}},
              {"reg", {1e-3, 1e-2, 1e-1}},
              {"alpha", {1, 10, 40}},
              {"epochs", {15}}};
  }
  return {};
}

std::vector<HyperParams> EnumerateGrid(const Grid& grid) {
  std::vector<HyperParams> points = {{}};
  for (const GridAxis& axis : grid) {
    std::vector<HyperParams> next;
    next.reserve(points.size() * axis.values.size());
    for (const HyperParams& p : points) {
      for (double v : axis.values) {
        HyperParams q = p;
        q.emplace_back(axis.name, v);
        next.push_back(std::move(q));
      }
    }
    points = std::move(next);
  }
  return points;
}

TuningResult Tune(ModelFamily family, const Grid& grid, const TuningTarget& target) {
  if (!target.matrix || !target.exclusions || !target.validation) {
    throw ConfigError("incomplete tuning target");
  }
  TuningResult result;
  bool found = false;
  for (const HyperParams& params : EnumerateGrid(grid)) {
    TuningPoint point;
    point.params = params;
    const auto model = TrainModel(family, target.matrix, params, target.seed);
    const auto table = RecommendTopN(*model, target.users, *target.exclusions, target.n);
    point.objective = MeanNdcg(table, *target.validation, target.n);
    if (std::isnan(point.objective)) {
      point.skipped = true;
      std::cerr << "tuning: " << ModelFamilyName(family) << " "
                << FormatParams(params) << " has no defined objective; skipped\n";
    } else if (!found || point.objective > result.best_objective) {
      found = true;
      result.best = params;
      result.best_objective = point.objective;
    }
    result.trace.push_back(std::move(point));
  }
  if (!found) {
    throw DataError("no grid point of " + std::string(ModelFamilyName(family)) +
                    " yielded a validation objective");
  }
  return result;
}

void WriteTuningTrace(const std::filesystem::path& path, std::string_view recommender,
                      std::string_view variant, const TuningResult& result,
                      const std::string& manifest_hash) {
  TextTable out;
  out.metadata = {{"recommender", std::string(recommender)},
                  {"variant", std::string(variant)},
                  {"objective", "validation_ndcg"},
                  {"best", FormatParams(result.best)},
                  {"manifest_hash", manifest_hash}};
  out.columns = {"point", "params", "objective", "status"};
  for (std::size_t i = 0; i < result.trace.size(); ++i) {
    const TuningPoint& p = result.trace[i];
    out.rows.push_back({std::to_string(i), FormatParams(p.params),
                        p.skipped ? "NA" : FormatFixed(p.objective, 9),
                        p.skipped ? "skipped" : "ok"});
  }
  WriteTable(path, out);
}

}  // namespace agerec
