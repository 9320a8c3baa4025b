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

// Exhaustive grid search of recommender hyperparameters against validation
// nDCG.

#ifndef AGEREC_TUNING_H_
#define AGEREC_TUNING_H_

#include <filesystem>
#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "agerec/evaluation.h"
#include "agerec/recommenders.h"

namespace agerec {

struct GridAxis {
  std::string name;
  std::vector<double> values;
};

// Axes in significance order: points enumerate with the first axis varying
// slowest, which is also the tie-breaking order.
using Grid = std::vector<GridAxis>;

// Parses "alpha=0.3,0.6;beta=0,0.2". An empty string is the empty grid.
Grid ParseGrid(std::string_view text);
std::string FormatGrid(const Grid& grid);

Grid DefaultGrid(ModelFamily family);

// Every point of the lattice; the empty grid has one empty point.
std::vector<HyperParams> EnumerateGrid(const Grid& grid);

struct TuningPoint {
  HyperParams params;
  double objective = 0.0;  // NaN when skipped
  bool skipped = false;
};

struct TuningResult {
  HyperParams best;
  double best_objective = 0.0;
  std::vector<TuningPoint> trace;
};

struct TuningTarget {
  std::shared_ptr<const TrainMatrix> matrix;
  std::span<const UserIndex> users;  // users scored on validation
  const ExclusionIndex* exclusions = nullptr;
  const RelevanceIndex* validation = nullptr;
  std::size_t n = 50;
  std::uint64_t seed = 0;
};

// Trains and scores every grid point; the best mean validation nDCG@n wins,
// ties going to the earliest point. Points with an undefined objective are
// skipped. Throws DataError when every point is skipped.
TuningResult Tune(ModelFamily family, const Grid& grid, const TuningTarget& target);

void WriteTuningTrace(const std::filesystem::path& path, std::string_view recommender,
                      std::string_view variant, const TuningResult& result,
                      const std::string& manifest_hash);

}  // namespace agerec

#endif  // AGEREC_TUNING_H_
