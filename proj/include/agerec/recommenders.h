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

// The four recommenders (Random, MostPop, RP3beta, iALS) and full-catalog
// top-N generation with seen-item exclusion.

#ifndef AGEREC_RECOMMENDERS_H_
#define AGEREC_RECOMMENDERS_H_

#include <cstdint>
#include <filesystem>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "agerec/domain.h"

namespace agerec {

// Binary user-item matrix over the users and items present in a training
// event set. Rows and columns are numbered in ascending catalog order, so
// comparing columns orders items by catalog index.
class TrainMatrix {
 public:
  TrainMatrix(std::span<const Interaction> events, std::size_t num_users,
              std::size_t num_items);

  std::size_t rows() const { return row_user_.size(); }
  std::size_t cols() const { return col_item_.size(); }
  std::size_t nnz() const { return row_cols_.size(); }

  UserIndex UserOfRow(std::size_t row) const { return row_user_[row]; }
  ItemIndex ItemOfCol(std::size_t col) const { return col_item_[col]; }
  std::optional<std::size_t> RowOfUser(UserIndex user) const;
  std::optional<std::size_t> ColOfItem(ItemIndex item) const;

  // Columns of `row`, ascending.
  std::span<const std::uint32_t> RowCols(std::size_t row) const {
    return {row_cols_.data() + row_ptr_[row], row_ptr_[row + 1] - row_ptr_[row]};
  }
  // Rows of `col`, ascending.
  std::span<const std::uint32_t> ColRows(std::size_t col) const {
    return {col_rows_.data() + col_ptr_[col], col_ptr_[col + 1] - col_ptr_[col]};
  }
  std::size_t RowDegree(std::size_t row) const { return RowCols(row).size(); }
  std::size_t ColDegree(std::size_t col) const { return ColRows(col).size(); }

  std::size_t num_users() const { return user_row_.size(); }
  std::size_t num_items() const { return item_col_.size(); }

 private:
  static constexpr std::uint32_t kAbsent = 0xffffffffu;
  std::vector<UserIndex> row_user_;
  std::vector<ItemIndex> col_item_;
  std::vector<std::uint32_t> user_row_;  // catalog user -> row or kAbsent
  std::vector<std::uint32_t> item_col_;  // catalog item -> col or kAbsent
  std::vector<std::size_t> row_ptr_;
  std::vector<std::uint32_t> row_cols_;
  std::vector<std::size_t> col_ptr_;
  std::vector<std::uint32_t> col_rows_;
};

enum class ModelFamily { kRandom, kMostPop, kRp3Beta, kIals };

ModelFamily ParseModelFamily(std::string_view text);
std::string_view ModelFamilyName(ModelFamily family);

// Ordered (name, value) hyperparameter assignment.
using HyperParams = std::vector<std::pair<std::string, double>>;

double GetParam(const HyperParams& params, std::string_view name);
double GetParam(const HyperParams& params, std::string_view name, double fallback);
std::string FormatParams(const HyperParams& params);

class Recommender {
 public:
  explicit Recommender(std::shared_ptr<const TrainMatrix> matrix)
      : matrix_(std::move(matrix)) {}
  virtual ~Recommender() = default;

  virtual std::string_view name() const = 0;
  // Fills `scores` (size cols()) with the score of every column for `row`.
  virtual void ScoreRow(std::size_t row, std::span<double> scores) const = 0;

  const TrainMatrix& matrix() const { return *matrix_; }

 private:
  std::shared_ptr<const TrainMatrix> matrix_;
};

// Uniform random scores from a per-user stream; top-N of them is a uniform
// sample without replacement.
class RandomRecommender : public Recommender {
 public:
  RandomRecommender(std::shared_ptr<const TrainMatrix> matrix, std::uint64_t seed)
      : Recommender(std::move(matrix)), seed_(seed) {}
  std::string_view name() const override { return "Random"; }
  void ScoreRow(std::size_t row, std::span<double> scores) const override;

 private:
  std::uint64_t seed_;
};

// Training interaction count of each item.
class MostPopRecommender : public Recommender {
 public:
  explicit MostPopRecommender(std::shared_ptr<const TrainMatrix> matrix);
  std::string_view name() const override { return "MostPop"; }
  void ScoreRow(std::size_t row, std::span<double> scores) const override;
  const std::vector<double>& counts() const { return counts_; }

 private:
  std::vector<double> counts_;
};

// Three-step random walk user -> item -> user -> item with transition
// probabilities raised to alpha and the landing item's popularity
// discounted by pop^beta:
//   score(u, j) = sum_i sum_v p(u->i)^a p(i->v)^a p(v->j)^a / pop(j)^b.
// The item-item part W(i, j) is assembled once as a sparse matrix.
class Rp3BetaRecommender : public Recommender {
 public:
  // top_k_neighbors == 0 keeps every similarity entry.
  Rp3BetaRecommender(std::shared_ptr<const TrainMatrix> matrix, double alpha,
                     double beta, std::size_t top_k_neighbors = 0);
  std::string_view name() const override { return "RP3beta"; }
  void ScoreRow(std::size_t row, std::span<double> scores) const override;

  // Similarity row i as (col, weight), ascending by col.
  std::span<const std::pair<std::uint32_t, double>> SimilarityRow(std::size_t i) const;

 private:
  double alpha_;
  std::vector<std::size_t> sim_ptr_;
  std::vector<std::pair<std::uint32_t, double>> sim_;
};

struct IalsOptions {
  int factors = 64;
  double reg = 0.01;
  double alpha = 10.0;  // confidence c = 1 + alpha * r
  int epochs = 15;
  double init_stddev = 0.1;  // divided by sqrt(factors)
};

// Implicit-feedback matrix factorization by alternating exact ridge solves:
// minimizes sum_{u,i} c_ui (p_ui - x_u.y_i)^2 + reg (|X|^2 + |Y|^2).
class IalsRecommender : public Recommender {
 public:
  IalsRecommender(std::shared_ptr<const TrainMatrix> matrix,
                  const IalsOptions& options, std::uint64_t seed);

  std::string_view name() const override { return "iALS"; }
  void ScoreRow(std::size_t row, std::span<double> scores) const override;

  // Runs options.epochs epochs (user half-sweep then item half-sweep).
  void Fit();
  void SolveUsers();
  void SolveItems();
  double Objective() const;
  // Objective after initialization and after every half-sweep.
  const std::vector<double>& objective_trace() const { return trace_; }

  const Eigen::MatrixXd& user_factors() const { return users_; }
  const Eigen::MatrixXd& item_factors() const { return items_; }
  Eigen::MatrixXd& mutable_user_factors() { return users_; }
  Eigen::MatrixXd& mutable_item_factors() { return items_; }

 private:
  IalsOptions options_;
  Eigen::MatrixXd users_;  // rows() x factors
  Eigen::MatrixXd items_;  // cols() x factors
  std::vector<double> trace_;
};

// Trains the family with `params` (names: rp3beta alpha/beta/top_k;
// ials factors/reg/alpha/epochs).
std::unique_ptr<Recommender> TrainModel(ModelFamily family,
                                        std::shared_ptr<const TrainMatrix> matrix,
                                        const HyperParams& params,
                                        std::uint64_t seed);

// Per-user sorted item lists to exclude from recommendation.
using ExclusionIndex = std::vector<std::vector<ItemIndex>>;

ExclusionIndex BuildExclusions(std::span<const Interaction> events,
                               std::size_t num_users);
void AddExclusions(ExclusionIndex& index, std::span<const Interaction> events);

struct RankedList {
  UserIndex user = 0;
  std::vector<std::pair<ItemIndex, double>> items;
  bool shortfall = false;  // fewer than n candidates were available
};

struct RecommendationTable {
  std::string recommender;
  std::string variant;
  HyperParams params;
  std::uint64_t seed = 0;
  std::size_t n = 50;
  bool exclude_validation = false;
  std::vector<RankedList> lists;
};

// The n best-scoring non-excluded columns for every user (in `users` order)
// that has a row in the model's matrix. Ties go to the smaller item index.
RecommendationTable RecommendTopN(const Recommender& model,
                                  std::span<const UserIndex> users,
                                  const ExclusionIndex& exclusions, std::size_t n);

// Rows (user_id, rank, item_id, score) with a metadata header block.
void WriteRecommendationTable(const std::filesystem::path& path,
                              const RecommendationTable& table,
                              const std::vector<UserRecord>& users,
                              const std::vector<ItemRecord>& items,
                              const std::string& manifest_hash);

}  // namespace agerec

#endif  // AGEREC_RECOMMENDERS_H_
