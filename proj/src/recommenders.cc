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

#include "agerec/recommenders.h"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <random>

#include "agerec/common.h"
#include "agerec/io.h"

namespace agerec {

TrainMatrix::TrainMatrix(std::span<const Interaction> events,
                         std::size_t num_users, std::size_t num_items)
    : user_row_(num_users, kAbsent), item_col_(num_items, kAbsent) {
  std::vector<std::pair<UserIndex, ItemIndex>> pairs;
  pairs.reserve(events.size());
  for (const Interaction& e : events) {
    if (e.user >= num_users || e.item >= num_items) {
      throw ValidationError("training event outside the catalog");
    }
    pairs.emplace_back(e.user, e.item);
  }
  std::sort(pairs.begin(), pairs.end());
  pairs.erase(std::unique(pairs.begin(), pairs.end()), pairs.end());

  for (const auto& [u, i] : pairs) {
    user_row_[u] = 0;
    item_col_[i] = 0;
  }
  for (std::size_t u = 0; u < num_users; ++u) {
    if (user_row_[u] != kAbsent) {
      user_row_[u] = static_cast<std::uint32_t>(row_user_.size());
      row_user_.push_back(static_cast<UserIndex>(u));
    }
  }
  for (std::size_t i = 0; i < num_items; ++i) {
    if (item_col_[i] != kAbsent) {
      item_col_[i] = static_cast<std::uint32_t>(col_item_.size());
      col_item_.push_back(static_cast<ItemIndex>(i));
    }
  }

  row_ptr_.assign(rows() + 1, 0);
  col_ptr_.assign(cols() + 1, 0);
  for (const auto& [u, i] : pairs) {
    ++row_ptr_[user_row_[u] + 1];
    ++col_ptr_[item_col_[i] + 1];
  }
  std::partial_sum(row_ptr_.begin(), row_ptr_.end(), row_ptr_.begin());
  std::partial_sum(col_ptr_.begin(), col_ptr_.end(), col_ptr_.begin());
  row_cols_.resize(pairs.size());
  col_rows_.resize(pairs.size());
  std::vector<std::size_t> row_fill(row_ptr_.begin(), row_ptr_.end() - 1);
  std::vector<std::size_t> col_fill(col_ptr_.begin(), col_ptr_.end() - 1);
  // Pairs are sorted by (user, item), so both views come out ascending.
  for (const auto& [u, i] : pairs) {
    const std::uint32_t r = user_row_[u];
    const std::uint32_t c = item_col_[i];
    row_cols_[row_fill[r]++] = c;
    col_rows_[col_fill[c]++] = r;
  }
}

std::optional<std::size_t> TrainMatrix::RowOfUser(UserIndex user) const {
  if (user >= user_row_.size() || user_row_[user] == kAbsent) return std::nullopt;
  return user_row_[user];
}

std::optional<std::size_t> TrainMatrix::ColOfItem(ItemIndex item) const {
  if (item >= item_col_.size() || item_col_[item] == kAbsent) return std::nullopt;
  return item_col_[item];
}

ModelFamily ParseModelFamily(std::string_view text) {
  if (text == "random" || text == "Random") return ModelFamily::kRandom;
  if (text == "mostpop" || text == "MostPop") return ModelFamily::kMostPop;
  if (text == "rp3beta" || text == "RP3beta") return ModelFamily::kRp3Beta;
  if (text == "ials" || text == "iALS") return ModelFamily::kIals;
  throw ConfigError("unknown recommender '" + std::string(text) + "'");
}

std::string_view ModelFamilyName(ModelFamily family) {
  switch (family) {
    case ModelFamily::kRandom:
      return "Random";
    case ModelFamily::kMostPop:
      return "MostPop";
    case ModelFamily::kRp3Beta:
      return "RP3beta";
    case ModelFamily::kIals:
      return "iALS";
  }
  return "?";
}

double GetParam(const HyperParams& params, std::string_view name) {
  for (const auto& [key, value] : params) {
    if (key == name) return value;
  }
  throw ConfigError("missing hyperparameter '" + std::string(name) + "'");
}

double GetParam(const HyperParams& params, std::string_view name, double fallback) {
  for (const auto& [key, value] : params) {
    if (key == name) return value;
  }
  return fallback;
}

std::string FormatParams(const HyperParams& params) {
  std::string out;
  for (const auto& [key, value] : params) {
    if (!out.empty()) out += ',';
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.10g", value);
    out += key + "=" + buf;
  }
  return out.empty() ? "-" : out;
}

void RandomRecommender::ScoreRow(std::size_t row, std::span<double> scores) const {
  std::mt19937_64 rng = SeededRng(seed_, matrix().UserOfRow(row));
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  for (double& s : scores) s = unit(rng);
}

MostPopRecommender::MostPopRecommender(std::shared_ptr<const TrainMatrix> matrix)
    : Recommender(std::move(matrix)) {
  counts_.resize(this->matrix().cols());
  for (std::size_t c = 0; c < counts_.size(); ++c) {
    counts_[c] = static_cast<double>(this->matrix().ColDegree(c));
  }
}

void MostPopRecommender::ScoreRow(std::size_t /*row*/, std::span<double> scores) const {
  std::copy(counts_.begin(), counts_.end(), scores.begin());
}

Rp3BetaRecommender::Rp3BetaRecommender(std::shared_ptr<const TrainMatrix> matrix,
                                       double alpha, double beta,
                                       std::size_t top_k_neighbors)
    : Recommender(std::move(matrix)), alpha_(alpha) {
  if (!(alpha >= 0.0) || !(beta >= 0.0)) {
    throw ConfigError("RP3beta alpha and beta must be non-negative");
  }
  const TrainMatrix& m = this->matrix();
  if (m.nnz() == 0) throw DataError("RP3beta needs a nonempty training matrix");
  const std::size_t n_items = m.cols();

  std::vector<double> item_step(n_items);  // p(i->v)^alpha
  std::vector<double> pop_penalty(n_items);
  for (std::size_t c = 0; c < n_items; ++c) {
    const double deg = static_cast<double>(m.ColDegree(c));
    item_step[c] = std::pow(1.0 / deg, alpha);
    pop_penalty[c] = std::pow(deg, -beta);
  }
  std::vector<double> user_step(m.rows());  // p(v->j)^alpha
  for (std::size_t r = 0; r < m.rows(); ++r) {
    user_step[r] = std::pow(1.0 / static_cast<double>(m.RowDegree(r)), alpha);
  }

  std::vector<std::vector<std::pair<std::uint32_t, double>>> rows(n_items);
  ParallelFor(n_items, [&](std::size_t i) {
    thread_local std::vector<double> acc;
    thread_local std::vector<std::uint32_t> touched;
    if (acc.size() != n_items) acc.assign(n_items, 0.0);
    touched.clear();
    for (std::uint32_t v : m.ColRows(i)) {
      const double w = item_step[i] * user_step[v];
      for (std::uint32_t j : m.RowCols(v)) {
        if (acc[j] == 0.0) touched.push_back(j);
        acc[j] += w;
      }
    }
    std::sort(touched.begin(), touched.end());
    auto& out = rows[i];
    out.reserve(touched.size());
    for (std::uint32_t j : touched) {
      out.emplace_back(j, acc[j] * pop_penalty[j]);
      acc[j] = 0.0;
    }
    if (top_k_neighbors > 0 && out.size() > top_k_neighbors) {
      std::nth_element(out.begin(), out.begin() + top_k_neighbors, out.end(),
                       [](const auto& a, const auto& b) {
                         return a.second != b.second ? a.second > b.second
                                                     : a.first < b.first;
                       });
      out.resize(top_k_neighbors);
      std::sort(out.begin(), out.end());
    }
  });

  sim_ptr_.assign(n_items + 1, 0);
  for (std::size_t i = 0; i < n_items; ++i) sim_ptr_[i + 1] = sim_ptr_[i] + rows[i].size();
  sim_.reserve(sim_ptr_.back());
  for (auto& r : rows) sim_.insert(sim_.end(), r.begin(), r.end());
}

std::span<const std::pair<std::uint32_t, double>> Rp3BetaRecommender::SimilarityRow(
    std::size_t i) const {
  return {sim_.data() + sim_ptr_[i], sim_ptr_[i + 1] - sim_ptr_[i]};
}

void Rp3BetaRecommender::ScoreRow(std::size_t row, std::span<double> scores) const {
  std::fill(scores.begin(), scores.end(), 0.0);
  const auto profile = matrix().RowCols(row);
  const double first_step =
      std::pow(1.0 / static_cast<double>(profile.size()), alpha_);
  for (std::uint32_t i : profile) {
    for (const auto& [j, w] : SimilarityRow(i)) scores[j] += first_step * w;
  }
}

IalsRecommender::IalsRecommender(std::shared_ptr<const TrainMatrix> matrix,
                                 const IalsOptions& options, std::uint64_t seed)
    : Recommender(std::move(matrix)), options_(options) {
  if (options.factors < 1) throw ConfigError("iALS factors must be >= 1");
  if (!(options.reg > 0.0)) throw ConfigError("iALS regularization must be > 0");
  if (!(options.alpha > 0.0)) throw ConfigError("iALS confidence alpha must be > 0");
  if (options.epochs < 0) throw ConfigError("iALS epochs must be >= 0");
  const TrainMatrix& m = this->matrix();
  if (m.nnz() == 0) throw DataError("iALS needs a nonempty training matrix");

  const int k = options.factors;
  std::normal_distribution<double> noise(
      0.0, options.init_stddev / std::sqrt(static_cast<double>(k)));
  std::mt19937_64 user_rng = SeededRng(seed, 0);
  std::mt19937_64 item_rng = SeededRng(seed, 1);
  users_.resize(static_cast<Eigen::Index>(m.rows()), k);
  items_.resize(static_cast<Eigen::Index>(m.cols()), k);
  for (Eigen::Index r = 0; r < users_.rows(); ++r) {
    for (int f = 0; f < k; ++f) users_(r, f) = noise(user_rng);
  }
  for (Eigen::Index c = 0; c < items_.rows(); ++c) {
    for (int f = 0; f < k; ++f) items_(c, f) = noise(item_rng);
  }
}

namespace {

// Solves every row of `solved` against the fixed factors:
// (F'F + alpha sum_obs f f' + reg I) x = (1 + alpha) sum_obs f.
template <typename NeighborsFn>
void HalfSweep(Eigen::MatrixXd& solved, const Eigen::MatrixXd& fixed,
               const IalsOptions& options, NeighborsFn neighbors) {
  const Eigen::Index k = fixed.cols();
  Eigen::MatrixXd gram = fixed.transpose() * fixed;
  gram.diagonal().array() += options.reg;
  ParallelFor(static_cast<std::size_t>(solved.rows()), [&](std::size_t r) {
    Eigen::MatrixXd a = gram;
    Eigen::VectorXd b = Eigen::VectorXd::Zero(k);
    for (std::uint32_t c : neighbors(r)) {
      const auto f = fixed.row(c).transpose();
      a.selfadjointView<Eigen::Lower>().rankUpdate(f, options.alpha);
      b += (1.0 + options.alpha) * f;
    }
    a.triangularView<Eigen::StrictlyUpper>() = a.transpose();
    solved.row(static_cast<Eigen::Index>(r)) = a.llt().solve(b).transpose();
  });
}

}  // namespace

void IalsRecommender::SolveUsers() {
  const TrainMatrix& m = matrix();
  HalfSweep(users_, items_, options_, [&](std::size_t r) { return m.RowCols(r); });
  trace_.push_back(Objective());
}

void IalsRecommender::SolveItems() {
  const TrainMatrix& m = matrix();
  HalfSweep(items_, users_, options_, [&](std::size_t c) { return m.ColRows(c); });
  trace_.push_back(Objective());
}

void IalsRecommender::Fit() {
  trace_.clear();
  trace_.push_back(Objective());
  for (int e = 0; e < options_.epochs; ++e) {
    SolveUsers();
    SolveItems();
  }
}

double IalsRecommender::Objective() const {
  const TrainMatrix& m = matrix();
  // Sum over all pairs of s^2 = sum((X'X) .* (Y'Y)); observed entries then
  // swap their s^2 for c (1 - s)^2.
  const Eigen::MatrixXd xtx = users_.transpose() * users_;
  const Eigen::MatrixXd yty = items_.transpose() * items_;
  double total = (xtx.array() * yty.array()).sum();
  for (std::size_t r = 0; r < m.rows(); ++r) {
    const auto x = users_.row(static_cast<Eigen::Index>(r));
    for (std::uint32_t c : m.RowCols(r)) {
      const double s = x.dot(items_.row(c));
      total += (1.0 + options_.alpha) * (1.0 - s) * (1.0 - s) - s * s;
    }
  }
  total += options_.reg * (users_.squaredNorm() + items_.squaredNorm());
  return total;
}

void IalsRecommender::ScoreRow(std::size_t row, std::span<double> scores) const {
  Eigen::Map<Eigen::VectorXd> out(scores.data(), static_cast<Eigen::Index>(scores.size()));
  out.noalias() = items_ * users_.row(static_cast<Eigen::Index>(row)).transpose();
}

std::unique_ptr<Recommender> TrainModel(ModelFamily family,
                                        std::shared_ptr<const TrainMatrix> matrix,
                                        const HyperParams& params,
                                        std::uint64_t seed) {
  switch (family) {
    case ModelFamily::kRandom:
      return std::make_unique<RandomRecommender>(std::move(matrix), seed);
    case ModelFamily::kMostPop:
      return std::make_unique<MostPopRecommender>(std::move(matrix));
    case ModelFamily::kRp3Beta:
      return std::make_unique<Rp3BetaRecommender>(
          std::move(matrix), GetParam(params, "alpha"), GetParam(params, "beta"),
          static_cast<std::size_t>(GetParam(params, "top_k", 0.0)));
    case ModelFamily::kIals: {
      IalsOptions options;
      options.factors = static_cast<int>(GetParam(params, "factors"));
      options.reg = GetParam(params, "reg");
      options.alpha = GetParam(params, "alpha");
      options.epochs = static_cast<int>(GetParam(params, "epochs", options.epochs));
      auto model = std::make_unique<IalsRecommender>(std::move(matrix), options, seed);
      model->Fit();
      return model;
    }
  }
  throw ConfigError("unknown recommender family");
}

ExclusionIndex BuildExclusions(std::span<const Interaction> events,
                               std::size_t num_users) {
  ExclusionIndex index(num_users);
  AddExclusions(index, events);
  return index;
}

void AddExclusions(ExclusionIndex& index, std::span<const Interaction> events) {
  for (const Interaction& e : events) {
    if (e.user >= index.size()) throw ValidationError("exclusion user outside catalog");
    index[e.user].push_back(e.item);
  }
  for (auto& items : index) {
    std::sort(items.begin(), items.end());
    items.erase(std::unique(items.begin(), items.end()), items.end());
  }
}

RecommendationTable RecommendTopN(const Recommender& model,
                                  std::span<const UserIndex> users,
                                  const ExclusionIndex& exclusions, std::size_t n) {
  const TrainMatrix& m = model.matrix();
  RecommendationTable table;
  table.recommender = std::string(model.name());
  table.n = n;
  std::vector<std::pair<UserIndex, std::size_t>> rows;
  for (UserIndex u : users) {
    if (auto row = m.RowOfUser(u)) rows.emplace_back(u, *row);
  }
  table.lists.resize(rows.size());
  ParallelFor(rows.size(), [&](std::size_t k) {
    const auto [user, row] = rows[k];
    std::vector<double> scores(m.cols());
    model.ScoreRow(row, scores);
    std::vector<char> blocked(m.cols(), 0);
    if (user < exclusions.size()) {
      for (ItemIndex item : exclusions[user]) {
        if (auto col = m.ColOfItem(item)) blocked[*col] = 1;
      }
    }
    std::vector<std::uint32_t> candidates;
    candidates.reserve(m.cols());
    for (std::uint32_t c = 0; c < m.cols(); ++c) {
      if (!blocked[c]) candidates.push_back(c);
    }
    auto better = [&](std::uint32_t a, std::uint32_t b) {
      return scores[a] != scores[b] ? scores[a] > scores[b] : a < b;
    };
    const std::size_t take = std::min(n, candidates.size());
    std::partial_sort(candidates.begin(), candidates.begin() + take,
                      candidates.end(), better);
    RankedList& list = table.lists[k];
    list.user = user;
    list.shortfall = take < n;
    list.items.reserve(take);
    for (std::size_t t = 0; t < take; ++t) {
      list.items.emplace_back(m.ItemOfCol(candidates[t]), scores[candidates[t]]);
    }
  });
  return table;
}

void WriteRecommendationTable(const std::filesystem::path& path,
                              const RecommendationTable& table,
                              const std::vector<UserRecord>& users,
                              const std::vector<ItemRecord>& items,
                              const std::string& manifest_hash) {
  TextTable out;
  std::size_t shortfalls = 0;
  for (const RankedList& list : table.lists) shortfalls += list.shortfall ? 1 : 0;
  out.metadata = {{"recommender", table.recommender},
                  {"variant", table.variant},
                  {"params", FormatParams(table.params)},
                  {"seed", std::to_string(table.seed)},
                  {"n", std::to_string(table.n)},
                  {"exclude", table.exclude_validation ? "train+validation" : "train"},
                  {"users", std::to_string(table.lists.size())},
                  {"shortfall_users", std::to_string(shortfalls)},
                  {"manifest_hash", manifest_hash}};
  out.columns = {"user_id", "rank", "item_id", "score"};
  for (const RankedList& list : table.lists) {
    for (std::size_t r = 0; r < list.items.size(); ++r) {
      char score[48];
      std::snprintf(score, sizeof score, "%.12g", list.items[r].second);
      out.rows.push_back({users[list.user].user_id, std::to_string(r + 1),
                          items[list.items[r].first].item_id, score});
    }
  }
  WriteTable(path, out);
}

}  // namespace agerec
