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

#include "agerec/domain.h"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <numbers>

namespace agerec {

GenreVocabulary::GenreVocabulary(std::vector<std::string> names)
    : names_(std::move(names)) {
  for (std::size_t i = 0; i < names_.size(); ++i) {
    if (names_[i].empty()) {
      throw ConfigError("genre vocabulary contains an empty label");
    }
    if (!index_.emplace(names_[i], i).second) {
      throw ConfigError("duplicate genre label '" + names_[i] + "'");
    }
  }
}

std::optional<std::size_t> GenreVocabulary::Find(std::string_view label) const {
  auto it = index_.find(std::string(label));
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

GenreDistribution::GenreDistribution(std::vector<double> weights)
    : weights_(std::move(weights)) {}

GenreDistribution GenreDistribution::EqualWeights(
    std::span<const std::size_t> genres, std::size_t dimension) {
  std::vector<std::size_t> unique(genres.begin(), genres.end());
  std::sort(unique.begin(), unique.end());
  unique.erase(std::unique(unique.begin(), unique.end()), unique.end());
  if (unique.empty()) {
    throw ValidationError("item genre vector needs at least one genre");
  }
  std::vector<double> weights(dimension, 0.0);
  const double share = 1.0 / static_cast<double>(unique.size());
  for (std::size_t g : unique) {
    if (g >= dimension) throw ConfigError("genre index out of range");
    weights[g] = share;
  }
  return GenreDistribution(std::move(weights));
}

double GenreDistribution::Total() const {
  double total = 0.0;
  for (double w : weights_) total += w;
  return total;
}

bool GenreDistribution::IsNormalized(double tolerance) const {
  if (weights_.empty()) return false;
  for (double w : weights_) {
    if (!(w >= 0.0)) return false;
  }
  return std::abs(Total() - 1.0) <= tolerance;
}

void GenreDistribution::Validate() const {
  if (!IsNormalized()) {
    throw ValidationError("genre distribution is not a probability vector");
  }
}

std::string_view GroupName(AgeGroup group) {
  switch (group) {
    case AgeGroup::kChild:
      return "Children";
    case AgeGroup::kMainstream:
      return "Mainstream";
    case AgeGroup::kNma:
      return "NMA";
  }
  return "?";
}

char GroupLetter(AgeGroup group) {
  switch (group) {
    case AgeGroup::kChild:
      return 'c';
    case AgeGroup::kMainstream:
      return 'm';
    case AgeGroup::kNma:
      return 'n';
  }
  return '?';
}

AgeGroup ParseGroup(std::string_view name) {
  for (AgeGroup g : kAllGroups) {
    if (name == GroupName(g)) return g;
  }
  if (name == "Child" || name == "c") return AgeGroup::kChild;
  if (name == "m") return AgeGroup::kMainstream;
  if (name == "n") return AgeGroup::kNma;
  throw ConfigError("unknown age group '" + std::string(name) + "'");
}

void AgeGrouping::Validate() const {
  if (child_max >= mainstream_max) {
    throw ConfigError("age grouping requires child_max < mainstream_max");
  }
}

AgeGroup AssignGroup(int age, const AgeGrouping& grouping) {
  if (age < kMinAge || age > kMaxAge) {
    throw FilteredInputError("age " + std::to_string(age) +
                             " is outside [12, 65]");
  }
  if (age <= grouping.child_max) return AgeGroup::kChild;
  if (age <= grouping.mainstream_max) return AgeGroup::kMainstream;
  return AgeGroup::kNma;
}

int AgeAtYear(int reported_age, int event_year, const AgeGrouping& grouping) {
  if (!grouping.reference_year) return reported_age;
  const int birth_year = *grouping.reference_year - reported_age;
  return event_year - birth_year;
}

int YearOf(std::int64_t epoch_seconds) {
  using namespace std::chrono;
  const sys_seconds t{seconds{epoch_seconds}};
  const year_month_day ymd{floor<days>(t)};
  return static_cast<int>(ymd.year());
}

LogBase ParseLogBase(std::string_view text) {
  if (text == "2") return LogBase::kTwo;
  if (text == "e") return LogBase::kE;
  throw ConfigError("JSD base must be '2' or 'e', got '" + std::string(text) +
                    "'");
}

std::string_view LogBaseName(LogBase base) {
  return base == LogBase::kTwo ? "2" : "e";
}

double Jsd(std::span<const double> p, std::span<const double> q, LogBase base) {
  if (p.size() != q.size()) {
    throw ConfigError("JSD dimension mismatch: " + std::to_string(p.size()) +
                      " vs " + std::to_string(q.size()));
  }
  auto check = [](std::span<const double> v) {
    double total = 0.0;
    for (double w : v) {
      if (!(w >= 0.0)) throw ValidationError("negative genre weight");
      total += w;
    }
    if (v.empty() || std::abs(total - 1.0) > kNormalizationTolerance) {
      throw ValidationError("JSD input is not normalized");
    }
  };
  check(p);
  check(q);

  // 0.5 * KL(p || m) + 0.5 * KL(q || m), which equals H(m) - (H(p)+H(q))/2
  // and is exactly zero when p == q.
  double sum = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    const double m = 0.5 * (p[i] + q[i]);
    // One commutative sum per coordinate keeps jsd(p, q) == jsd(q, p).
    const double a = p[i] > 0.0 ? p[i] * std::log(p[i] / m) : 0.0;
    const double b = q[i] > 0.0 ? q[i] * std::log(q[i] / m) : 0.0;
    sum += a + b;
  }
  double jsd = 0.5 * sum;
  const double upper = std::numbers::ln2;
  jsd = std::clamp(jsd, 0.0, upper);
  if (base == LogBase::kTwo) jsd = std::min(1.0, jsd / std::numbers::ln2);
  return jsd;
}

double Jsd(const GenreDistribution& p, const GenreDistribution& q,
           LogBase base) {
  return Jsd(std::span<const double>(p.weights()),
             std::span<const double>(q.weights()), base);
}

}  // namespace agerec
