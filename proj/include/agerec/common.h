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

#ifndef AGEREC_COMMON_H_
#define AGEREC_COMMON_H_

#include <cstddef>
#include <cstdint>
#include <functional>
#include <random>
#include <stdexcept>
#include <string>

namespace agerec {

using UserIndex = std::uint32_t;
using ItemIndex = std::uint32_t;

// Error taxonomy. The CLI maps DataError to exit status 1 and ConfigError to
// exit status 2.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Bad parameters, mismatched dimensions, unknown options.
class ConfigError : public Error {
 public:
  using Error::Error;
};

// Input data that cannot be processed (malformed in strict mode, empty after
// filtering, infeasible requests against the data).
class DataError : public Error {
 public:
  using Error::Error;
};

// A value violates a documented invariant (e.g. a non-normalized
// distribution handed to a metric).
class ValidationError : public Error {
 public:
  using Error::Error;
};

// An age outside the supported [12, 65] window reached a function whose
// callers are required to pre-filter.
class FilteredInputError : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

// Caps intra-stage parallelism. Results never depend on the value.
void SetWorkerCount(int workers);
int WorkerCount();

// Runs fn(i) for i in [0, n) on up to WorkerCount() threads. Each index is
// visited exactly once; fn must only write state owned by index i.
void ParallelFor(std::size_t n, const std::function<void(std::size_t)>& fn);

// Deterministic generator for (seed, stream); distinct streams give
// independent sequences, so per-user work can be scheduled in any order.
std::mt19937_64 SeededRng(std::uint64_t seed, std::uint64_t stream = 0);

// Formats a real with a fixed number of decimals ("%.*f").
std::string FormatFixed(double value, int decimals = 6);

}  // namespace agerec

#endif  // AGEREC_COMMON_H_
