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

#ifndef AGEREC_IO_H_
#define AGEREC_IO_H_

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace agerec {

// Splits `line` on a (possibly multi-character) delimiter such as "::".
std::vector<std::string_view> SplitFields(std::string_view line,
                                          std::string_view delimiter);

std::string_view Trim(std::string_view text);

std::optional<std::int64_t> ParseInt(std::string_view text);
std::optional<double> ParseDouble(std::string_view text);

// Resolves the escape names accepted in manifests ("\t", "tab", ",", "::").
std::string ResolveDelimiter(std::string_view spec);

// Opens `path` for reading; throws DataError when it cannot be opened.
std::ifstream OpenInput(const std::filesystem::path& path);
// Opens `path` for writing, creating parent directories.
std::ofstream OpenOutput(const std::filesystem::path& path);

std::string ReadFile(const std::filesystem::path& path);

// Delimited table whose leading "# key=value" lines form a metadata block.
struct TextTable {
  std::vector<std::pair<std::string, std::string>> metadata;
  std::vector<std::string> columns;
  std::vector<std::vector<std::string>> rows;

  std::optional<std::string> Meta(std::string_view key) const;
  std::size_t Column(std::string_view name) const;  // throws DataError
};

void WriteTable(const std::filesystem::path& path, const TextTable& table);
TextTable ReadTable(const std::filesystem::path& path);

}  // namespace agerec

#endif  // AGEREC_IO_H_
