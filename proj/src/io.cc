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

#include "agerec/io.h"

#include <charconv>
#include <cstdlib>
#include <sstream>

#include "agerec/common.h"

namespace agerec {

std::vector<std::string_view> SplitFields(std::string_view line,
                                          std::string_view delimiter) {
  std::vector<std::string_view> fields;
  if (delimiter.empty()) {
    fields.push_back(line);
    return fields;
  }
  std::size_t start = 0;
  while (true) {
    const std::size_t pos = line.find(delimiter, start);
    if (pos == std::string_view::npos) {
      fields.push_back(line.substr(start));
      break;
    }
    fields.push_back(line.substr(start, pos - start));
    start = pos + delimiter.size();
  }
  return fields;
}

std::string_view Trim(std::string_view text) {
  const auto first = text.find_first_not_of(" \t\r\n");
  if (first == std::string_view::npos) return {};
  const auto last = text.find_last_not_of(" \t\r\n");
  return text.substr(first, last - first + 1);
}

std::optional<std::int64_t> ParseInt(std::string_view text) {
  text = Trim(text);
  if (text.empty()) return std::nullopt;
  if (text.front() == '+') text.remove_prefix(1);
  std::int64_t value = 0;
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc() || ptr != text.data() + text.size()) return std::nullopt;
  return value;
}

std::optional<double> ParseDouble(std::string_view text) {
  text = Trim(text);
  if (text.empty()) return std::nullopt;
  std::string owned(text);
  char* end = nullptr;
  const double value = std::strtod(owned.c_str(), &end);
  if (end != owned.c_str() + owned.size()) return std::nullopt;
  return value;
}

std::string ResolveDelimiter(std::string_view spec) {
  if (spec == "\\t" || spec == "tab" || spec == "\t") return "\t";
  if (spec == "," || spec == "comma") return ",";
  if (spec == "::") return "::";
  throw ConfigError("unsupported delimiter '" + std::string(spec) +
                    "' (expected \\t, ',' or '::')");
}

std::ifstream OpenInput(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open " + path.string());
  return in;
}

std::ofstream OpenOutput(const std::filesystem::path& path) {
  if (path.has_parent_path()) {
    std::filesystem::create_directories(path.parent_path());
  }
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw DataError("cannot write " + path.string());
  return out;
}

std::string ReadFile(const std::filesystem::path& path) {
  auto in = OpenInput(path);
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

std::optional<std::string> TextTable::Meta(std::string_view key) const {
  for (const auto& [k, v] : metadata) {
    if (k == key) return v;
  }
  return std::nullopt;
}

std::size_t TextTable::Column(std::string_view name) const {
  for (std::size_t i = 0; i < columns.size(); ++i) {
    if (columns[i] == name) return i;
  }
  throw DataError("table has no column '" + std::string(name) + "'");
}

void WriteTable(const std::filesystem::path& path, const TextTable& table) {
  auto out = OpenOutput(path);
  for (const auto& [k, v] : table.metadata) out << "# " << k << '=' << v << '\n';
  for (std::size_t i = 0; i < table.columns.size(); ++i) {
    out << (i ? "\t" : "") << table.columns[i];
  }
  out << '\n';
  for (const auto& row : table.rows) {
    for (std::size_t i = 0; i < row.size(); ++i) out << (i ? "\t" : "") << row[i];
    out << '\n';
  }
  if (!out) throw DataError("failed writing " + path.string());
}

TextTable ReadTable(const std::filesystem::path& path) {
  auto in = OpenInput(path);
  TextTable table;
  std::string line;
  bool have_header = false;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (!have_header && line.rfind("# ", 0) == 0) {
      const auto eq = line.find('=');
      if (eq != std::string::npos) {
        table.metadata.emplace_back(line.substr(2, eq - 2), line.substr(eq + 1));
      }
      continue;
    }
    if (line.empty()) continue;
    std::vector<std::string> fields;
    for (auto f : SplitFields(line, "\t")) fields.emplace_back(f);
    if (!have_header) {
      table.columns = std::move(fields);
      have_header = true;
    } else {
      if (fields.size() != table.columns.size()) {
        throw DataError(path.string() + ": row width does not match header");
      }
      table.rows.push_back(std::move(fields));
    }
  }
  if (!have_header) throw DataError(path.string() + ": missing header row");
  return table;
}

}  // namespace agerec
