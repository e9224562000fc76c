// Copyright 2026 The skyq Authors.
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

// Row rendering shared by the command line and the HTTP service.

#ifndef SKYQ_FORMAT_H_
#define SKYQ_FORMAT_H_

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "skyq/catalog.h"
#include "skyq/exec.h"

namespace skyq {

enum class OutputFormat { kCsv, kJsonl };

std::optional<OutputFormat> ParseOutputFormat(std::string_view name);
std::string_view MediaType(OutputFormat format);

// Shortest text that parses back to the same double.
std::string FormatNumber(double v);

class RowWriter {
 public:
  RowWriter(OutputFormat format, std::vector<std::string> columns);

  // CSV header line (with newline); empty for JSON Lines.
  std::string Header() const;
  // One line, newline-terminated. CSV quoting follows RFC 4180; JSON Lines
  // writes one object per line with null for missing cells.
  std::string Format(const std::vector<Cell>& cells) const;

 private:
  OutputFormat format_;
  std::vector<std::string> columns_;
};

const std::vector<std::string>& PairColumns();
std::vector<Cell> PairCells(const PairResult& pair);

// "key=value" lines.
std::string StatsText(const CatalogStats& stats);
// One JSON object per line: a summary line, then one line per container.
std::string StatsJsonl(const CatalogStats& stats);

std::string LoadReportText(const LoadReport& report);

}  // namespace skyq

#endif  // SKYQ_FORMAT_H_
