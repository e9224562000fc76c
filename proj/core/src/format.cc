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

#include "skyq/format.h"

#include <charconv>
#include <cmath>
#include <sstream>

#include "json.hpp"

namespace skyq {

namespace {

std::string CsvField(std::string_view s) {
  if (s.find_first_of(",\"\r\n") == std::string_view::npos) return std::string(s);
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

std::string CellText(const Cell& c) {
  if (const auto* u = std::get_if<std::uint64_t>(&c)) return std::to_string(*u);
  if (const auto* d = std::get_if<double>(&c)) return std::isfinite(*d) ? FormatNumber(*d) : "";
  if (const auto* s = std::get_if<std::string>(&c)) return *s;
  return {};
}

nlohmann::json CellJson(const Cell& c) {
  if (const auto* u = std::get_if<std::uint64_t>(&c)) return *u;
  if (const auto* d = std::get_if<double>(&c)) {
    if (!std::isfinite(*d)) return nullptr;
    return *d;
  }
  if (const auto* s = std::get_if<std::string>(&c)) return *s;
  return nullptr;
}

}  // namespace

std::optional<OutputFormat> ParseOutputFormat(std::string_view name) {
  if (name == "csv") return OutputFormat::kCsv;
  if (name == "jsonl") return OutputFormat::kJsonl;
  return std::nullopt;
}

std::string_view MediaType(OutputFormat format) {
  return format == OutputFormat::kCsv ? "text/csv" : "application/x-ndjson";
}

std::string FormatNumber(double v) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  (void)ec;
  return std::string(buf, ptr);
}

RowWriter::RowWriter(OutputFormat format, std::vector<std::string> columns)
    : format_(format), columns_(std::move(columns)) {}

std::string RowWriter::Header() const {
  if (format_ != OutputFormat::kCsv) return {};
  std::string out;
  for (std::size_t i = 0; i < columns_.size(); ++i) {
    if (i > 0) out += ',';
    out += CsvField(columns_[i]);
  }
  return out + "\n";
}

std::string RowWriter::Format(const std::vector<Cell>& cells) const {
  if (format_ == OutputFormat::kCsv) {
    std::string out;
    for (std::size_t i = 0; i < cells.size(); ++i) {
      if (i > 0) out += ',';
      out += CsvField(CellText(cells[i]));
    }
    return out + "\n";
  }
  nlohmann::ordered_json obj = nlohmann::ordered_json::object();
  for (std::size_t i = 0; i < cells.size() && i < columns_.size(); ++i) {
    obj[columns_[i]] = CellJson(cells[i]);
  }
  return obj.dump() + "\n";
}

const std::vector<std::string>& PairColumns() {
  static const std::vector<std::string> cols = {"obj_a", "obj_b", "separation_arcsec", "d_ug",
                                                "d_gr",  "d_ri",  "d_iz"};
  return cols;
}

std::vector<Cell> PairCells(const PairResult& p) {
  std::vector<Cell> cells = {p.obj_a, p.obj_b, p.separation_arcsec};
  for (double d : p.color_delta) cells.emplace_back(d);
  return cells;
}

std::string StatsText(const CatalogStats& stats) {
  std::ostringstream os;
  os << "total=" << stats.total << "\n";
  os << "containers=" << stats.container_counts.size() << "\n";
  for (int b = 0; b < kNumBands; ++b) {
    os << kBandNames[b] << "_min=" << FormatNumber(stats.mag_min[b]) << "\n";
    os << kBandNames[b] << "_max=" << FormatNumber(stats.mag_max[b]) << "\n";
  }
  os << "size_min=" << FormatNumber(stats.size_min) << "\n";
  os << "size_max=" << FormatNumber(stats.size_max) << "\n";
  return os.str();
}

std::string StatsJsonl(const CatalogStats& stats) {
  nlohmann::ordered_json summary;
  summary["total"] = stats.total;
  summary["containers"] = stats.container_counts.size();
  for (int b = 0; b < kNumBands; ++b) {
    summary[std::string(kBandNames[b]) + "_min"] = stats.mag_min[b];
    summary[std::string(kBandNames[b]) + "_max"] = stats.mag_max[b];
  }
  summary["size_min"] = stats.size_min;
  summary["size_max"] = stats.size_max;
  std::string out = summary.dump() + "\n";
  for (const auto& [id, n] : stats.container_counts) {
    nlohmann::ordered_json line;
    line["container"] = id.Name();
    line["objects"] = n;
    out += line.dump() + "\n";
  }
  return out;
}

std::string LoadReportText(const LoadReport& report) {
  std::ostringstream os;
  os << "objects=" << report.objects_loaded << " containers_touched="
     << report.containers_touched() << " duration_s=" << report.duration.count() << "\n";
  return os.str();
}

}  // namespace skyq
