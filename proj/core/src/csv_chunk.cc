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

#include <charconv>
#include <fstream>
#include <sstream>
#include <string_view>

#include "skyq/catalog.h"
#include "skyq/error.h"

namespace skyq {

namespace {

constexpr std::string_view kRequiredColumns[] = {"obj_id", "ra_deg", "dec_deg", "u", "g", "r",
                                                 "i",      "z",      "size_arcsec", "class"};
constexpr std::size_t kNumRequired = std::size(kRequiredColumns);

struct Field {
  std::string_view text;
  int column;  // 1-based
};

std::string_view Trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

std::vector<Field> Split(std::string_view line) {
  std::vector<Field> fields;
  std::size_t start = 0;
  while (true) {
    const std::size_t comma = line.find(',', start);
    const std::string_view raw =
        line.substr(start, comma == std::string_view::npos ? std::string_view::npos : comma - start);
    fields.push_back({Trim(raw), static_cast<int>(start) + 1});
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return fields;
}

double ParseDouble(const Field& f, int line) {
  double v = 0;
  const char* end = f.text.data() + f.text.size();
  auto [ptr, ec] = std::from_chars(f.text.data(), end, v);
  if (ec != std::errc() || ptr != end || f.text.empty()) {
    throw ParseError("expected a number, got '" + std::string(f.text) + "'", line, f.column);
  }
  return v;
}

std::uint64_t ParseId(const Field& f, int line) {
  std::uint64_t v = 0;
  const char* end = f.text.data() + f.text.size();
  auto [ptr, ec] = std::from_chars(f.text.data(), end, v);
  if (ec != std::errc() || ptr != end || f.text.empty()) {
    throw ParseError("expected an unsigned 64-bit obj_id, got '" + std::string(f.text) + "'",
                     line, f.column);
  }
  return v;
}

}  // namespace

Chunk ParseCsvChunk(const std::string& text, const std::string& source, Schema* schema_out) {
  Chunk chunk;
  chunk.source = source;
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  std::size_t width = 0;
  Schema schema;
  bool have_header = false;
  while (std::getline(in, line)) {
    ++lineno;
    if (Trim(line).empty()) continue;
    const auto fields = Split(line);
    if (!have_header) {
      if (fields.size() < kNumRequired) {
        throw ParseError("header must start with obj_id,ra_deg,dec_deg,u,g,r,i,z,size_arcsec,class",
                         lineno, 1);
      }
      for (std::size_t i = 0; i < kNumRequired; ++i) {
        if (fields[i].text != kRequiredColumns[i]) {
          throw ParseError("expected header column '" + std::string(kRequiredColumns[i]) +
                               "', got '" + std::string(fields[i].text) + "'",
                           lineno, fields[i].column);
        }
      }
      for (std::size_t i = kNumRequired; i < fields.size(); ++i) {
        if (fields[i].text.empty()) throw ParseError("empty extra column name", lineno, fields[i].column);
        schema.extras.emplace_back(fields[i].text);
      }
      width = fields.size();
      have_header = true;
      continue;
    }
    if (fields.size() != width) {
      throw ParseError("row " + std::to_string(lineno) + " has " + std::to_string(fields.size()) +
                           " fields, header has " + std::to_string(width),
                       lineno, 1);
    }
    SkyObject o;
    o.obj_id = ParseId(fields[0], lineno);
    const double ra = ParseDouble(fields[1], lineno);
    const double dec = ParseDouble(fields[2], lineno);
    try {
      o.pos = FromLonLat(ra, dec);
    } catch (const DomainError& e) {
      throw ParseError("row " + std::to_string(lineno) + ": " + e.what(), lineno, fields[2].column);
    }
    for (int b = 0; b < kNumBands; ++b) o.mag[b] = ParseDouble(fields[3 + b], lineno);
    o.size_arcsec = ParseDouble(fields[8], lineno);
    if (!(o.size_arcsec >= 0)) {
      throw ParseError("row " + std::to_string(lineno) + ": size_arcsec must be >= 0", lineno,
                       fields[8].column);
    }
    const auto cls = ParseClass(fields[9].text);
    if (!cls) {
      throw ParseError("row " + std::to_string(lineno) + ": unknown class '" +
                           std::string(fields[9].text) + "'",
                       lineno, fields[9].column);
    }
    o.cls = *cls;
    o.extras.reserve(width - kNumRequired);
    for (std::size_t i = kNumRequired; i < width; ++i) o.extras.push_back(ParseDouble(fields[i], lineno));
    chunk.objects.push_back(std::move(o));
  }
  if (!have_header) throw ParseError("missing CSV header", std::max(lineno, 1), 1);
  if (schema_out) *schema_out = std::move(schema);
  return chunk;
}

Chunk ReadCsvChunk(const std::filesystem::path& path, Schema* schema_out) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError(path.string() + ": cannot open");
  std::stringstream buf;
  buf << in.rdbuf();
  return ParseCsvChunk(buf.str(), path.string(), schema_out);
}

}  // namespace skyq
