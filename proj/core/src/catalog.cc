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

#include "skyq/catalog.h"

#include <algorithm>
#include <cinttypes>
#include <cstdio>
#include <fstream>
#include <limits>
#include <numeric>
#include <sstream>

#include "skyq/error.h"

namespace skyq {

namespace fs = std::filesystem;

namespace {

constexpr const char* kCurrentFile = "CURRENT";
constexpr const char* kMetaFile = "meta.txt";
constexpr const char* kIdsFile = "ids.bin";

std::string VersionName(std::uint64_t version) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "v%08" PRIu64, version);
  return buf;
}

std::string ReadTextFile(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError(path.string() + ": cannot open");
  std::stringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

void WriteFile(const fs::path& path, const void* data, std::size_t size) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError(path.string() + ": cannot create");
  out.write(static_cast<const char*>(data), static_cast<std::streamsize>(size));
  out.close();
  if (!out) throw IoError(path.string() + ": write failed");
}

void WriteTextFile(const fs::path& path, const std::string& text) {
  WriteFile(path, text.data(), text.size());
}

std::vector<std::uint64_t> ReadIds(const fs::path& path) {
  const std::string raw = ReadTextFile(path);
  if (raw.size() % 8 != 0) throw IntegrityError(path.string() + ": truncated id index");
  std::vector<std::uint64_t> ids(raw.size() / 8);
  for (std::size_t i = 0; i < ids.size(); ++i) {
    std::uint64_t v = 0;
    for (int b = 0; b < 8; ++b) {
      v |= static_cast<std::uint64_t>(static_cast<unsigned char>(raw[i * 8 + b])) << (8 * b);
    }
    ids[i] = v;
  }
  return ids;
}

void WriteIds(const fs::path& path, const std::vector<std::uint64_t>& ids) {
  std::string raw(ids.size() * 8, '\0');
  for (std::size_t i = 0; i < ids.size(); ++i) {
    for (int b = 0; b < 8; ++b) raw[i * 8 + b] = static_cast<char>((ids[i] >> (8 * b)) & 0xff);
  }
  WriteTextFile(path, raw);
}

std::string ContainerFileName(TrixelId id) { return "c" + std::to_string(id.value()) + ".skya"; }

int CountDepthFor(int storage_depth) { return std::min(storage_depth + 2, kMaxLevel); }

// Sorts objects into container order: (Locate at count depth, obj_id).
void SortForContainer(std::vector<SkyObject>& objects, int count_depth) {
  std::vector<std::pair<std::uint64_t, std::size_t>> keys(objects.size());
  for (std::size_t i = 0; i < objects.size(); ++i) {
    keys[i] = {Locate(objects[i].pos, count_depth).value(), i};
  }
  std::sort(keys.begin(), keys.end(), [&](const auto& a, const auto& b) {
    if (a.first != b.first) return a.first < b.first;
    return objects[a.second].obj_id < objects[b.second].obj_id;
  });
  std::vector<SkyObject> sorted;
  sorted.reserve(objects.size());
  for (const auto& [_, i] : keys) sorted.push_back(std::move(objects[i]));
  objects = std::move(sorted);
}

void WriteContainer(const fs::path& dir, TrixelId id, const Schema& schema,
                    const std::vector<SkyObject>& objects) {
  const std::vector<TrixelId> homes(objects.size(), id);
  const auto bytes = EncodeContainer(id, schema, objects, homes);
  WriteFile(dir / ContainerFileName(id), bytes.data(), bytes.size());
}

void LinkOrCopy(const fs::path& from, const fs::path& to) {
  std::error_code ec;
  fs::create_hard_link(from, to, ec);
  if (ec) fs::copy_file(from, to, fs::copy_options::overwrite_existing);
}

// Publishes a fully written staging directory as `version` and prunes
// versions older than the previous one.
fs::path Publish(const fs::path& root, const fs::path& staging, std::uint64_t version) {
  const fs::path final_dir = root / VersionName(version);
  fs::remove_all(final_dir);
  fs::rename(staging, final_dir);
  const fs::path tmp = root / (std::string(kCurrentFile) + ".tmp");
  WriteTextFile(tmp, VersionName(version) + "\n");
  fs::rename(tmp, root / kCurrentFile);
  for (const auto& entry : fs::directory_iterator(root)) {
    const std::string name = entry.path().filename().string();
    if (name.size() == 9 && name[0] == 'v') {
      const std::uint64_t v = std::stoull(name.substr(1));
      if (v + 1 < version) {
        std::error_code ec;
        fs::remove_all(entry.path(), ec);
      }
    }
  }
  return final_dir;
}

// Removes the staging directory unless released.
class StagingGuard {
 public:
  explicit StagingGuard(fs::path dir) : dir_(std::move(dir)) {}
  ~StagingGuard() {
    if (!dir_.empty()) {
      std::error_code ec;
      fs::remove_all(dir_, ec);
    }
  }
  void Release() { dir_.clear(); }

 private:
  fs::path dir_;
};

fs::path MakeStaging(const fs::path& root, std::uint64_t version) {
  const fs::path dir = root / (".staging-" + VersionName(version));
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

}  // namespace

std::string CatalogMeta::ToText() const {
  std::ostringstream out;
  out << "# skyq catalog metadata\n";
  out << "format_version=" << format_version << "\n";
  out << "version=" << version << "\n";
  out << "storage_depth=" << storage_depth << "\n";
  out << "count_depth=" << count_depth() << "\n";
  out << "schema=";
  for (std::size_t i = 0; i < schema.extras.size(); ++i) {
    out << (i ? "," : "") << schema.extras[i];
  }
  out << "\n";
  out << "total=" << total << "\n";
  for (const auto& h : load_history) out << "load=" << h << "\n";
  for (const auto& [id, n] : container_counts) out << "container." << id.value() << "=" << n << "\n";
  for (const auto& [id, n] : fine_counts.entries()) out << "fine." << id << "=" << n << "\n";
  return out.str();
}

CatalogMeta CatalogMeta::FromText(const std::string& text, const std::string& source) {
  CatalogMeta meta;
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  int count_depth = -1;
  std::vector<std::pair<std::uint64_t, std::uint64_t>> fine;
  auto bad = [&](const std::string& why) {
    return IntegrityError(source + ":" + std::to_string(lineno) + ": " + why);
  };
  try {
    while (std::getline(in, line)) {
      ++lineno;
      if (line.empty() || line[0] == '#') continue;
      const auto eq = line.find('=');
      if (eq == std::string::npos) throw bad("expected key=value");
      const std::string key = line.substr(0, eq);
      const std::string value = line.substr(eq + 1);
      if (key == "format_version") {
        meta.format_version = std::stoi(value);
      } else if (key == "version") {
        meta.version = std::stoull(value);
      } else if (key == "storage_depth") {
        meta.storage_depth = std::stoi(value);
      } else if (key == "count_depth") {
        count_depth = std::stoi(value);
      } else if (key == "schema") {
        std::istringstream names(value);
        std::string name;
        while (std::getline(names, name, ',')) meta.schema.extras.push_back(name);
      } else if (key == "total") {
        meta.total = std::stoull(value);
      } else if (key == "load") {
        meta.load_history.push_back(value);
      } else if (key.rfind("container.", 0) == 0) {
        meta.container_counts[TrixelId(std::stoull(key.substr(10)))] = std::stoull(value);
      } else if (key.rfind("fine.", 0) == 0) {
        fine.emplace_back(std::stoull(key.substr(5)), std::stoull(value));
      } else {
        throw bad("unknown key '" + key + "'");
      }
    }
  } catch (const std::invalid_argument&) {
    throw bad("malformed number");
  } catch (const std::out_of_range&) {
    throw bad("number out of range");
  }
  if (meta.format_version != kFormatVersion) {
    throw IntegrityError(source + ": unsupported format version");
  }
  if (meta.storage_depth < 0 || meta.storage_depth > kMaxLevel) {
    throw IntegrityError(source + ": storage_depth out of range");
  }
  if (count_depth < 0) count_depth = CountDepthFor(meta.storage_depth);
  meta.fine_counts = TrixelCounts(count_depth);
  try {
    for (const auto& [id, n] : fine) meta.fine_counts.Add(TrixelId(id), n);
  } catch (const DomainError& e) {
    throw IntegrityError(source + ": " + e.what());
  }
  std::uint64_t sum = 0;
  for (const auto& [id, n] : meta.container_counts) {
    if (!id.valid() || id.level() != meta.storage_depth) {
      throw IntegrityError(source + ": container " + std::to_string(id.value()) +
                           " is not at the storage depth");
    }
    sum += n;
  }
  if (sum != meta.total) throw IntegrityError(source + ": container counts do not sum to total");
  return meta;
}

Catalog Catalog::Create(const fs::path& root, const Schema& schema, int storage_depth) {
  if (storage_depth < 0 || storage_depth > kMaxLevel) {
    throw DomainError("storage depth " + std::to_string(storage_depth) + " outside [0, 24]");
  }
  if (Exists(root)) throw ConflictError(root.string() + ": catalog already exists");
  fs::create_directories(root);
  CatalogMeta meta;
  meta.schema = schema;
  meta.storage_depth = storage_depth;
  meta.fine_counts = TrixelCounts(CountDepthFor(storage_depth));
  const fs::path staging = MakeStaging(root, 0);
  StagingGuard guard(staging);
  WriteTextFile(staging / kMetaFile, meta.ToText());
  WriteIds(staging / kIdsFile, {});
  const fs::path dir = Publish(root, staging, 0);
  guard.Release();
  return Catalog(root, dir, std::move(meta));
}

bool Catalog::Exists(const fs::path& root) { return fs::exists(root / kCurrentFile); }

Catalog Catalog::Open(const fs::path& root) {
  if (!Exists(root)) throw IoError(root.string() + ": no catalog found");
  std::string current = ReadTextFile(root / kCurrentFile);
  while (!current.empty() && (current.back() == '\n' || current.back() == '\r')) current.pop_back();
  const fs::path dir = root / current;
  const fs::path meta_path = dir / kMetaFile;
  CatalogMeta meta = CatalogMeta::FromText(ReadTextFile(meta_path), meta_path.string());
  return Catalog(root, dir, std::move(meta));
}

void Catalog::Refresh() { *this = Open(root_); }

std::vector<TrixelId> Catalog::Containers() const {
  std::vector<TrixelId> ids;
  ids.reserve(meta_.container_counts.size());
  for (const auto& [id, n] : meta_.container_counts) {
    if (n > 0) ids.push_back(id);
  }
  return ids;
}

fs::path Catalog::ContainerPath(TrixelId id) const { return version_dir_ / ContainerFileName(id); }

ContainerReader Catalog::OpenContainer(TrixelId id, IoCounters* counters) const {
  ContainerReader reader(ContainerPath(id), meta_.schema, counters);
  if (reader.header().trixel != id) {
    throw IntegrityError(reader.path().string() + ": header names trixel " +
                         std::to_string(reader.header().trixel.value()));
  }
  return reader;
}

LoadReport Catalog::Ingest(const Chunk& chunk) {
  const auto start = std::chrono::steady_clock::now();
  LoadReport report;
  const int depth = meta_.storage_depth;
  const int count_depth = meta_.count_depth();

  for (const auto& o : chunk.objects) {
    if (o.extras.size() != meta_.schema.extras.size()) {
      throw DomainError(chunk.source + ": object " + std::to_string(o.obj_id) + " has " +
                        std::to_string(o.extras.size()) + " extras, catalog schema has " +
                        std::to_string(meta_.schema.extras.size()));
    }
  }
  std::vector<std::uint64_t> new_ids(chunk.objects.size());
  std::transform(chunk.objects.begin(), chunk.objects.end(), new_ids.begin(),
                 [](const SkyObject& o) { return o.obj_id; });
  std::sort(new_ids.begin(), new_ids.end());
  if (auto dup = std::adjacent_find(new_ids.begin(), new_ids.end()); dup != new_ids.end()) {
    throw ConflictError(chunk.source + ": duplicate obj_id " + std::to_string(*dup) +
                        " within chunk");
  }
  const std::vector<std::uint64_t> old_ids = ReadIds(version_dir_ / kIdsFile);
  {
    std::vector<std::uint64_t> common;
    std::set_intersection(old_ids.begin(), old_ids.end(), new_ids.begin(), new_ids.end(),
                          std::back_inserter(common));
    if (!common.empty()) {
      throw ConflictError(chunk.source + ": obj_id " + std::to_string(common.front()) +
                          " already in catalog (" + std::to_string(common.size()) +
                          " duplicates); chunk rejected");
    }
  }

  // Phase 1: home container of every object and the set of containers needed.
  std::map<TrixelId, std::vector<std::size_t>> groups;
  std::vector<TrixelId> fine(chunk.objects.size());
  for (std::size_t i = 0; i < chunk.objects.size(); ++i) {
    const UnitVec& p = chunk.objects[i].pos;
    groups[Locate(p, depth)].push_back(i);
    fine[i] = Locate(p, count_depth);
  }

  // Phase 2: each affected container is rewritten exactly once.
  CatalogMeta next = meta_;
  next.version = meta_.version + 1;
  const fs::path staging = MakeStaging(root_, next.version);
  StagingGuard guard(staging);
  for (const auto& [id, n] : meta_.container_counts) {
    if (n > 0 && !groups.count(id)) {
      LinkOrCopy(ContainerPath(id), staging / ContainerFileName(id));
    }
  }
  for (const auto& [id, members] : groups) {
    ++report.touches[id];
    std::vector<SkyObject> objects;
    auto existing = meta_.container_counts.find(id);
    if (existing != meta_.container_counts.end() && existing->second > 0) {
      objects = OpenContainer(id).ReadFull();
    }
    objects.reserve(objects.size() + members.size());
    for (std::size_t i : members) objects.push_back(chunk.objects[i]);
    SortForContainer(objects, count_depth);
    WriteContainer(staging, id, meta_.schema, objects);
    next.container_counts[id] = objects.size();
  }
  for (std::size_t i = 0; i < fine.size(); ++i) next.fine_counts.Add(fine[i], 1);
  next.total = meta_.total + chunk.objects.size();
  next.load_history.push_back(chunk.source.empty() ? "<memory>" : chunk.source);

  std::vector<std::uint64_t> merged;
  merged.reserve(old_ids.size() + new_ids.size());
  std::merge(old_ids.begin(), old_ids.end(), new_ids.begin(), new_ids.end(),
             std::back_inserter(merged));
  WriteIds(staging / kIdsFile, merged);
  WriteTextFile(staging / kMetaFile, next.ToText());
  version_dir_ = Publish(root_, staging, next.version);
  guard.Release();
  meta_ = std::move(next);

  report.objects_loaded = chunk.objects.size();
  report.duration = std::chrono::steady_clock::now() - start;
  return report;
}

std::uint64_t Mix64(std::uint64_t z) {
  z ^= z >> 30;
  z *= 0xbf58476d1ce4e5b9ULL;
  z ^= z >> 27;
  z *= 0x94d049bb133111ebULL;
  z ^= z >> 31;
  return z;
}

bool SampleKeeps(std::uint64_t obj_id, double fraction, std::uint64_t seed) {
  if (fraction >= 1.0) return true;
  return std::ldexp(static_cast<double>(Mix64(obj_id ^ seed)), -64) < fraction;
}

Catalog Sample(const Catalog& source, const fs::path& dest, double fraction, std::uint64_t seed) {
  if (!(fraction > 0.0 && fraction <= 1.0)) {
    throw DomainError("sample fraction " + std::to_string(fraction) + " outside (0, 1]");
  }
  if (Catalog::Exists(dest)) throw ConflictError(dest.string() + ": catalog already exists");
  Catalog out = Catalog::Create(dest, source.schema(), source.storage_depth());
  CatalogMeta meta = out.meta();
  meta.version = 1;
  const fs::path staging = MakeStaging(dest, meta.version);
  StagingGuard guard(staging);
  std::vector<std::uint64_t> ids;
  for (TrixelId id : source.Containers()) {
    std::vector<SkyObject> kept;
    for (auto& o : source.OpenContainer(id).ReadFull()) {
      if (SampleKeeps(o.obj_id, fraction, seed)) kept.push_back(std::move(o));
    }
    if (kept.empty()) continue;
    // Source order is container order, so the kept subsequence already is.
    for (const auto& o : kept) {
      ids.push_back(o.obj_id);
      meta.fine_counts.Add(Locate(o.pos, meta.count_depth()), 1);
    }
    WriteContainer(staging, id, meta.schema, kept);
    meta.container_counts[id] = kept.size();
    meta.total += kept.size();
  }
  std::sort(ids.begin(), ids.end());
  char history[96];
  std::snprintf(history, sizeof(history), "sample fraction=%.17g seed=%" PRIu64, fraction, seed);
  meta.load_history.push_back(history);
  WriteIds(staging / kIdsFile, ids);
  WriteTextFile(staging / kMetaFile, meta.ToText());
  Publish(dest, staging, meta.version);
  guard.Release();
  return Catalog::Open(dest);
}

CatalogStats Stats(const Catalog& catalog) {
  CatalogStats s;
  constexpr double kInf = std::numeric_limits<double>::infinity();
  s.mag_min.fill(kInf);
  s.mag_max.fill(-kInf);
  s.size_min = kInf;
  s.size_max = -kInf;
  for (TrixelId id : catalog.Containers()) {
    ContainerReader reader = catalog.OpenContainer(id);
    const std::uint64_t expected = catalog.meta().container_counts.at(id);
    if (reader.header().count != expected) {
      throw IntegrityError(reader.path().string() + ": header count " +
                           std::to_string(reader.header().count) + " but meta records " +
                           std::to_string(expected));
    }
    for (const TagRecord& t : reader.ReadTags()) {
      for (int b = 0; b < kNumBands; ++b) {
        s.mag_min[b] = std::min(s.mag_min[b], t.mag[b]);
        s.mag_max[b] = std::max(s.mag_max[b], t.mag[b]);
      }
      s.size_min = std::min(s.size_min, t.size_arcsec);
      s.size_max = std::max(s.size_max, t.size_arcsec);
    }
    s.container_counts[id] = reader.header().count;
    s.total += reader.header().count;
  }
  if (s.total != catalog.meta().total) {
    throw IntegrityError(catalog.version_dir().string() + ": containers hold " +
                         std::to_string(s.total) + " objects, meta records " +
                         std::to_string(catalog.meta().total));
  }
  return s;
}

void Audit(const Catalog& catalog) {
  const int depth = catalog.storage_depth();
  const int count_depth = catalog.meta().count_depth();
  std::vector<std::uint64_t> ids;
  for (TrixelId id : catalog.Containers()) {
    ContainerReader reader = catalog.OpenContainer(id);
    const auto tags = reader.ReadTags();
    const auto full = reader.ReadFull();
    const std::string file = reader.path().string();
    std::pair<std::uint64_t, std::uint64_t> previous{0, 0};
    for (std::size_t i = 0; i < full.size(); ++i) {
      if (!TagMatches(tags[i], full[i]) || tags[i].home_trixel != id) {
        throw IntegrityError(file + ": tag record " + std::to_string(i) +
                             " disagrees with its full record");
      }
      if (Locate(full[i].pos, depth) != id) {
        throw IntegrityError(file + ": object " + std::to_string(full[i].obj_id) +
                             " is outside its container trixel");
      }
      const std::pair<std::uint64_t, std::uint64_t> key{
          Locate(full[i].pos, count_depth).value(), full[i].obj_id};
      if (i > 0 && !(previous < key)) {
        throw IntegrityError(file + ": records out of container order at " + std::to_string(i));
      }
      previous = key;
      ids.push_back(full[i].obj_id);
    }
  }
  std::sort(ids.begin(), ids.end());
  if (ids != ReadIds(catalog.version_dir() / kIdsFile)) {
    throw IntegrityError(catalog.version_dir().string() + ": id index disagrees with containers");
  }
}

}  // namespace skyq
