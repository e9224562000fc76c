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

#include "skyq/container_format.h"

#include <zlib.h>

#include <bit>
#include <cstring>
#include <fstream>

#include "skyq/error.h"

namespace skyq {

namespace {

class Writer {
 public:
  explicit Writer(std::vector<std::byte>& out) : out_(out) {}

  void U8(std::uint8_t v) { out_.push_back(static_cast<std::byte>(v)); }
  void U16(std::uint16_t v) { Le(v); }
  void U32(std::uint32_t v) { Le(v); }
  void U64(std::uint64_t v) { Le(v); }
  void F64(double v) { Le(std::bit_cast<std::uint64_t>(v)); }
  void Zeros(std::size_t n) { out_.insert(out_.end(), n, std::byte{0}); }
  void Raw(const char* p, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) U8(static_cast<std::uint8_t>(p[i]));
  }

 private:
  template <class T>
  void Le(T v) {
    for (std::size_t i = 0; i < sizeof(T); ++i) {
      out_.push_back(static_cast<std::byte>((v >> (8 * i)) & 0xff));
    }
  }
  std::vector<std::byte>& out_;
};

class Reader {
 public:
  explicit Reader(std::span<const std::byte> in) : in_(in) {}

  std::uint8_t U8() { return static_cast<std::uint8_t>(in_[pos_++]); }
  std::uint16_t U16() { return Le<std::uint16_t>(); }
  std::uint32_t U32() { return Le<std::uint32_t>(); }
  std::uint64_t U64() { return Le<std::uint64_t>(); }
  double F64() { return std::bit_cast<double>(Le<std::uint64_t>()); }
  void Skip(std::size_t n) { pos_ += n; }

 private:
  template <class T>
  T Le() {
    T v = 0;
    for (std::size_t i = 0; i < sizeof(T); ++i) {
      v |= static_cast<T>(static_cast<T>(in_[pos_ + i]) << (8 * i));
    }
    pos_ += sizeof(T);
    return v;
  }
  std::span<const std::byte> in_;
  std::size_t pos_ = 0;
};

void WriteCore(Writer& w, const SkyObject& o) {
  w.U64(o.obj_id);
  w.F64(o.pos.x());
  w.F64(o.pos.y());
  w.F64(o.pos.z());
  for (double m : o.mag) w.F64(m);
  w.F64(o.size_arcsec);
}

void ReadCore(Reader& r, SkyObject& o) {
  o.obj_id = r.U64();
  const double x = r.F64(), y = r.F64(), z = r.F64();
  o.pos = UnitVec::Unchecked(x, y, z);
  for (double& m : o.mag) m = r.F64();
  o.size_arcsec = r.F64();
}

ObjectClass ClassFromCode(std::uint8_t code, const std::filesystem::path& path) {
  if (code > static_cast<std::uint8_t>(ObjectClass::kUnknown)) {
    throw IntegrityError(path.string() + ": invalid class code " + std::to_string(code));
  }
  return static_cast<ObjectClass>(code);
}

}  // namespace

std::uint32_t Crc32(std::span<const std::byte> data) {
  uLong crc = crc32(0L, Z_NULL, 0);
  // zlib takes uInt lengths; feed large sections in pieces.
  const auto* p = reinterpret_cast<const Bytef*>(data.data());
  std::size_t left = data.size();
  while (left > 0) {
    const uInt n = static_cast<uInt>(std::min<std::size_t>(left, 1u << 30));
    crc = crc32(crc, p, n);
    p += n;
    left -= n;
  }
  return static_cast<std::uint32_t>(crc);
}

std::vector<std::byte> EncodeContainer(TrixelId trixel, const Schema& schema,
                                       std::span<const SkyObject> objects,
                                       std::span<const TrixelId> homes) {
  const std::size_t n = objects.size();
  const std::size_t full_size = FullRecordSize(schema);
  std::vector<std::byte> out;
  out.reserve(kContainerHeaderSize + n * (kTagRecordSize + full_size) + 2 * kCrcSize);
  Writer w(out);
  w.Raw(kContainerMagic, 4);
  w.U16(kFormatVersion);
  w.U64(trixel.value());
  w.U64(n);
  w.U64(n * kTagRecordSize);
  w.U64(schema.Hash());

  const std::size_t tag_begin = out.size();
  for (std::size_t i = 0; i < n; ++i) {
    const SkyObject& o = objects[i];
    WriteCore(w, o);
    w.U64(homes[i].value());
    w.U8(static_cast<std::uint8_t>(o.cls));
    w.Zeros(7);
  }
  w.U32(Crc32(std::span(out).subspan(tag_begin, n * kTagRecordSize)));

  const std::size_t full_begin = out.size();
  for (const SkyObject& o : objects) {
    if (o.extras.size() != schema.extras.size()) {
      throw DomainError("object " + std::to_string(o.obj_id) + " has " +
                        std::to_string(o.extras.size()) + " extras, schema has " +
                        std::to_string(schema.extras.size()));
    }
    WriteCore(w, o);
    w.U8(static_cast<std::uint8_t>(o.cls));
    w.Zeros(7);
    for (double e : o.extras) w.F64(e);
  }
  w.U32(Crc32(std::span(out).subspan(full_begin, n * full_size)));
  return out;
}

ContainerReader::ContainerReader(std::filesystem::path path, const Schema& schema,
                                 IoCounters* counters)
    : path_(std::move(path)), schema_(schema), counters_(counters) {
  std::error_code ec;
  file_size_ = std::filesystem::file_size(path_, ec);
  if (ec) throw IoError(path_.string() + ": " + ec.message());
  std::ifstream in(path_, std::ios::binary);
  if (!in) throw IoError(path_.string() + ": cannot open");
  std::vector<std::byte> buf(kContainerHeaderSize);
  if (!in.read(reinterpret_cast<char*>(buf.data()), static_cast<std::streamsize>(buf.size()))) {
    throw IntegrityError(path_.string() + ": truncated header");
  }
  if (counters_) {
    counters_->containers_opened.fetch_add(1, std::memory_order_relaxed);
    counters_->header_bytes.fetch_add(buf.size(), std::memory_order_relaxed);
  }
  if (std::memcmp(buf.data(), kContainerMagic, 4) != 0) {
    throw IntegrityError(path_.string() + ": bad magic");
  }
  Reader r(buf);
  r.Skip(4);
  header_.version = r.U16();
  header_.trixel = TrixelId(r.U64());
  header_.count = r.U64();
  header_.tag_bytes = r.U64();
  header_.schema_hash = r.U64();
  if (header_.version != kFormatVersion) {
    throw IntegrityError(path_.string() + ": unsupported format version " +
                         std::to_string(header_.version));
  }
  if (header_.schema_hash != schema_.Hash()) {
    throw IntegrityError(path_.string() + ": schema hash mismatch");
  }
  if (!header_.trixel.valid() || header_.tag_bytes != header_.count * kTagRecordSize) {
    throw IntegrityError(path_.string() + ": inconsistent header");
  }
  const std::uint64_t expected = kContainerHeaderSize + header_.tag_bytes + kCrcSize +
                                 header_.count * FullRecordSize(schema_) + kCrcSize;
  if (expected != file_size_) {
    throw IntegrityError(path_.string() + ": file size " + std::to_string(file_size_) +
                         " does not match header (expected " + std::to_string(expected) + ")");
  }
}

std::vector<std::byte> ContainerReader::ReadSection(std::uint64_t offset, std::uint64_t length,
                                                    bool tag) {
  std::ifstream in(path_, std::ios::binary);
  if (!in) throw IoError(path_.string() + ": cannot open");
  in.seekg(static_cast<std::streamoff>(offset));
  std::vector<std::byte> buf(length + kCrcSize);
  if (!in.read(reinterpret_cast<char*>(buf.data()), static_cast<std::streamsize>(buf.size()))) {
    throw IoError(path_.string() + ": short read");
  }
  if (counters_) {
    (tag ? counters_->tag_bytes : counters_->full_bytes)
        .fetch_add(buf.size(), std::memory_order_relaxed);
  }
  Reader crc_reader(std::span<const std::byte>(buf).subspan(length));
  const std::uint32_t stored = crc_reader.U32();
  buf.resize(length);
  if (Crc32(buf) != stored) {
    throw IntegrityError(path_.string() + ": " + (tag ? "tag" : "full") +
                         " section checksum mismatch");
  }
  return buf;
}

std::vector<TagRecord> ContainerReader::ReadTags() {
  const auto buf = ReadSection(kContainerHeaderSize, header_.tag_bytes, true);
  std::vector<TagRecord> out(header_.count);
  Reader r(buf);
  for (auto& t : out) {
    SkyObject o;
    ReadCore(r, o);
    t.obj_id = o.obj_id;
    t.x = o.pos.x();
    t.y = o.pos.y();
    t.z = o.pos.z();
    t.mag = o.mag;
    t.size_arcsec = o.size_arcsec;
    t.home_trixel = TrixelId(r.U64());
    t.cls = ClassFromCode(r.U8(), path_);
    r.Skip(7);
  }
  return out;
}

std::vector<SkyObject> ContainerReader::ReadFull() {
  const std::uint64_t offset = kContainerHeaderSize + header_.tag_bytes + kCrcSize;
  const auto buf = ReadSection(offset, header_.count * FullRecordSize(schema_), false);
  std::vector<SkyObject> out(header_.count);
  Reader r(buf);
  for (auto& o : out) {
    ReadCore(r, o);
    o.cls = ClassFromCode(r.U8(), path_);
    r.Skip(7);
    o.extras.resize(schema_.extras.size());
    for (double& e : o.extras) e = r.F64();
  }
  return out;
}

std::vector<SkyObject> ContainerReader::Read(Projection projection) {
  if (projection == Projection::kFull) return ReadFull();
  const auto buf = ReadSection(kContainerHeaderSize, header_.tag_bytes, true);
  std::vector<SkyObject> out(header_.count);
  Reader r(buf);
  for (auto& o : out) {
    ReadCore(r, o);
    r.Skip(8);
    o.cls = ClassFromCode(r.U8(), path_);
    r.Skip(7);
  }
  return out;
}

}  // namespace skyq
