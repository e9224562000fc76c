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

#include "skyq/sphere.h"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <limits>
#include <sstream>

#include "skyq/error.h"

namespace skyq {

namespace {

std::string Upper(std::string_view s) {
  std::string out(s);
  for (auto& c : out) c = static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
  return out;
}

// Inverse transpose via cofactors.
Mat3 InverseTransposed(const Mat3& a) {
  const auto& m = a.m;
  Mat3 c;
  c.m[0][0] = m[1][1] * m[2][2] - m[1][2] * m[2][1];
  c.m[0][1] = m[1][2] * m[2][0] - m[1][0] * m[2][2];
  c.m[0][2] = m[1][0] * m[2][1] - m[1][1] * m[2][0];
  c.m[1][0] = m[0][2] * m[2][1] - m[0][1] * m[2][2];
  c.m[1][1] = m[0][0] * m[2][2] - m[0][2] * m[2][0];
  c.m[1][2] = m[0][1] * m[2][0] - m[0][0] * m[2][1];
  c.m[2][0] = m[0][1] * m[1][2] - m[0][2] * m[1][1];
  c.m[2][1] = m[0][2] * m[1][0] - m[0][0] * m[1][2];
  c.m[2][2] = m[0][0] * m[1][1] - m[0][1] * m[1][0];
  const double det = a.Determinant();
  for (auto& row : c.m)
    for (auto& v : row) v /= det;
  return c;
}

// Newton iteration toward the nearest rotation (polar decomposition).
Mat3 Orthonormalize(Mat3 r) {
  for (int iter = 0; iter < 20; ++iter) {
    const Mat3 it = InverseTransposed(r);
    Mat3 next;
    double delta = 0;
    for (int i = 0; i < 3; ++i) {
      for (int j = 0; j < 3; ++j) {
        next.m[i][j] = 0.5 * (r.m[i][j] + it.m[i][j]);
        delta = std::max(delta, std::abs(next.m[i][j] - r.m[i][j]));
      }
    }
    r = next;
    if (delta < 1e-17) break;
  }
  return r;
}

}  // namespace

UnitVec UnitVec::Normalize(const Vec3& v) {
  const double n = v.Norm();
  if (!(n > 0) || !std::isfinite(n)) {
    throw DomainError("cannot normalize a zero or non-finite vector");
  }
  return UnitVec(v.x / n, v.y / n, v.z / n);
}

Vec3 Mat3::Apply(const Vec3& v) const {
  return {m[0][0] * v.x + m[0][1] * v.y + m[0][2] * v.z,
          m[1][0] * v.x + m[1][1] * v.y + m[1][2] * v.z,
          m[2][0] * v.x + m[2][1] * v.y + m[2][2] * v.z};
}

Vec3 Mat3::ApplyTransposed(const Vec3& v) const {
  return {m[0][0] * v.x + m[1][0] * v.y + m[2][0] * v.z,
          m[0][1] * v.x + m[1][1] * v.y + m[2][1] * v.z,
          m[0][2] * v.x + m[1][2] * v.y + m[2][2] * v.z};
}

Mat3 Mat3::Transposed() const {
  Mat3 t;
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) t.m[i][j] = m[j][i];
  return t;
}

Mat3 Mat3::operator*(const Mat3& o) const {
  Mat3 r;
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j)
      r.m[i][j] = m[i][0] * o.m[0][j] + m[i][1] * o.m[1][j] + m[i][2] * o.m[2][j];
  return r;
}

double Mat3::Determinant() const {
  return m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1]) -
         m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0]) +
         m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0]);
}

double Mat3::OrthonormalityError() const {
  const Mat3 p = Transposed() * *this;
  double err = 0;
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) err = std::max(err, std::abs(p.m[i][j] - (i == j ? 1.0 : 0.0)));
  return err;
}

Mat3 RotationFromPole(double pole_ra_deg, double pole_dec_deg, double ncp_lon_deg) {
  const double ra = pole_ra_deg * kDegToRad;
  const double dec = pole_dec_deg * kDegToRad;
  // Ascending node of the frame's equator on the base equator, and its
  // longitude measured in the frame.
  const double node_lon = (ncp_lon_deg - 90.0) * kDegToRad;
  const Vec3 z{std::cos(dec) * std::cos(ra), std::cos(dec) * std::sin(ra), std::sin(dec)};
  const Vec3 node{-std::sin(ra), std::cos(ra), 0.0};
  const Vec3 ahead = z.Cross(node);
  const double c = std::cos(node_lon), s = std::sin(node_lon);
  const Vec3 x = node * c - ahead * s;
  const Vec3 y = node * s + ahead * c;
  // Columns are the frame axes expressed in base coordinates.
  return {{{{x.x, y.x, z.x}, {x.y, y.y, z.y}, {x.z, y.z, z.z}}}};
}

const Frame& Frame::Equatorial() {
  static const Frame frame(Kind::kEquatorial, "EQUATORIAL", Mat3::Identity());
  return frame;
}

const Frame& Frame::Galactic() {
  static const Frame frame(Kind::kGalactic, "GALACTIC",
                           Orthonormalize(RotationFromPole(192.85948, 27.12825, 122.93192)));
  return frame;
}

Frame Frame::Custom(std::string name, const Mat3& rotation) {
  for (const auto& row : rotation.m)
    for (double v : row)
      if (!std::isfinite(v)) throw DomainError("frame " + name + ": non-finite matrix entry");
  if (rotation.OrthonormalityError() > 1e-6 || rotation.Determinant() < 0) {
    throw DomainError("frame " + name + ": matrix is not a proper rotation");
  }
  return Frame(Kind::kCustom, Upper(name), Orthonormalize(rotation));
}

Vec3 Frame::Pole() const { return {rotation_.m[0][2], rotation_.m[1][2], rotation_.m[2][2]}; }

FrameRegistry::FrameRegistry() {
  frames_.emplace("EQUATORIAL", Frame::Equatorial());
  frames_.emplace("GALACTIC", Frame::Galactic());
}

const Frame& FrameRegistry::Find(std::string_view name) const {
  auto it = frames_.find(Upper(name));
  if (it == frames_.end()) throw DomainError("unknown frame '" + std::string(name) + "'");
  return it->second;
}

bool FrameRegistry::Contains(std::string_view name) const {
  return frames_.count(Upper(name)) != 0;
}

void FrameRegistry::Add(Frame frame) {
  const std::string key = frame.name();
  frames_.insert_or_assign(key, std::move(frame));
}

void FrameRegistry::LoadFile(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DomainError("cannot read frame file " + path.string());
  std::stringstream buf;
  buf << in.rdbuf();
  LoadText(buf.str(), path.string());
}

void FrameRegistry::LoadText(std::string_view text, std::string_view source) {
  std::istringstream in{std::string(text)};
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (auto hash = line.find('#'); hash != std::string::npos) line.resize(hash);
    std::istringstream fields(line);
    std::string name;
    if (!(fields >> name)) continue;
    Mat3 r;
    for (auto& row : r.m) {
      for (auto& v : row) {
        if (!(fields >> v)) {
          throw DomainError(std::string(source) + ":" + std::to_string(lineno) +
                            ": expected 9 matrix entries after frame name");
        }
      }
    }
    std::string extra;
    if (fields >> extra) {
      throw DomainError(std::string(source) + ":" + std::to_string(lineno) +
                        ": trailing text after 9 matrix entries");
    }
    const std::string upper = Upper(name);
    if (upper == "EQUATORIAL" || upper == "GALACTIC") {
      throw DomainError(std::string(source) + ":" + std::to_string(lineno) +
                        ": built-in frame " + upper + " cannot be redefined");
    }
    Add(Frame::Custom(name, r));
  }
}

std::vector<std::string> FrameRegistry::Names() const {
  std::vector<std::string> names;
  for (const auto& [k, _] : frames_) names.push_back(k);
  return names;
}

UnitVec FromLonLat(double lon_deg, double lat_deg, const Frame& frame) {
  if (!std::isfinite(lon_deg) || !std::isfinite(lat_deg)) {
    throw DomainError("longitude/latitude must be finite");
  }
  if (lat_deg < -90.0 || lat_deg > 90.0) {
    throw DomainError("latitude " + std::to_string(lat_deg) + " outside [-90, 90]");
  }
  const double lon = std::fmod(lon_deg, 360.0) * kDegToRad;
  const double lat = lat_deg * kDegToRad;
  const Vec3 local{std::cos(lat) * std::cos(lon), std::cos(lat) * std::sin(lon), std::sin(lat)};
  if (frame.kind() == Frame::Kind::kEquatorial) return UnitVec::Normalize(local);
  return UnitVec::Normalize(frame.rotation().Apply(local));
}

LonLat ToLonLat(const UnitVec& v, const Frame& frame) {
  const Vec3 local = frame.kind() == Frame::Kind::kEquatorial
                         ? v.vec()
                         : frame.rotation().ApplyTransposed(v.vec());
  const double rho = std::hypot(local.x, local.y);
  LonLat out;
  out.lat_deg = std::atan2(local.z, rho) / kDegToRad;
  if (rho == 0.0) return out;
  double lon = std::atan2(local.y, local.x) / kDegToRad;
  if (lon < 0) lon += 360.0;
  if (lon >= 360.0) lon = 0.0;
  out.lon_deg = lon;
  return out;
}

double AngularDistance(const UnitVec& a, const UnitVec& b) {
  return std::atan2(a.Cross(b).Norm(), a.Dot(b));
}

HalfSpace Cap(const UnitVec& center, double radius_arcsec) {
  if (!(radius_arcsec >= 0) || radius_arcsec > 180.0 * 3600.0) {
    throw DomainError("cap radius " + std::to_string(radius_arcsec) +
                      " arcsec outside [0, 648000]");
  }
  if (radius_arcsec == 180.0 * 3600.0) return {center, -1.0};
  return {center, std::cos(ArcsecToRadians(radius_arcsec))};
}

Convex LatitudeBand(const Frame& frame, double lat_min_deg, double lat_max_deg) {
  if (!(lat_min_deg >= -90.0) || !(lat_max_deg <= 90.0)) {
    throw DomainError("latitude band bounds outside [-90, 90]");
  }
  if (lat_min_deg > lat_max_deg) throw DomainError("latitude band bounds are inverted");
  const UnitVec pole = UnitVec::Normalize(frame.Pole());
  auto sin_deg = [](double deg) {
    // Exact at the poles so the whole-sky band has offsets of exactly -1.
    if (deg == 90.0) return 1.0;
    if (deg == -90.0) return -1.0;
    return std::sin(deg * kDegToRad);
  };
  return Convex{{HalfSpace{pole, sin_deg(lat_min_deg)}, HalfSpace{-pole, -sin_deg(lat_max_deg)}}};
}

bool Region::IsWholeSky() const {
  for (const auto& c : convexes) {
    bool whole = true;
    for (const auto& h : c.constraints) {
      if (h.offset > -1.0) {
        whole = false;
        break;
      }
    }
    if (whole) return true;
  }
  return false;
}

bool RegionMembership(const Region& r, const UnitVec& p) { return r.Contains(p); }

Region RegionUnion(const Region& a, const Region& b) {
  Region out = a;
  out.convexes.insert(out.convexes.end(), b.convexes.begin(), b.convexes.end());
  return out;
}

Region RegionIntersection(const Region& a, const Region& b) {
  Region out;
  out.convexes.reserve(a.convexes.size() * b.convexes.size());
  for (const auto& ca : a.convexes) {
    for (const auto& cb : b.convexes) {
      Convex c = ca;
      c.constraints.insert(c.constraints.end(), cb.constraints.begin(), cb.constraints.end());
      out.convexes.push_back(std::move(c));
    }
  }
  return out;
}

}  // namespace skyq
