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

// Spherical geometry primitives: unit vectors, coordinate frames, angular
// distance and the half-space region algebra every spatial query reduces to.
//
// A half-space {p : n.p >= d} cuts the unit sphere in a spherical cap. A
// Convex is a conjunction of half-spaces and a Region a disjunction of
// convexes, so arbitrary Boolean combinations of caps and latitude bands in
// any frame can be expressed in normal form.

#ifndef SKYQ_SPHERE_H_
#define SKYQ_SPHERE_H_

#include <array>
#include <cmath>
#include <filesystem>
#include <map>
#include <string>
#include <string_view>
#include <vector>

namespace skyq {

inline constexpr double kPi = 3.14159265358979323846;
inline constexpr double kDegToRad = kPi / 180.0;
inline constexpr double kArcsecToRad = kPi / (180.0 * 3600.0);

inline double ArcsecToRadians(double arcsec) { return arcsec * kArcsecToRad; }
inline double RadiansToArcsec(double rad) { return rad / kArcsecToRad; }

// Plain 3-vector; no normalization invariant.
struct Vec3 {
  double x = 0, y = 0, z = 0;

  Vec3 operator+(const Vec3& o) const { return {x + o.x, y + o.y, z + o.z}; }
  Vec3 operator-(const Vec3& o) const { return {x - o.x, y - o.y, z - o.z}; }
  Vec3 operator*(double s) const { return {x * s, y * s, z * s}; }
  Vec3 operator-() const { return {-x, -y, -z}; }
  double Dot(const Vec3& o) const { return x * o.x + y * o.y + z * o.z; }
  Vec3 Cross(const Vec3& o) const {
    return {y * o.z - z * o.y, z * o.x - x * o.z, x * o.y - y * o.x};
  }
  double Norm() const { return std::sqrt(Dot(*this)); }
  bool operator==(const Vec3&) const = default;
};

// A point on the unit sphere. Constructed only through Normalize() (or
// Unchecked() for values already known to be unit length, e.g. decoded from
// a container file).
class UnitVec {
 public:
  UnitVec() = default;  // (1, 0, 0)

  // Throws DomainError for a zero or non-finite vector.
  static UnitVec Normalize(const Vec3& v);
  static UnitVec Normalize(double x, double y, double z) { return Normalize(Vec3{x, y, z}); }
  static UnitVec Unchecked(double x, double y, double z) { return UnitVec(x, y, z); }

  double x() const { return v_.x; }
  double y() const { return v_.y; }
  double z() const { return v_.z; }
  const Vec3& vec() const { return v_; }

  double Dot(const UnitVec& o) const { return v_.Dot(o.v_); }
  double Dot(const Vec3& o) const { return v_.Dot(o); }
  Vec3 Cross(const UnitVec& o) const { return v_.Cross(o.v_); }
  UnitVec operator-() const { return UnitVec(-v_.x, -v_.y, -v_.z); }
  bool operator==(const UnitVec&) const = default;

 private:
  UnitVec(double x, double y, double z) : v_{x, y, z} {}
  Vec3 v_{1, 0, 0};
};

// Row-major 3x3 matrix.
struct Mat3 {
  std::array<std::array<double, 3>, 3> m{};

  static Mat3 Identity() { return {{{{1, 0, 0}, {0, 1, 0}, {0, 0, 1}}}}; }
  Vec3 Apply(const Vec3& v) const;
  Vec3 ApplyTransposed(const Vec3& v) const;
  Mat3 Transposed() const;
  Mat3 operator*(const Mat3& o) const;
  double Determinant() const;
  // Largest |(M^T M - I)_ij|.
  double OrthonormalityError() const;
};

// A celestial coordinate frame. `rotation` maps frame Cartesian coordinates
// to the base (equatorial) frame.
class Frame {
 public:
  enum class Kind { kEquatorial, kGalactic, kCustom };

  static const Frame& Equatorial();
  // J2000 galactic frame from the north galactic pole (192.85948, 27.12825)
  // and the galactic longitude of the north celestial pole, 122.93192 deg.
  static const Frame& Galactic();
  // Validates that `rotation` is a proper rotation (within 1e-6), then
  // re-orthonormalizes it so the stored matrix is orthonormal to ~1e-15.
  static Frame Custom(std::string name, const Mat3& rotation);

  Kind kind() const { return kind_; }
  const std::string& name() const { return name_; }
  const Mat3& rotation() const { return rotation_; }
  // The frame's +z axis (its north pole) in base coordinates.
  Vec3 Pole() const;

 private:
  Frame(Kind kind, std::string name, const Mat3& rotation)
      : kind_(kind), name_(std::move(name)), rotation_(rotation) {}
  Kind kind_;
  std::string name_;
  Mat3 rotation_;
};

// Builds the galactic rotation from pole and node constants. Exposed so
// other pole-defined frames (e.g. supergalactic) can be built the same way.
Mat3 RotationFromPole(double pole_ra_deg, double pole_dec_deg, double ncp_lon_deg);

// Name -> frame lookup. EQUATORIAL and GALACTIC are always present; more
// frames load from text files with lines `NAME r00 r01 r02 r10 ... r22`.
class FrameRegistry {
 public:
  FrameRegistry();

  // Case-insensitive. Throws DomainError for an unknown name.
  const Frame& Find(std::string_view name) const;
  bool Contains(std::string_view name) const;
  void Add(Frame frame);
  void LoadFile(const std::filesystem::path& path);
  void LoadText(std::string_view text, std::string_view source = "<text>");
  std::vector<std::string> Names() const;

 private:
  std::map<std::string, Frame> frames_;
};

struct LonLat {
  double lon_deg = 0;
  double lat_deg = 0;
};

// Throws DomainError if lat_deg is outside [-90, 90] or either input is not finite.
UnitVec FromLonLat(double lon_deg, double lat_deg, const Frame& frame = Frame::Equatorial());
// lon in [0, 360), lat in [-90, 90]; lon is 0 at the poles.
LonLat ToLonLat(const UnitVec& v, const Frame& frame = Frame::Equatorial());

// Radians in [0, pi], atan2 form so arcsecond separations keep full precision.
double AngularDistance(const UnitVec& a, const UnitVec& b);

// Closed half-space n.p >= d.
struct HalfSpace {
  UnitVec normal;
  double offset = -1;

  bool Contains(const UnitVec& p) const { return normal.Dot(p) >= offset; }
  // Closed complement; boundary points belong to both.
  HalfSpace Complement() const { return {-normal, -offset}; }
  bool operator==(const HalfSpace&) const = default;
};

// Conjunction of half-spaces. No constraints means the whole sky.
struct Convex {
  std::vector<HalfSpace> constraints;

  bool Contains(const UnitVec& p) const {
    for (const auto& h : constraints) {
      if (!h.Contains(p)) return false;
    }
    return true;
  }
  bool operator==(const Convex&) const = default;
};

// Disjunction of convexes. No convexes means the empty region.
struct Region {
  std::vector<Convex> convexes;

  static Region Whole() { return Region{{Convex{}}}; }
  static Region Empty() { return Region{}; }
  static Region Of(Convex c) { return Region{{std::move(c)}}; }
  static Region Of(HalfSpace h) { return Region{{Convex{{h}}}}; }

  bool Contains(const UnitVec& p) const {
    for (const auto& c : convexes) {
      if (c.Contains(p)) return true;
    }
    return false;
  }
  bool IsWholeSky() const;
  bool operator==(const Region&) const = default;
};

// Throws DomainError unless 0 <= radius <= 180 deg.
HalfSpace Cap(const UnitVec& center, double radius_arcsec);

// lat_min <= latitude <= lat_max in `frame`. Throws DomainError on inverted
// or out-of-range bounds.
Convex LatitudeBand(const Frame& frame, double lat_min_deg, double lat_max_deg);

bool RegionMembership(const Region& r, const UnitVec& p);
Region RegionUnion(const Region& a, const Region& b);
Region RegionIntersection(const Region& a, const Region& b);

}  // namespace skyq

#endif  // SKYQ_SPHERE_H_
