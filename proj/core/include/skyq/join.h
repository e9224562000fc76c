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

// Pairwise searches by spatial hashing: objects are bucketed by trixel,
// replicated into every neighbouring bucket their search cap reaches, and
// compared bucket by bucket.

#ifndef SKYQ_JOIN_H_
#define SKYQ_JOIN_H_

#include <functional>
#include <string>

#include "skyq/exec.h"

namespace skyq {

using PairPredicate = std::function<bool(const SkyObject& a, const SkyObject& b)>;

struct JoinSpec {
  enum class Mode {
    // Unordered pairs, reported once with obj_a < obj_b.
    kSymmetric,
    // Ordered (primary, companion) pairs with obj_a the primary.
    kAsymmetric,
  };
  Mode mode = Mode::kSymmetric;
  double radius_arcsec = 10;
  RecordFilter primary;    // kSymmetric: applies to both sides; empty accepts all
  RecordFilter companion;  // kAsymmetric only
  PairPredicate pair;      // empty accepts all
  Projection projection = Projection::kTag;
};

// Throws ConfigError unless radius > 0 and the minimum trixel inradius at
// `level` exceeds twice the radius.
void ValidateBucketLevel(int level, double radius_arcsec);

PairStream HashJoin(const Catalog& catalog, JoinSpec spec, const EngineConfig& config);

struct LensOptions {
  double radius_arcsec = 10;
  // Largest allowed |color(a) - color(b)| over u-g, g-r, r-i, i-z.
  double color_eps_mag = 0.05;
};

PairStream LensSearch(const Catalog& catalog, const LensOptions& options,
                      const EngineConfig& config);

struct CompanionOptions {
  double radius_arcsec = 5;
  std::string primary = "class = QSO AND r < 22";
  // Built from faint_g and blue_gr when empty.
  std::string companion;
  double faint_g = 20.0;
  double blue_gr = 0.4;
  const FrameRegistry* frames = nullptr;

  std::string CompanionFilter() const;
};

// Throws ParseError / PlanError for bad filters, ConfigError for bad radius.
PairStream CompanionSearch(const Catalog& catalog, const CompanionOptions& options,
                           const EngineConfig& config);

}  // namespace skyq

#endif  // SKYQ_JOIN_H_
