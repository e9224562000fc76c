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

#include <algorithm>
#include <cmath>
#include <sstream>
#include <unordered_map>

#include "skyq/error.h"
#include "skyq/join.h"

namespace skyq {

namespace {

struct Entry {
  SkyObject obj;
  TrixelId home;
  bool primary = false;
  bool companion = false;
};

using BucketMap = std::unordered_map<std::uint64_t, std::vector<Entry>>;

// Buckets that cap(p, radius) reaches at `level`, home first.
void BucketsFor(const UnitVec& p, double radius_rad, double sin_r, int level, TrixelId* home,
                std::vector<TrixelId>* out) {
  const Trixel t = LocateTrixel(p, level);
  *home = t.id;
  out->clear();
  out->push_back(t.id);
  const UnitVec* v[3] = {&t.v0, &t.v1, &t.v2};
  bool interior = true;
  for (int i = 0; i < 3 && interior; ++i) {
    const Vec3 n = v[i]->Cross(*v[(i + 1) % 3]);
    interior = n.Dot(p.vec()) / n.Norm() > sin_r + 1e-12;
  }
  if (interior) return;
  const Coverage cov = Classify(Region::Of(Cap(p, RadiansToArcsec(radius_rad))), level);
  auto add = [&](TrixelId id) {
    if (id.level() < level) {
      const auto [lo, hi] = id.RangeAt(level);
      for (std::uint64_t c = lo; c < hi; ++c) {
        if (c != t.id.value()) out->push_back(TrixelId(c));
      }
    } else if (id != t.id) {
      out->push_back(id);
    }
  };
  for (TrixelId id : cov.full) add(id);
  for (TrixelId id : cov.partial) add(id);
}

PairResult MakePair(const SkyObject& a, const SkyObject& b, double sep_rad) {
  PairResult r;
  r.obj_a = a.obj_id;
  r.obj_b = b.obj_id;
  r.separation_arcsec = RadiansToArcsec(sep_rad);
  for (int c = 0; c < 4; ++c) r.color_delta[c] = a.Color(c) - b.Color(c);
  return r;
}

// Runs `body(worker)` on `workers` threads and rethrows the first failure.
template <typename F>
void RunParallel(int workers, F body) {
  std::vector<std::exception_ptr> errors(static_cast<std::size_t>(workers));
  {
    std::vector<std::jthread> threads;
    for (int w = 0; w < workers; ++w) {
      threads.emplace_back([&, w] {
        try {
          body(w);
        } catch (...) {
          errors[static_cast<std::size_t>(w)] = std::current_exception();
        }
      });
    }
  }
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
}

void RunJoin(ExecutionState* st, const Catalog& catalog, const JoinSpec& spec,
             const EngineConfig& config, int level, BoundedQueue<PairResult>& out) {
  auto& m = st->metrics;
  const double radius = ArcsecToRadians(spec.radius_arcsec);
  const double sin_r = std::sin(radius);
  const bool symmetric = spec.mode == JoinSpec::Mode::kSymmetric;
  const int workers = std::max(1, config.workers);
  const std::vector<TrixelId> containers = catalog.Containers();

  // Phase 1: hash every object to its home bucket and the neighbours its cap reaches.
  BucketMap buckets;
  std::mutex merge_mu;
  std::atomic<std::size_t> next{0};
  RunParallel(workers, [&](int) {
    BucketMap local;
    std::vector<TrixelId> ids;
    while (!out.cancelled()) {
      const std::size_t i = next.fetch_add(1);
      if (i >= containers.size()) break;
      ContainerReader reader = catalog.OpenContainer(containers[i], &m.io);
      for (SkyObject& o : reader.Read(spec.projection)) {
        m.records_scanned.fetch_add(1, std::memory_order_relaxed);
        Entry e;
        if (symmetric) {
          e.primary = e.companion = !spec.primary || spec.primary(o);
        } else {
          e.primary = spec.primary(o);
          e.companion = spec.companion(o);
        }
        if (!e.primary && !e.companion) continue;
        TrixelId home;
        BucketsFor(o.pos, radius, sin_r, level, &home, &ids);
        e.home = home;
        e.obj = std::move(o);
        // A pair is reported in its primary's home bucket, so only objects
        // that can be the second member need replicas.
        const std::size_t copies = e.companion ? ids.size() : 1;
        for (std::size_t k = 1; k < copies; ++k) local[ids[k].value()].push_back(e);
        local[home.value()].push_back(std::move(e));
      }
    }
    std::lock_guard lock(merge_mu);
    for (auto& [id, entries] : local) {
      auto& dst = buckets[id];
      if (dst.empty()) {
        dst = std::move(entries);
      } else {
        std::move(entries.begin(), entries.end(), std::back_inserter(dst));
      }
    }
  });
  if (out.cancelled()) return;

  // Phase 2: compare within each bucket.
  std::vector<std::pair<std::uint64_t, std::vector<Entry>*>> work;
  work.reserve(buckets.size());
  for (auto& [id, entries] : buckets) work.emplace_back(id, &entries);
  next = 0;
  RunParallel(workers, [&](int) {
    std::uint64_t compared = 0;
    auto try_pair = [&](const Entry& a, const Entry& b, std::uint64_t bucket, double sep) {
      if (a.home.value() != bucket) return true;
      if (spec.pair && !spec.pair(a.obj, b.obj)) return true;
      return out.Push(MakePair(a.obj, b.obj, sep));
    };
    while (!out.cancelled()) {
      const std::size_t i = next.fetch_add(1);
      if (i >= work.size()) break;
      const std::uint64_t bucket = work[i].first;
      std::vector<Entry>& es = *work[i].second;
      std::sort(es.begin(), es.end(),
                [](const Entry& a, const Entry& b) { return a.obj.pos.z() < b.obj.pos.z(); });
      const double window = radius + 1e-12;
      for (std::size_t x = 0; x < es.size(); ++x) {
        for (std::size_t y = x + 1; y < es.size(); ++y) {
          if (es[y].obj.pos.z() - es[x].obj.pos.z() > window) break;
          ++compared;
          const Entry& p = es[x];
          const Entry& q = es[y];
          if (p.obj.obj_id == q.obj.obj_id) continue;
          const double sep = AngularDistance(p.obj.pos, q.obj.pos);
          if (sep > radius) continue;
          bool ok = true;
          if (symmetric) {
            ok = p.obj.obj_id < q.obj.obj_id ? try_pair(p, q, bucket, sep)
                                             : try_pair(q, p, bucket, sep);
          } else {
            if (p.primary && q.companion) ok = try_pair(p, q, bucket, sep);
            if (ok && q.primary && p.companion) ok = try_pair(q, p, bucket, sep);
          }
          if (!ok) {
            m.pairs_compared.fetch_add(compared);
            return;
          }
        }
      }
    }
    m.pairs_compared.fetch_add(compared);
  });
}

std::string Number(double v) {
  std::ostringstream os;
  os.precision(17);
  os << v;
  return os.str();
}

}  // namespace

void ValidateBucketLevel(int level, double radius_arcsec) {
  if (!(radius_arcsec > 0) || !std::isfinite(radius_arcsec)) {
    throw ConfigError("search radius must be positive");
  }
  if (level < 0 || level > kMaxLevel) {
    throw ConfigError("bucket level must lie in [0, " + std::to_string(kMaxLevel) + "]");
  }
  const double inradius = MinInradius(level);
  if (!(inradius > 2 * ArcsecToRadians(radius_arcsec))) {
    std::ostringstream os;
    os << "bucket level " << level << " is too fine for radius " << radius_arcsec
       << " arcsec: the smallest trixel inradius there is " << RadiansToArcsec(inradius)
       << " arcsec, which must exceed twice the radius";
    throw ConfigError(os.str());
  }
}

PairStream HashJoin(const Catalog& catalog, JoinSpec spec, const EngineConfig& config) {
  config.Validate();
  const int level = config.bucket_level.value_or(catalog.storage_depth());
  ValidateBucketLevel(level, spec.radius_arcsec);
  if (spec.mode == JoinSpec::Mode::kAsymmetric && (!spec.primary || !spec.companion)) {
    throw ConfigError("an asymmetric join needs primary and companion filters");
  }
  auto state = std::make_unique<ExecutionState>();
  auto out = state->MakeQueue<PairResult>(config.stream_bound);
  out->AddProducer();
  ExecutionState* st = state.get();
  st->Spawn([st, cat = std::make_shared<const Catalog>(catalog), spec = std::move(spec), config,
             level, out] {
    struct Done {
      BoundedQueue<PairResult>& q;
      ~Done() { q.ProducerDone(); }
    } done{*out};
    RunJoin(st, *cat, spec, config, level, *out);
  });
  return PairStream(std::move(state), std::move(out));
}

PairStream LensSearch(const Catalog& catalog, const LensOptions& options,
                      const EngineConfig& config) {
  if (!(options.color_eps_mag >= 0)) throw ConfigError("color tolerance must be non-negative");
  JoinSpec spec;
  spec.mode = JoinSpec::Mode::kSymmetric;
  spec.radius_arcsec = options.radius_arcsec;
  const double eps = options.color_eps_mag;
  spec.pair = [eps](const SkyObject& a, const SkyObject& b) {
    for (int c = 0; c < 4; ++c) {
      if (!(std::abs(a.Color(c) - b.Color(c)) <= eps)) return false;
    }
    return true;
  };
  return HashJoin(catalog, std::move(spec), config);
}

std::string CompanionOptions::CompanionFilter() const {
  if (!companion.empty()) return companion;
  return "class = GALAXY AND g > " + Number(faint_g) + " AND g - r < " + Number(blue_gr);
}

PairStream CompanionSearch(const Catalog& catalog, const CompanionOptions& options,
                           const EngineConfig& config) {
  static const FrameRegistry kBuiltin;
  const FrameRegistry& frames = options.frames ? *options.frames : kBuiltin;
  const Predicate primary =
      Predicate::Compile(ParseExpression(options.primary), catalog.schema(), frames);
  const Predicate companion =
      Predicate::Compile(ParseExpression(options.CompanionFilter()), catalog.schema(), frames);
  JoinSpec spec;
  spec.mode = JoinSpec::Mode::kAsymmetric;
  spec.radius_arcsec = options.radius_arcsec;
  spec.primary = primary;
  spec.companion = companion;
  spec.projection =
      primary.NeedsFull() || companion.NeedsFull() ? Projection::kFull : Projection::kTag;
  return HashJoin(catalog, std::move(spec), config);
}

}  // namespace skyq
