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

#include "skyq/scan.h"

#include <set>
#include <unordered_set>

#include "skyq/error.h"

namespace skyq {

std::vector<ContainerTask> PlanContainers(const Catalog& catalog, const Coverage& coverage) {
  const int depth = catalog.storage_depth();
  std::unordered_set<std::uint64_t> full, partial, deep;
  std::set<int> full_levels, partial_levels;
  for (TrixelId id : coverage.full) {
    if (id.level() <= depth) {
      full.insert(id.value());
      full_levels.insert(id.level());
    } else {
      deep.insert(id.AncestorAt(depth).value());
    }
  }
  for (TrixelId id : coverage.partial) {
    if (id.level() <= depth) {
      partial.insert(id.value());
      partial_levels.insert(id.level());
    } else {
      deep.insert(id.AncestorAt(depth).value());
    }
  }
  auto hit = [](const std::unordered_set<std::uint64_t>& set, const std::set<int>& levels,
                TrixelId c) {
    for (int l : levels) {
      if (set.count(c.AncestorAt(l).value())) return true;
    }
    return false;
  };
  std::vector<ContainerTask> tasks;
  for (TrixelId c : catalog.Containers()) {
    if (hit(full, full_levels, c)) {
      tasks.push_back({c, true});
    } else if (deep.count(c.value()) || hit(partial, partial_levels, c)) {
      tasks.push_back({c, false});
    }
  }
  return tasks;
}

bool ScanContainer(const Catalog& catalog, const ContainerTask& task, const ScanRequest& request,
                   IoCounters* counters, const RecordSink& sink) {
  ContainerReader reader = catalog.OpenContainer(task.container, counters);
  for (SkyObject& o : reader.Read(request.projection)) {
    if (!task.full && !request.region.Contains(o.pos)) continue;
    if (request.residual && !request.residual(o)) continue;
    if (!sink(std::move(o))) return false;
  }
  return true;
}

std::vector<SkyObject> ScanObjects(const Catalog& catalog, const ScanRequest& request,
                                   IoCounters* counters) {
  ValidateAttributes(catalog.schema(), request.attributes);
  std::vector<SkyObject> out;
  for (const auto& task : PlanContainers(catalog, request.coverage)) {
    ScanContainer(catalog, task, request, counters, [&](SkyObject&& o) {
      out.push_back(std::move(o));
      return true;
    });
  }
  return out;
}

Coverage WholeSkyCoverage(int level) {
  Coverage c;
  c.level = level;
  for (std::uint64_t id = 8; id < 16; ++id) c.full.push_back(TrixelId(id));
  return c;
}

void ValidateAttributes(const Schema& schema, std::span<const std::string> names) {
  for (const auto& name : names) {
    if (!ResolveAttribute(schema, name)) throw PlanError("unknown attribute '" + name + "'");
  }
}

}  // namespace skyq
