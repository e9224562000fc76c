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

// Coverage-pruned container scans.

#ifndef SKYQ_SCAN_H_
#define SKYQ_SCAN_H_

#include <functional>
#include <span>
#include <string>
#include <vector>

#include "skyq/catalog.h"
#include "skyq/htm.h"
#include "skyq/sphere.h"

namespace skyq {

using RecordFilter = std::function<bool(const SkyObject&)>;
// Returns false to stop the scan.
using RecordSink = std::function<bool(SkyObject&&)>;

struct ContainerTask {
  TrixelId container;
  // Container lies under a FULL trixel: only the residual filter applies.
  bool full = false;
};

// Containers to open for `coverage`, in id order. Containers under FULL
// trixels are marked full; containers reached only by PARTIAL trixels (or
// by FULL trixels finer than the storage depth) need per-record region tests.
std::vector<ContainerTask> PlanContainers(const Catalog& catalog, const Coverage& coverage);

struct ScanRequest {
  Region region = Region::Whole();
  Coverage coverage;
  RecordFilter residual;  // empty means true
  Projection projection = Projection::kTag;
  // Attribute names referenced by `residual`; validated before any I/O.
  std::vector<std::string> attributes;
};

// Scans one container, applying the region test on partial containers and
// the residual filter on every record.
bool ScanContainer(const Catalog& catalog, const ContainerTask& task, const ScanRequest& request,
                   IoCounters* counters, const RecordSink& sink);

// Sequential scan of all planned containers. Throws PlanError for an
// unknown attribute before opening any container.
std::vector<SkyObject> ScanObjects(const Catalog& catalog, const ScanRequest& request,
                                   IoCounters* counters = nullptr);

// Whole-sky coverage (the 8 base trixels FULL) at `level`.
Coverage WholeSkyCoverage(int level);

// Throws PlanError naming the first attribute `schema` does not define.
void ValidateAttributes(const Schema& schema, std::span<const std::string> names);

}  // namespace skyq

#endif  // SKYQ_SCAN_H_
