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

#include "cli.h"

#include <algorithm>
#include <cstdlib>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "skyq/catalog.h"
#include "skyq/error.h"
#include "skyq/exec.h"
#include "skyq/format.h"
#include "skyq/join.h"
#include "skyq/plan.h"
#include "skyq/query.h"
#include "skyq/serve.h"

namespace skyq::cli {

namespace {

struct Globals {
  std::string catalog;
  int workers = 1;
  std::string format = "csv";
  std::vector<std::string> frame_files;

  OutputFormat Format() const { return *ParseOutputFormat(format); }
  FrameRegistry Frames() const {
    FrameRegistry frames;
    for (const auto& f : frame_files) frames.LoadFile(f);
    return frames;
  }
  std::filesystem::path CatalogPath() const {
    if (catalog.empty()) throw ConfigError("no catalog given (use --catalog or SKYQ_CATALOG)");
    return catalog;
  }
};

struct QueryArgs {
  std::string text;
  bool explain = false;
  bool metrics = false;
  bool no_index = false;
  bool sorted = false;
  bool dump_ast = false;
  std::optional<int> level;
};

bool HasOrderBy(const QueryAst& ast) {
  return std::any_of(ast.selects.begin(), ast.selects.end(),
                     [](const SelectAst& s) { return s.order_by.has_value(); });
}

int RunQuery(const Globals& g, const QueryArgs& q, std::ostream& out, std::ostream& err) {
  const QueryAst ast = Parse(q.text);
  if (q.dump_ast) {
    out << DumpAst(ast);
    return kExitOk;
  }
  const Catalog catalog = Catalog::Open(g.CatalogPath());
  const FrameRegistry frames = g.Frames();
  PlanOptions options;
  options.level = q.level;
  options.no_index = q.no_index;
  options.frames = &frames;
  const QueryPlan plan = Plan(ast, catalog, options);
  if (q.explain) {
    out << Explain(plan, catalog);
    return kExitOk;
  }
  EngineConfig engine;
  engine.workers = g.workers;
  RowWriter writer(g.Format(), plan.columns);
  out << writer.Header();
  RecordStream stream = Execute(plan, catalog, engine);
  if (q.sorted && !HasOrderBy(ast)) {
    std::vector<Row> rows;
    while (auto row = stream.Next()) rows.push_back(std::move(*row));
    std::sort(rows.begin(), rows.end(),
              [](const Row& a, const Row& b) { return a.object.obj_id < b.object.obj_id; });
    for (const auto& r : rows) out << writer.Format(r.cells);
    out.flush();
  } else {
    while (auto row = stream.Next()) out << writer.Format(row->cells) << std::flush;
  }
  if (q.metrics) err << stream.metrics().Trailer() << "\n";
  return kExitOk;
}

int WritePairs(PairStream stream, const Globals& g, bool sorted, bool metrics, std::ostream& out,
               std::ostream& err) {
  RowWriter writer(g.Format(), PairColumns());
  out << writer.Header();
  if (sorted) {
    std::vector<PairResult> pairs;
    while (auto p = stream.Next()) pairs.push_back(*p);
    std::sort(pairs.begin(), pairs.end(), [](const PairResult& a, const PairResult& b) {
      return std::tie(a.obj_a, a.obj_b) < std::tie(b.obj_a, b.obj_b);
    });
    for (const auto& p : pairs) out << writer.Format(PairCells(p));
    out.flush();
  } else {
    while (auto p = stream.Next()) out << writer.Format(PairCells(*p)) << std::flush;
  }
  if (metrics) err << stream.metrics().Trailer() << "\n";
  return kExitOk;
}

int Dispatch(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"skyq: spatially indexed sky catalog engine", "skyq"};
  app.require_subcommand(1);
  Globals g;
  app.add_option("--catalog", g.catalog, "Catalog directory")->envname("SKYQ_CATALOG");
  app.add_option("--workers", g.workers, "Worker threads")->check(CLI::PositiveNumber);
  app.add_option("--format", g.format, "Output format")->check(CLI::IsMember({"csv", "jsonl"}));
  app.add_option("--frames", g.frame_files, "Frame definition files")->check(CLI::ExistingFile);

  auto* ingest = app.add_subcommand("ingest", "Load CSV chunks into the catalog");
  std::vector<std::string> files;
  int depth = kDefaultStorageDepth;
  ingest->add_option("files", files, "CSV chunk files")->required()->check(CLI::ExistingFile);
  ingest->add_option("--depth", depth, "Storage depth for a new catalog")
      ->check(CLI::Range(0, kMaxLevel));

  QueryArgs qa;
  auto* query = app.add_subcommand("query", "Run a query");
  query->add_option("text", qa.text, "Query text")->required();
  query->add_flag("--explain", qa.explain, "Print the plan instead of running it");
  query->add_flag("--metrics", qa.metrics, "Print the metrics trailer to stderr");
  query->add_flag("--no-index", qa.no_index, "Scan the whole sky (reference mode)");
  query->add_flag("--sorted", qa.sorted, "Buffer and sort rows by obj_id");
  query->add_flag("--dump-ast", qa.dump_ast, "Print the parsed query and exit");
  query->add_option("--level", qa.level, "Coverage level")->check(CLI::Range(0, kMaxLevel));

  QueryArgs ea;
  auto* explain = app.add_subcommand("explain", "Print the plan of a query");
  explain->add_option("text", ea.text, "Query text")->required();
  explain->add_flag("--no-index", ea.no_index, "Plan a whole-sky scan");
  explain->add_option("--level", ea.level, "Coverage level")->check(CLI::Range(0, kMaxLevel));

  auto* join = app.add_subcommand("join", "Pairwise searches");
  join->require_subcommand(1);
  bool join_sorted = false, join_metrics = false;
  std::optional<int> bucket_level;
  join->add_flag("--sorted", join_sorted, "Sort pairs by (obj_a, obj_b)");
  join->add_flag("--metrics", join_metrics, "Print the metrics trailer to stderr");
  join->add_option("--bucket-level", bucket_level, "Hash bucket level")
      ->check(CLI::Range(0, kMaxLevel));
  LensOptions lens_opts;
  auto* lens = join->add_subcommand("lens", "Close pairs with matching colors");
  lens->add_option("--radius", lens_opts.radius_arcsec, "Radius in arcsec");
  lens->add_option("--eps", lens_opts.color_eps_mag, "Color tolerance in mag");
  CompanionOptions comp_opts;
  auto* companion = join->add_subcommand("companion", "Primaries with a nearby companion");
  companion->add_option("--radius", comp_opts.radius_arcsec, "Radius in arcsec");
  companion->add_option("--primary", comp_opts.primary, "Primary filter expression");
  companion->add_option("--companion", comp_opts.companion, "Companion filter expression");
  companion->add_option("--faint-g", comp_opts.faint_g, "Companion g lower bound");
  companion->add_option("--blue-gr", comp_opts.blue_gr, "Companion g - r upper bound");

  auto* sample = app.add_subcommand("sample", "Write a hash-sampled copy of the catalog");
  std::string dest;
  double fraction = 0.01;
  std::uint64_t seed = 0;
  sample->add_option("dest", dest, "Destination catalog directory")->required();
  sample->add_option("--fraction", fraction, "Kept fraction in (0, 1]");
  sample->add_option("--seed", seed, "Sampling seed");

  auto* stats = app.add_subcommand("stats", "Catalog statistics");

  ServerConfig sc;
  auto* serve = app.add_subcommand("serve", "Serve queries over HTTP");
  serve->add_option("--host", sc.host, "Listen address");
  serve->add_option("--port", sc.port, "Listen port")->check(CLI::Range(0, 65535));
  serve->add_option("--max-concurrent", sc.max_concurrent, "Concurrent query limit")
      ->check(CLI::PositiveNumber);
  serve->add_option("--row-limit", sc.row_limit, "Rows per query before truncation")
      ->check(CLI::PositiveNumber);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitUsage;
  }

  if (*ingest) {
    const auto root = g.CatalogPath();
    for (const auto& f : files) {
      Schema schema;
      Chunk chunk = ReadCsvChunk(f, &schema);
      Catalog catalog = Catalog::Exists(root) ? Catalog::Open(root)
                                              : Catalog::Create(root, schema, depth);
      out << LoadReportText(catalog.Ingest(chunk));
    }
    return kExitOk;
  }
  if (*query) return RunQuery(g, qa, out, err);
  if (*explain) {
    ea.explain = true;
    return RunQuery(g, ea, out, err);
  }
  if (*join) {
    const Catalog catalog = Catalog::Open(g.CatalogPath());
    EngineConfig engine;
    engine.workers = g.workers;
    engine.bucket_level = bucket_level;
    if (*lens) {
      return WritePairs(LensSearch(catalog, lens_opts, engine), g, join_sorted, join_metrics,
                        out, err);
    }
    const FrameRegistry frames = g.Frames();
    comp_opts.frames = &frames;
    return WritePairs(CompanionSearch(catalog, comp_opts, engine), g, join_sorted, join_metrics,
                      out, err);
  }
  if (*sample) {
    const Catalog source = Catalog::Open(g.CatalogPath());
    const Catalog result = Sample(source, dest, fraction, seed);
    out << "objects=" << result.meta().total << " source_objects=" << source.meta().total << "\n";
    return kExitOk;
  }
  if (*stats) {
    out << StatsText(Stats(Catalog::Open(g.CatalogPath())));
    return kExitOk;
  }
  if (*serve) {
    sc.catalog = g.CatalogPath();
    sc.workers = g.workers;
    for (const auto& f : g.frame_files) sc.frame_files.emplace_back(f);
    Server server(sc);
    err << "serving " << sc.catalog.string() << " on " << sc.host << ":" << sc.port << "\n";
    server.Run();
    return kExitOk;
  }
  return kExitUsage;
}

}  // namespace

int Run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  try {
    return Dispatch(argc, argv, out, err);
  } catch (const ParseError& e) {
    err << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const PlanError& e) {
    err << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const ConfigError& e) {
    err << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const DomainError& e) {
    err << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const ConflictError& e) {
    err << "conflict: " << e.what() << "\n";
    return kExitConflict;
  } catch (const IoError& e) {
    err << "i/o error: " << e.what() << "\n";
    return kExitIo;
  } catch (const IntegrityError& e) {
    err << "integrity error: " << e.what() << "\n";
    return kExitIo;
  } catch (const std::filesystem::filesystem_error& e) {
    err << "i/o error: " << e.what() << "\n";
    return kExitIo;
  }
}

}  // namespace skyq::cli
