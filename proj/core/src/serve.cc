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

#include "skyq/serve.h"

#include <atomic>
#include <mutex>
#include <thread>

#include "httplib.h"
#include "skyq/catalog.h"
#include "skyq/error.h"
#include "skyq/exec.h"
#include "skyq/format.h"
#include "skyq/plan.h"
#include "skyq/query.h"

namespace skyq {

namespace {

constexpr std::size_t kRowsPerChunkCall = 256;

OutputFormat ChooseFormat(const httplib::Request& req) {
  if (req.has_param("format")) {
    if (auto f = ParseOutputFormat(req.get_param_value("format"))) return *f;
  }
  const std::string accept = req.get_header_value("Accept");
  if (accept.find("ndjson") != std::string::npos || accept.find("jsonl") != std::string::npos ||
      accept.find("application/json") != std::string::npos) {
    return OutputFormat::kJsonl;
  }
  return OutputFormat::kCsv;
}

}  // namespace

void ServerConfig::Validate() const {
  if (workers < 1) throw ConfigError("workers must be at least 1");
  if (max_concurrent < 1) throw ConfigError("max concurrent queries must be at least 1");
  if (row_limit < 1) throw ConfigError("row limit must be at least 1");
  if (stream_bound < 1) throw ConfigError("stream bound must be at least 1");
  if (port < 0 || port > 65535) throw ConfigError("port out of range");
}

struct Server::Impl {
  explicit Impl(ServerConfig c) : config(std::move(c)), catalog(Catalog::Open(config.catalog)) {
    for (const auto& f : config.frame_files) frames.LoadFile(f);
  }

  // Catalog snapshot with any newly published load.
  Catalog Snapshot() {
    std::lock_guard lock(catalog_mu);
    catalog.Refresh();
    return catalog;
  }

  void Finished(const std::string& text, std::chrono::steady_clock::time_point started,
                std::uint64_t rows) {
    std::lock_guard lock(mu);
    ++counters.completed;
    records.push_back({text, started, std::chrono::steady_clock::now(), rows});
  }
  void Count(std::uint64_t ServerCounters::*field) {
    std::lock_guard lock(mu);
    ++(counters.*field);
  }
  void Release() {
    std::lock_guard lock(mu);
    --counters.active;
  }

  void HandleQuery(const httplib::Request& req, httplib::Response& res);
  void Install();

  ServerConfig config;
  std::mutex catalog_mu;
  Catalog catalog;
  FrameRegistry frames;
  httplib::Server http;
  std::jthread thread;

  mutable std::mutex mu;
  ServerCounters counters;
  std::vector<QueryRecord> records;
};

namespace {

struct QueryContext {
  std::string text;
  std::chrono::steady_clock::time_point started;
  std::optional<RecordStream> stream;
  std::optional<RowWriter> writer;
  std::optional<Row> first;
  std::uint64_t rows = 0;
  bool header_sent = false;
  bool finished = false;
};

}  // namespace

void Server::Impl::HandleQuery(const httplib::Request& req, httplib::Response& res) {
  {
    std::lock_guard lock(mu);
    if (counters.active >= config.max_concurrent) {
      ++counters.rejected;
      res.status = 429;
      res.set_content("too many concurrent queries\n", "text/plain");
      return;
    }
    ++counters.active;
    ++counters.started;
  }
  auto ctx = std::make_shared<QueryContext>();
  ctx->text = req.body;
  ctx->started = std::chrono::steady_clock::now();
  const OutputFormat format = ChooseFormat(req);
  auto fail = [&](int status, const std::string& message) {
    Count(&ServerCounters::failed);
    Release();
    res.status = status;
    res.set_content(message + "\n", "text/plain");
  };

  try {
    const Catalog snapshot = Snapshot();
    PlanOptions options;
    options.frames = &frames;
    options.unpruned_scan_delay = config.unpruned_scan_delay;
    if (req.has_param("no_index")) options.no_index = req.get_param_value("no_index") != "0";
    if (req.has_param("level")) options.level = std::stoi(req.get_param_value("level"));
    const QueryPlan plan = Plan(Parse(req.body), snapshot, options);
    EngineConfig engine;
    engine.workers = config.workers;
    engine.stream_bound = config.stream_bound;
    ctx->writer.emplace(format, plan.columns);
    ctx->stream.emplace(Execute(plan, snapshot, engine));
  } catch (const ParseError& e) {
    return fail(400, e.what());
  } catch (const PlanError& e) {
    return fail(400, e.what());
  } catch (const ConfigError& e) {
    return fail(400, e.what());
  } catch (const std::invalid_argument& e) {
    return fail(400, std::string("bad parameter: ") + e.what());
  } catch (const std::exception& e) {
    return fail(500, e.what());
  }

  // The status line goes out with the first row, so wait for it (or an error).
  try {
    ctx->first = ctx->stream->Next();
  } catch (const std::exception& e) {
    return fail(500, e.what());
  }

  res.status = 200;
  res.set_chunked_content_provider(
      std::string(MediaType(format)),
      [this, ctx](std::size_t, httplib::DataSink& sink) {
        auto write = [&](const std::string& s) { return sink.write(s.data(), s.size()); };
        auto finish = [&] {
          ctx->finished = true;
          Finished(ctx->text, ctx->started, ctx->rows);
          sink.done();
          return true;
        };
        if (!ctx->header_sent) {
          ctx->header_sent = true;
          const std::string header = ctx->writer->Header();
          if (!header.empty() && !write(header)) return false;
        }
        std::size_t sent = 0;
        while (sent < kRowsPerChunkCall) {
          std::optional<Row> row;
          if (ctx->first) {
            row = std::move(ctx->first);
            ctx->first.reset();
          } else if (!ctx->stream->done()) {
            bool timed_out = false;
            try {
              row = ctx->stream->NextFor(std::chrono::milliseconds(50), &timed_out);
            } catch (const std::exception& e) {
              ctx->finished = true;
              Count(&ServerCounters::failed);
              write(std::string("#error ") + e.what() + "\n");
              sink.done();
              return true;
            }
            // Let the server check that the client is still there.
            if (timed_out) return true;
          }
          if (!row) return finish();
          if (ctx->rows == config.row_limit) {
            ctx->stream->Cancel();
            Count(&ServerCounters::truncated);
            write("#truncated\n");
            return finish();
          }
          ++ctx->rows;
          ++sent;
          if (!write(ctx->writer->Format(row->cells))) return false;
        }
        return true;
      },
      [this, ctx](bool) {
        if (!ctx->finished) {
          if (ctx->stream) ctx->stream->Cancel();
          Count(&ServerCounters::cancelled);
        }
        // Join the engine threads before the slot is handed to another query.
        ctx->stream.reset();
        Release();
      });
}

void Server::Impl::Install() {
  const int threads = config.max_concurrent + 4;
  http.new_task_queue = [threads] { return new httplib::ThreadPool(threads); };
  http.Post("/query", [this](const httplib::Request& req, httplib::Response& res) {
    HandleQuery(req, res);
  });
  http.Get("/stats", [this](const httplib::Request&, httplib::Response& res) {
    try {
      res.set_content(StatsJsonl(Stats(Snapshot())), "application/x-ndjson");
    } catch (const std::exception& e) {
      res.status = 500;
      res.set_content(std::string(e.what()) + "\n", "text/plain");
    }
  });
  http.Get("/healthz", [this](const httplib::Request&, httplib::Response& res) {
    if (Catalog::Exists(config.catalog)) {
      res.set_content("ok\n", "text/plain");
    } else {
      res.status = 503;
      res.set_content("catalog unavailable\n", "text/plain");
    }
  });
}

Server::Server(ServerConfig config) {
  config.Validate();
  impl_ = std::make_unique<Impl>(std::move(config));
  impl_->Install();
}

Server::~Server() { Stop(); }

int Server::Start() {
  int port = impl_->config.port;
  if (port == 0) {
    port = impl_->http.bind_to_any_port(impl_->config.host);
  } else if (!impl_->http.bind_to_port(impl_->config.host, port)) {
    port = -1;
  }
  if (port < 0) {
    throw IoError("cannot listen on " + impl_->config.host + ":" +
                  std::to_string(impl_->config.port));
  }
  impl_->thread = std::jthread([this] { impl_->http.listen_after_bind(); });
  impl_->http.wait_until_ready();
  return port;
}

void Server::Run() {
  if (!impl_->http.listen(impl_->config.host, impl_->config.port)) {
    throw IoError("cannot listen on " + impl_->config.host + ":" +
                  std::to_string(impl_->config.port));
  }
}

void Server::Stop() {
  if (!impl_) return;
  impl_->http.stop();
  if (impl_->thread.joinable()) impl_->thread.join();
}

ServerCounters Server::counters() const {
  std::lock_guard lock(impl_->mu);
  return impl_->counters;
}

std::vector<QueryRecord> Server::completed_queries() const {
  std::lock_guard lock(impl_->mu);
  return impl_->records;
}

}  // namespace skyq
