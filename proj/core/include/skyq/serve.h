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

// HTTP front end over the query engine.
//
//   POST /query   body = query text; streams csv (default) or JSON Lines
//                 (Accept: application/x-ndjson, or ?format=jsonl)
//   GET  /stats   catalog statistics as JSON Lines
//   GET  /healthz 200 "ok" while the catalog is readable

#ifndef SKYQ_SERVE_H_
#define SKYQ_SERVE_H_

#include <chrono>
#include <cstdint>
#include <filesystem>
#include <memory>
#include <string>
#include <vector>

#include "skyq/sphere.h"

namespace skyq {

struct ServerConfig {
  std::string host = "127.0.0.1";
  int port = 8080;  // 0 picks a free port
  std::filesystem::path catalog;
  int workers = 1;
  int max_concurrent = 4;
  std::uint64_t row_limit = 1'000'000;
  std::size_t stream_bound = 1024;
  std::vector<std::filesystem::path> frame_files;
  // Test hook forwarded to the planner.
  std::chrono::microseconds unpruned_scan_delay{0};

  // Throws ConfigError.
  void Validate() const;
};

struct ServerCounters {
  std::uint64_t started = 0;
  std::uint64_t completed = 0;
  std::uint64_t rejected = 0;   // 429
  std::uint64_t failed = 0;     // 400 / 500 / mid-stream errors
  std::uint64_t cancelled = 0;  // client went away before the end
  std::uint64_t truncated = 0;
  int active = 0;
};

// One finished /query, for instrumentation.
struct QueryRecord {
  std::string text;
  std::chrono::steady_clock::time_point started;
  // When the engine reported the end of the result stream.
  std::chrono::steady_clock::time_point completed;
  std::uint64_t rows = 0;
};

class Server {
 public:
  // Opens the catalog; throws IoError / ConfigError.
  explicit Server(ServerConfig config);
  ~Server();
  Server(const Server&) = delete;
  Server& operator=(const Server&) = delete;

  // Binds and serves on a background thread; returns the bound port.
  int Start();
  // Binds and serves on the calling thread until Stop().
  void Run();
  void Stop();

  ServerCounters counters() const;
  std::vector<QueryRecord> completed_queries() const;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

}  // namespace skyq

#endif  // SKYQ_SERVE_H_
