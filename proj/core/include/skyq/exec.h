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

// Streaming execution of query plans. Every QET node runs on its own
// thread(s) and hands rows to its parent through a bounded queue, so rows
// reach the consumer while slower branches are still scanning.

#ifndef SKYQ_EXEC_H_
#define SKYQ_EXEC_H_

#include <atomic>
#include <chrono>
#include <condition_variable>
#include <cstdint>
#include <deque>
#include <exception>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <thread>
#include <variant>
#include <vector>

#include "skyq/catalog.h"
#include "skyq/container_format.h"
#include "skyq/plan.h"

namespace skyq {

class QueueBase {
 public:
  virtual ~QueueBase() = default;
  virtual void Cancel() = 0;
};

// Multi-producer queue with backpressure. Producers register up front with
// AddProducer(); the stream ends once every producer has called
// ProducerDone() and the buffer is empty.
template <typename T>
class BoundedQueue : public QueueBase {
 public:
  explicit BoundedQueue(std::size_t bound) : bound_(bound < 1 ? 1 : bound) {}

  void AddProducer(int n = 1) {
    std::lock_guard lock(mu_);
    producers_ += n;
  }
  // Returns true for the last producer.
  bool ProducerDone() {
    std::lock_guard lock(mu_);
    const bool last = --producers_ == 0;
    if (last) not_empty_.notify_all();
    return last;
  }
  // Blocks while full. Returns false once the queue is cancelled.
  bool Push(T value) {
    std::unique_lock lock(mu_);
    not_full_.wait(lock, [&] { return cancelled_ || items_.size() < bound_; });
    if (cancelled_) return false;
    items_.push_back(std::move(value));
    not_empty_.notify_one();
    return true;
  }
  // nullopt at end of stream or after cancellation.
  std::optional<T> Pop() {
    std::unique_lock lock(mu_);
    not_empty_.wait(lock, [&] { return cancelled_ || !items_.empty() || producers_ == 0; });
    if (cancelled_ || items_.empty()) return std::nullopt;
    T v = std::move(items_.front());
    items_.pop_front();
    not_full_.notify_one();
    return v;
  }
  // Like Pop(), but gives up after `timeout` and sets *timed_out.
  template <typename Rep, typename Period>
  std::optional<T> PopFor(std::chrono::duration<Rep, Period> timeout, bool* timed_out) {
    std::unique_lock lock(mu_);
    *timed_out = !not_empty_.wait_for(
        lock, timeout, [&] { return cancelled_ || !items_.empty() || producers_ == 0; });
    if (*timed_out || cancelled_ || items_.empty()) return std::nullopt;
    T v = std::move(items_.front());
    items_.pop_front();
    not_full_.notify_one();
    return v;
  }
  void Cancel() override {
    std::lock_guard lock(mu_);
    cancelled_ = true;
    items_.clear();
    not_full_.notify_all();
    not_empty_.notify_all();
  }
  bool cancelled() const {
    std::lock_guard lock(mu_);
    return cancelled_;
  }

 private:
  const std::size_t bound_;
  mutable std::mutex mu_;
  std::condition_variable not_full_, not_empty_;
  std::deque<T> items_;
  int producers_ = 0;
  bool cancelled_ = false;
};

struct EngineConfig {
  int workers = 1;
  std::size_t stream_bound = 1024;
  // Hash-join bucket level; storage depth when unset.
  std::optional<int> bucket_level;

  // Throws ConfigError.
  void Validate() const;
};

using Cell = std::variant<std::monostate, std::uint64_t, double, std::string>;

struct Row {
  SkyObject object;
  std::vector<Cell> cells;  // filled by PROJECT / AGGREGATE
};

struct PairResult {
  std::uint64_t obj_a = 0;
  std::uint64_t obj_b = 0;
  double separation_arcsec = 0;
  std::array<double, 4> color_delta{};  // color(a) - color(b): u-g, g-r, r-i, i-z

  bool operator==(const PairResult&) const = default;
};

// Per-node timings in nanoseconds since the query started; -1 until set.
struct NodeTrace {
  QetKind kind = QetKind::kScan;
  int depth = 0;
  std::atomic<std::int64_t> first_emit_ns{-1};
  std::atomic<std::int64_t> complete_ns{-1};
  // Blocking nodes: when their draining input finished.
  std::atomic<std::int64_t> drained_ns{-1};
  std::atomic<std::uint64_t> emitted{0};
  std::atomic<std::uint64_t> emitted_before_drain{0};
};

struct ExecMetrics {
  std::chrono::steady_clock::time_point start = std::chrono::steady_clock::now();
  IoCounters io;
  std::atomic<std::uint64_t> records_scanned{0};
  std::atomic<std::uint64_t> pairs_compared{0};
  std::atomic<std::int64_t> first_record_ns{-1};
  std::atomic<std::int64_t> total_ns{-1};
  // Pre-order over the plan.
  std::vector<std::unique_ptr<NodeTrace>> traces;

  std::int64_t Now() const {
    return std::chrono::duration_cast<std::chrono::nanoseconds>(
               std::chrono::steady_clock::now() - start)
        .count();
  }
  // key=value pairs separated by spaces, prefixed by "#metrics".
  std::string Trailer() const;
};

// Shared state of one running query: threads, cancellation and the first error.
class ExecutionState {
 public:
  ExecutionState() = default;
  ExecutionState(const ExecutionState&) = delete;
  ExecutionState& operator=(const ExecutionState&) = delete;
  ~ExecutionState() { Shutdown(); }

  template <typename T>
  std::shared_ptr<BoundedQueue<T>> MakeQueue(std::size_t bound) {
    auto q = std::make_shared<BoundedQueue<T>>(bound);
    std::lock_guard lock(mu_);
    queues_.push_back(q);
    if (cancelled_) q->Cancel();
    return q;
  }
  template <typename F>
  void Spawn(F&& body) {
    std::lock_guard lock(mu_);
    threads_.emplace_back([this, body = std::forward<F>(body)]() mutable {
      try {
        body();
      } catch (...) {
        Fail(std::current_exception());
      }
    });
  }
  void Fail(std::exception_ptr e) {
    {
      std::lock_guard lock(mu_);
      if (!error_) error_ = e;
    }
    CancelAll();
  }
  void CancelAll() {
    cancelled_ = true;
    std::vector<std::shared_ptr<QueueBase>> queues;
    {
      std::lock_guard lock(mu_);
      queues = queues_;
    }
    for (auto& q : queues) q->Cancel();
  }
  bool cancelled() const { return cancelled_; }
  std::exception_ptr error() const {
    std::lock_guard lock(mu_);
    return error_;
  }
  void Shutdown() {
    CancelAll();
    std::vector<std::jthread> threads;
    {
      std::lock_guard lock(mu_);
      threads.swap(threads_);
    }
    threads.clear();  // joins
  }

  ExecMetrics metrics;

 private:
  mutable std::mutex mu_;
  std::vector<std::shared_ptr<QueueBase>> queues_;
  std::vector<std::jthread> threads_;
  std::exception_ptr error_;
  std::atomic<bool> cancelled_{false};
};

// Consumer end of a running query. Destroying or cancelling the stream stops
// every producer.
template <typename T>
class Stream {
 public:
  Stream(std::unique_ptr<ExecutionState> state, std::shared_ptr<BoundedQueue<T>> out)
      : state_(std::move(state)), out_(std::move(out)) {}
  Stream(Stream&&) noexcept = default;
  Stream& operator=(Stream&&) noexcept = default;
  ~Stream() {
    if (state_) state_->Shutdown();
  }

  // Next item, or nullopt at the end. Rethrows the first execution error.
  std::optional<T> Next() {
    bool timed_out = false;
    return Finish(out_->Pop(), timed_out);
  }
  // Next() with a deadline; on timeout returns nullopt with *timed_out set
  // and the stream stays open.
  template <typename Rep, typename Period>
  std::optional<T> NextFor(std::chrono::duration<Rep, Period> timeout, bool* timed_out) {
    if (done_) {
      *timed_out = false;
      return std::nullopt;
    }
    return Finish(out_->PopFor(timeout, timed_out), *timed_out);
  }
  bool done() const { return done_; }
  void Cancel() { state_->CancelAll(); }
  const ExecMetrics& metrics() const { return state_->metrics; }
  ExecutionState& state() { return *state_; }

 private:
  std::optional<T> Finish(std::optional<T> v, bool timed_out) {
    if (done_ || timed_out) return std::nullopt;
    auto& m = state_->metrics;
    if (v) {
      std::int64_t expected = -1;
      m.first_record_ns.compare_exchange_strong(expected, m.Now());
      return v;
    }
    done_ = true;
    m.total_ns = m.Now();
    if (auto e = state_->error()) std::rethrow_exception(e);
    return std::nullopt;
  }

  std::unique_ptr<ExecutionState> state_;
  std::shared_ptr<BoundedQueue<T>> out_;
  bool done_ = false;
};

using RecordStream = Stream<Row>;
using PairStream = Stream<PairResult>;

// Starts executing `plan`; rows are produced by the returned stream. The
// catalog is copied, so it need not outlive the stream.
RecordStream Execute(const QueryPlan& plan, const Catalog& catalog, const EngineConfig& config);

// Whole-catalog predicate scan: every container is visited once by one of
// `config.workers` threads.
RecordStream ScanEngine(const Catalog& catalog, Predicate predicate, Projection projection,
                        const EngineConfig& config);

// Output cells of `row` under `columns`.
std::vector<Cell> ProjectRow(const SkyObject& object, const std::vector<OutputColumn>& columns);

}  // namespace skyq

#endif  // SKYQ_EXEC_H_
