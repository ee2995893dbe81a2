/*
 * Copyright 2026 The granule-dds Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *      http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#pragma once

#include <atomic>
#include <condition_variable>
#include <functional>
#include <iosfwd>
#include <memory>
#include <mutex>
#include <string>
#include <thread>

#include "granule/catalog/catalog.hpp"
#include "granule/plugins/ddm.hpp"
#include "granule/plugins/notifier.hpp"
#include "granule/plugins/registry.hpp"

namespace granule {

enum class AgentKind { Transporter, Transformer, Conductor };

std::string to_string(AgentKind kind);

struct AgentConfig {
  AgentKind kind = AgentKind::Transporter;
  double poll_interval_seconds = 1.0;
  std::int64_t batch_limit = 50;
  std::string agent_id;
  std::int64_t lease_seconds = 60;
};

struct CycleOutcome {
  std::int64_t claimed = 0;
  std::int64_t progressed = 0;  // persisted state changes this cycle
  std::int64_t failed = 0;      // contents newly marked Failed
  std::int64_t released_bytes = 0;

  bool made_progress() const { return progressed > 0 || failed > 0; }
};

/// Resolves input replicas: populates the Input collection from
/// ddm.list_files, issues stage-ins for tape-resident files, and advances
/// Staging contents as the DDM reports them on disk. Per-content DDM errors
/// turn into Failed contents after max_attempts tries.
class Transporter {
 public:
  Transporter(Catalog& catalog, DdmClient& ddm, AgentConfig config);

  CycleOutcome cycle(Timestamp now);

  static constexpr std::int64_t kMaxAttempts = 3;

 private:
  void populate_new_request(const Request& request, CycleOutcome& outcome, Timestamp now);
  void poll_staging(const Request& request, CycleOutcome& outcome, Timestamp now);
  void advance_new_content(const Content& content, const Replica& replica, CycleOutcome& outcome,
                           Timestamp now);

  Catalog& catalog_;
  DdmClient& ddm_;
  AgentConfig config_;
};

/// Turns Available inputs into Output-collection contents through the
/// request's transform plugin; isolates plugin failures per content and
/// closes the Output collection once every input is accounted for.
class Transformer {
 public:
  Transformer(Catalog& catalog, const PluginRegistry& registry, AgentConfig config);

  CycleOutcome cycle(Timestamp now);

 private:
  Catalog& catalog_;
  const PluginRegistry& registry_;
  AgentConfig config_;
};

/// Notifies consumers content-by-content, observes acks, releases each
/// input replica once all outputs derived from it are delivered, and
/// finishes the request.
class Conductor {
 public:
  Conductor(Catalog& catalog, DdmClient& ddm, Notifier& notifier, AgentConfig config);

  CycleOutcome cycle(Timestamp now);

  /// Test seam: invoked right after every notifier send, before the Sent
  /// status is persisted. Throwing here models an agent crash in that
  /// window.
  void set_after_send_hook(std::function<void(const Message&)> hook) {
    after_send_hook_ = std::move(hook);
  }

 private:
  void send_pending(const Request& request, CycleOutcome& outcome, Timestamp now);
  void batch_available(const Request& request, std::int64_t output_collection_id,
                       CycleOutcome& outcome, Timestamp now);
  void apply_acks(const Request& request, CycleOutcome& outcome, Timestamp now);
  void release_inputs(const Request& request, std::int64_t input_collection_id,
                      std::int64_t output_collection_id, CycleOutcome& outcome, Timestamp now);
  void maybe_finish(const Request& request, CycleOutcome& outcome, Timestamp now);
  void send_and_mark(Message& message, CycleOutcome& outcome, Timestamp now);

  Catalog& catalog_;
  DdmClient& ddm_;
  Notifier& notifier_;
  AgentConfig config_;
  std::function<void(const Message&)> after_send_hook_;
};

/// Daemon loop shared by the three agents: cycle, heartbeat, sleep, until
/// stopped; cycle errors are logged and never escape. Emits one JSON log
/// line per cycle.
class DaemonRunner {
 public:
  DaemonRunner(Catalog& catalog, AgentConfig config, std::function<CycleOutcome(Timestamp)> cycle,
               std::function<Timestamp()> clock, std::ostream* log = nullptr);
  ~DaemonRunner();

  void start();
  void stop();  // joins; finishes the in-flight cycle first
  bool running() const { return running_.load(); }

 private:
  void loop();

  Catalog& catalog_;
  AgentConfig config_;
  std::function<CycleOutcome(Timestamp)> cycle_;
  std::function<Timestamp()> clock_;
  std::ostream* log_;
  std::thread thread_;
  std::atomic<bool> running_{false};
  std::atomic<bool> stop_requested_{false};
  std::mutex mu_;
  std::condition_variable cv_;
};

}  // namespace granule
