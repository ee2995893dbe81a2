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

#include <chrono>
#include <ostream>

#include <nlohmann/json.hpp>

#include "granule/agents/agents.hpp"
#include "granule/errors.hpp"

namespace granule {

DaemonRunner::DaemonRunner(Catalog& catalog, AgentConfig config,
                           std::function<CycleOutcome(Timestamp)> cycle,
                           std::function<Timestamp()> clock, std::ostream* log)
    : catalog_(catalog),
      config_(std::move(config)),
      cycle_(std::move(cycle)),
      clock_(std::move(clock)),
      log_(log) {}

DaemonRunner::~DaemonRunner() { stop(); }

void DaemonRunner::start() {
  if (running_.exchange(true)) return;
  stop_requested_.store(false);
  thread_ = std::thread([this] { loop(); });
}

void DaemonRunner::stop() {
  if (!running_.load() && !thread_.joinable()) return;
  {
    std::lock_guard lock(mu_);
    stop_requested_.store(true);
  }
  cv_.notify_all();
  if (thread_.joinable()) thread_.join();
  running_.store(false);
}

void DaemonRunner::loop() {
  while (!stop_requested_.load()) {
    Timestamp now = clock_();
    try {
      CycleOutcome outcome = cycle_(now);
      if (log_) {
        nlohmann::ordered_json line;
        line["agent"] = to_string(config_.kind);
        line["agent_id"] = config_.agent_id;
        line["t"] = now;
        line["claimed"] = outcome.claimed;
        line["progressed"] = outcome.progressed;
        line["failed"] = outcome.failed;
        line["released_bytes"] = outcome.released_bytes;
        (*log_) << line.dump() << "\n" << std::flush;
      }
    } catch (const std::exception& e) {
      // A failing cycle never takes the daemon down.
      if (log_) {
        nlohmann::ordered_json line;
        line["agent"] = to_string(config_.kind);
        line["agent_id"] = config_.agent_id;
        line["t"] = now;
        line["error"] = e.what();
        (*log_) << line.dump() << "\n" << std::flush;
      }
    }
    try {
      catalog_.record_heartbeat(to_string(config_.kind), config_.agent_id, clock_());
    } catch (const std::exception&) {
    }
    std::unique_lock lock(mu_);
    cv_.wait_for(lock, std::chrono::duration<double>(config_.poll_interval_seconds),
                 [this] { return stop_requested_.load(); });
  }
}

}  // namespace granule
