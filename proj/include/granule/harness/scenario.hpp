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

#include <cstdint>
#include <filesystem>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "granule/catalog/catalog.hpp"
#include "granule/plugins/sim_tape.hpp"

namespace granule {

enum class ScenarioMode { Fine, Coarse };

std::string to_string(ScenarioMode mode);
ScenarioMode scenario_mode_from_string(const std::string& s);

/// One carousel run: the dataset/pool model plus the consumer behaviour.
/// Fine mode drives the full service loop on the simulated clock; coarse
/// mode models the baseline that gates processing and release on the whole
/// dataset being staged.
struct ScenarioConfig {
  SimTapeConfig sim;
  ScenarioMode mode = ScenarioMode::Fine;
  double consumer_processing_seconds = 0.0;
  double consumer_ack_latency_seconds = 0.0;
  std::string transform_tag = "transform.passthrough";
  std::int64_t chunk_size = 0;  // event splitter only
  std::int64_t batch_limit = 50;
  std::string storage_path = ":memory:";
  std::string messages_log_path;  // empty = fresh temp file

  void validate() const;
  static ScenarioConfig from_json(const nlohmann::json& j);
  nlohmann::json to_json() const;
};

struct SimReport {
  std::string mode;
  std::uint64_t seed = 0;
  std::int64_t peak_pool_bytes = 0;
  double makespan_seconds = 0;
  double time_to_first_delivery_seconds = 0;
  std::vector<double> per_content_latency;
  std::int64_t total_released_bytes = 0;

  bool operator==(const SimReport&) const = default;

  nlohmann::json to_json() const;
  static SimReport from_json(const nlohmann::json& j);
};

/// Runs the scenario and reports the metrics measured from the event trace.
/// Throws ScenarioFailed when the request cannot reach a terminal state.
SimReport run_scenario(const ScenarioConfig& config);

/// Independent priority-queue discrete-event simulation of the same
/// semantics, written without the service stack; comparable field-for-field
/// with run_scenario.
SimReport oracle_simulate(const ScenarioConfig& config);

struct ComparisonSummary {
  double pool_reduction_fraction = 0;
  double makespan_ratio = 0;
  double ttfd_ratio = 0;

  nlohmann::json to_json() const;
};

/// fine vs coarse of the same config and seed; throws MismatchedScenarios
/// otherwise.
ComparisonSummary compare(const SimReport& fine, const SimReport& coarse);

/// The scenario driver's consumer: a single serial worker tailing the
/// notification log. Each content of a message takes processing_seconds;
/// the message is acked ack_latency after its last content finishes.
/// Duplicate sends are dropped on dedup_key.
class SimConsumer {
 public:
  SimConsumer(Catalog& catalog, std::filesystem::path messages_log, double processing_seconds,
              double ack_latency_seconds);

  /// Ingests new log lines and fires due acks; true when anything happened.
  bool step(Timestamp now);
  std::optional<Timestamp> next_event_time() const;

 private:
  struct PendingAck {
    std::int64_t msg_id = 0;
    Timestamp due = 0;
  };

  Catalog& catalog_;
  std::filesystem::path log_path_;
  double processing_seconds_;
  double ack_latency_seconds_;
  std::streamoff log_offset_ = 0;
  std::set<std::string> seen_dedup_keys_;
  double busy_until_ = 0;
  std::vector<PendingAck> pending_;
};

/// Assembles the fine-mode report from a finished run's transition log and
/// the simulator's pool accounting (also used by the wall-clock demo path).
SimReport build_fine_report(const Catalog& catalog, const SimTapeStorage& sim,
                            std::int64_t request_id, std::uint64_t seed);

/// Maps a transform tag onto the request the scenario submits.
Request scenario_request(const ScenarioConfig& config);

}  // namespace granule
