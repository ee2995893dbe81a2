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
#include <deque>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "granule/plugins/ddm.hpp"

namespace granule {

enum class ClockMode { Simulated, Wall };

struct SimTapeConfig {
  std::uint64_t seed = 0;
  std::int64_t file_count = 1;
  // Uniform size, or one entry per file when the JSON carries a list.
  std::vector<std::int64_t> file_size_bytes = {1};
  std::int64_t event_count_per_file = 1;
  std::int64_t staging_slots = 1;
  double staging_seconds_base = 1.0;
  double staging_seconds_jitter = 0.0;
  std::int64_t disk_pool_capacity_bytes = 1;
  ClockMode clock = ClockMode::Simulated;
  std::string scope = "sim";
  std::string dataset = "dataset";

  std::int64_t size_of_file(std::int64_t index) const;
  std::int64_t total_bytes() const;
  void validate() const;

  static SimTapeConfig from_json(const nlohmann::json& j);
  nlohmann::json to_json() const;
};

struct SimTapeEvent {
  enum class Kind { StageStart, StageDone, Release };
  double at = 0;
  Kind kind = Kind::StageStart;
  std::int64_t file_index = 0;
  std::int64_t pool_occupancy_bytes = 0;
};

/// Deterministic tape + staging-pool simulator serving one dataset.
///
/// Stage-in requests queue FIFO; a request starts only when a staging slot
/// is free and the pool has room for the whole file, and a blocked queue
/// head also blocks everything behind it. File i stages for
/// base + jitter_i seconds with jitter_i drawn from [0, jitter] by a
/// generator keyed on (seed, i), so trajectories depend only on the config.
/// Pool occupancy covers Staging and OnDisk files; release drops the disk
/// copy and returns the replica to TapeOnly (the tape copy remains).
class SimTapeStorage : public DdmClient {
 public:
  explicit SimTapeStorage(SimTapeConfig config);

  std::vector<Replica> list_files(const std::string& scope, const std::string& name) override;
  void stage_in(const Replica& replica) override;
  Replica poll_state(const Replica& replica) override;
  void release(const Replica& replica) override;

  double now() const;
  /// Simulated clock only: processes every internal event up to `t` and
  /// moves the clock there.
  void advance_to(double t);
  /// Earliest pending staging completion, if any.
  std::optional<double> next_event_time() const;

  std::int64_t pool_occupancy_bytes() const;
  std::int64_t peak_pool_bytes() const;
  std::int64_t total_bytes() const { return config_.total_bytes(); }
  const SimTapeConfig& config() const { return config_; }
  std::vector<SimTapeEvent> event_trace() const;

  /// Pinned staging duration formula, also usable by independent checkers.
  static double staging_seconds(const SimTapeConfig& config, std::int64_t file_index);

 private:
  struct FileState {
    Replica replica;
    bool stage_requested = false;
    double staging_finish = 0;
  };

  void catch_up(double t);
  void try_start_pending(double t);
  std::int64_t index_of(const Replica& replica) const;
  double wall_now() const;
  double current_time() const;

  SimTapeConfig config_;
  mutable std::recursive_mutex mu_;
  std::vector<FileState> files_;
  std::deque<std::int64_t> pending_;
  std::vector<std::int64_t> active_;
  std::int64_t occupancy_ = 0;
  std::int64_t peak_ = 0;
  double sim_now_ = 0;
  double wall_epoch_ = 0;
  std::vector<SimTapeEvent> trace_;
};

}  // namespace granule
