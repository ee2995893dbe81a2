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

#include "granule/plugins/sim_tape.hpp"

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <limits>
#include <utility>

#include <nlohmann/json.hpp>

#include "granule/core/checksum.hpp"
#include "granule/errors.hpp"

namespace granule {

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ull;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
  return x ^ (x >> 31);
}

std::string file_name(const std::string& dataset, std::int64_t index) {
  char buf[16];
  std::snprintf(buf, sizeof(buf), "%05lld", static_cast<long long>(index));
  return dataset + ".file_" + buf;
}

}  // namespace

std::string to_string(ReplicaState s) {
  switch (s) {
    case ReplicaState::TapeOnly: return "tape_only";
    case ReplicaState::Staging: return "staging";
    case ReplicaState::OnDisk: return "on_disk";
  }
  return "tape_only";
}

std::int64_t SimTapeConfig::size_of_file(std::int64_t index) const {
  if (file_size_bytes.empty()) return 1;
  if (file_size_bytes.size() == 1) return file_size_bytes[0];
  return file_size_bytes.at(static_cast<std::size_t>(index));
}

std::int64_t SimTapeConfig::total_bytes() const {
  std::int64_t total = 0;
  for (std::int64_t i = 0; i < file_count; ++i) total += size_of_file(i);
  return total;
}

void SimTapeConfig::validate() const {
  if (file_count < 1) throw Error(ErrorCode::InvalidArgument, "file_count must be >= 1");
  if (file_size_bytes.empty()) throw Error(ErrorCode::InvalidArgument, "file_size_bytes empty");
  if (file_size_bytes.size() != 1 &&
      file_size_bytes.size() != static_cast<std::size_t>(file_count)) {
    throw Error(ErrorCode::InvalidArgument, "file_size_bytes must have one or file_count entries");
  }
  std::int64_t max_size = 0;
  for (std::int64_t s : file_size_bytes) {
    if (s < 1) throw Error(ErrorCode::InvalidArgument, "file sizes must be positive");
    max_size = std::max(max_size, s);
  }
  if (event_count_per_file < 1) {
    throw Error(ErrorCode::InvalidArgument, "event_count_per_file must be >= 1");
  }
  if (staging_slots < 1) throw Error(ErrorCode::InvalidArgument, "staging_slots must be >= 1");
  if (staging_seconds_base < 0 || staging_seconds_jitter < 0) {
    throw Error(ErrorCode::InvalidArgument, "staging seconds must be non-negative");
  }
  if (disk_pool_capacity_bytes < max_size) {
    throw Error(ErrorCode::InvalidArgument, "pool capacity below the largest file");
  }
}

SimTapeConfig SimTapeConfig::from_json(const nlohmann::json& j) {
  SimTapeConfig c;
  c.seed = j.value("seed", std::uint64_t{0});
  c.file_count = j.value("file_count", std::int64_t{1});
  if (j.contains("file_size_bytes")) {
    if (j["file_size_bytes"].is_array()) {
      c.file_size_bytes = j["file_size_bytes"].get<std::vector<std::int64_t>>();
    } else {
      c.file_size_bytes = {j["file_size_bytes"].get<std::int64_t>()};
    }
  }
  c.event_count_per_file = j.value("event_count_per_file", std::int64_t{1});
  c.staging_slots = j.value("staging_slots", std::int64_t{1});
  c.staging_seconds_base = j.value("staging_seconds_base", 1.0);
  c.staging_seconds_jitter = j.value("staging_seconds_jitter", 0.0);
  c.disk_pool_capacity_bytes = j.value("disk_pool_capacity_bytes", std::int64_t{0});
  if (c.disk_pool_capacity_bytes == 0) c.disk_pool_capacity_bytes = c.total_bytes();
  std::string clock = j.value("clock", "simulated");
  if (clock == "simulated") {
    c.clock = ClockMode::Simulated;
  } else if (clock == "wall") {
    c.clock = ClockMode::Wall;
  } else {
    throw Error(ErrorCode::InvalidArgument, "clock must be 'simulated' or 'wall'");
  }
  c.scope = j.value("scope", "sim");
  c.dataset = j.value("dataset", "dataset");
  c.validate();
  return c;
}

nlohmann::json SimTapeConfig::to_json() const {
  nlohmann::json j;
  j["seed"] = seed;
  j["file_count"] = file_count;
  if (file_size_bytes.size() == 1) {
    j["file_size_bytes"] = file_size_bytes[0];
  } else {
    j["file_size_bytes"] = file_size_bytes;
  }
  j["event_count_per_file"] = event_count_per_file;
  j["staging_slots"] = staging_slots;
  j["staging_seconds_base"] = staging_seconds_base;
  j["staging_seconds_jitter"] = staging_seconds_jitter;
  j["disk_pool_capacity_bytes"] = disk_pool_capacity_bytes;
  j["clock"] = clock == ClockMode::Simulated ? "simulated" : "wall";
  j["scope"] = scope;
  j["dataset"] = dataset;
  return j;
}

double SimTapeStorage::staging_seconds(const SimTapeConfig& config, std::int64_t file_index) {
  std::uint64_t word =
      splitmix64(config.seed ^ (0x9E3779B97F4A7C15ull * static_cast<std::uint64_t>(file_index + 1)));
  double unit = static_cast<double>(word >> 11) * 0x1.0p-53;
  return config.staging_seconds_base + config.staging_seconds_jitter * unit;
}

SimTapeStorage::SimTapeStorage(SimTapeConfig config) : config_(std::move(config)) {
  config_.validate();
  files_.reserve(static_cast<std::size_t>(config_.file_count));
  for (std::int64_t i = 0; i < config_.file_count; ++i) {
    FileState f;
    f.replica.scope = config_.scope;
    f.replica.name = file_name(config_.dataset, i);
    f.replica.state = ReplicaState::TapeOnly;
    f.replica.size_bytes = config_.size_of_file(i);
    f.replica.event_count = config_.event_count_per_file;
    f.replica.locator = "tape://" + config_.scope + "/" + config_.dataset + "/" + f.replica.name;
    files_.push_back(std::move(f));
  }
  if (config_.clock == ClockMode::Wall) wall_epoch_ = wall_now();
}

double SimTapeStorage::wall_now() const {
  auto now = std::chrono::steady_clock::now().time_since_epoch();
  return std::chrono::duration<double>(now).count();
}

double SimTapeStorage::current_time() const {
  return config_.clock == ClockMode::Simulated ? sim_now_ : wall_now() - wall_epoch_;
}

double SimTapeStorage::now() const {
  std::lock_guard lock(mu_);
  return current_time();
}

std::int64_t SimTapeStorage::index_of(const Replica& replica) const {
  for (std::size_t i = 0; i < files_.size(); ++i) {
    if (files_[i].replica.name == replica.name && files_[i].replica.scope == replica.scope) {
      return static_cast<std::int64_t>(i);
    }
  }
  throw Error(ErrorCode::UnknownDataset, "no replica " + replica.scope + ":" + replica.name);
}

void SimTapeStorage::try_start_pending(double t) {
  while (!pending_.empty() &&
         std::cmp_less(active_.size(), static_cast<std::size_t>(config_.staging_slots))) {
    std::int64_t idx = pending_.front();
    FileState& f = files_[static_cast<std::size_t>(idx)];
    if (occupancy_ + f.replica.size_bytes > config_.disk_pool_capacity_bytes) {
      break;  // head waits for pool room; later entries wait behind it
    }
    pending_.pop_front();
    occupancy_ += f.replica.size_bytes;
    peak_ = std::max(peak_, occupancy_);
    if (occupancy_ > config_.disk_pool_capacity_bytes) {
      throw Error(ErrorCode::IllegalState, "pool occupancy above capacity");
    }
    f.replica.state = ReplicaState::Staging;
    f.staging_finish = t + staging_seconds(config_, idx);
    active_.push_back(idx);
    if (std::cmp_greater(active_.size(), static_cast<std::size_t>(config_.staging_slots))) {
      throw Error(ErrorCode::IllegalState, "active stagings above slot count");
    }
    trace_.push_back({t, SimTapeEvent::Kind::StageStart, idx, occupancy_});
  }
}

void SimTapeStorage::catch_up(double t) {
  while (true) {
    double earliest = std::numeric_limits<double>::infinity();
    std::size_t pick = active_.size();
    for (std::size_t i = 0; i < active_.size(); ++i) {
      const FileState& f = files_[static_cast<std::size_t>(active_[i])];
      // Ties resolve by file index so trajectories are reproducible.
      bool better = pick == active_.size() || f.staging_finish < earliest ||
                    (f.staging_finish == earliest && active_[i] < active_[pick]);
      if (better) {
        earliest = f.staging_finish;
        pick = i;
      }
    }
    if (pick == active_.size() || earliest > t) break;
    std::int64_t idx = active_[pick];
    active_.erase(active_.begin() + static_cast<std::ptrdiff_t>(pick));
    FileState& f = files_[static_cast<std::size_t>(idx)];
    f.replica.state = ReplicaState::OnDisk;
    trace_.push_back({earliest, SimTapeEvent::Kind::StageDone, idx, occupancy_});
    try_start_pending(earliest);
  }
}

std::vector<Replica> SimTapeStorage::list_files(const std::string& scope,
                                                const std::string& name) {
  std::lock_guard lock(mu_);
  if (scope != config_.scope || name != config_.dataset) {
    throw Error(ErrorCode::UnknownDataset, scope + ":" + name);
  }
  catch_up(current_time());
  std::vector<Replica> out;
  out.reserve(files_.size());
  for (const FileState& f : files_) out.push_back(f.replica);
  return out;
}

void SimTapeStorage::stage_in(const Replica& replica) {
  std::lock_guard lock(mu_);
  double t = current_time();
  catch_up(t);
  std::int64_t idx = index_of(replica);
  FileState& f = files_[static_cast<std::size_t>(idx)];
  if (f.replica.state != ReplicaState::TapeOnly || f.stage_requested) {
    throw Error(ErrorCode::IllegalState,
                "stage_in on " + f.replica.name + " in state " + to_string(f.replica.state));
  }
  f.stage_requested = true;
  pending_.push_back(idx);
  try_start_pending(t);
}

Replica SimTapeStorage::poll_state(const Replica& replica) {
  std::lock_guard lock(mu_);
  catch_up(current_time());
  return files_[static_cast<std::size_t>(index_of(replica))].replica;
}

void SimTapeStorage::release(const Replica& replica) {
  std::lock_guard lock(mu_);
  double t = current_time();
  catch_up(t);
  std::int64_t idx = index_of(replica);
  FileState& f = files_[static_cast<std::size_t>(idx)];
  if (f.replica.state != ReplicaState::OnDisk) {
    throw Error(ErrorCode::IllegalState,
                "release on " + f.replica.name + " in state " + to_string(f.replica.state));
  }
  occupancy_ -= f.replica.size_bytes;
  f.replica.state = ReplicaState::TapeOnly;  // tape copy remains, disk copy dropped
  f.stage_requested = false;
  trace_.push_back({t, SimTapeEvent::Kind::Release, idx, occupancy_});
  try_start_pending(t);
}

void SimTapeStorage::advance_to(double t) {
  std::lock_guard lock(mu_);
  if (config_.clock != ClockMode::Simulated) {
    throw Error(ErrorCode::IllegalState, "advance_to is for the simulated clock");
  }
  if (t < sim_now_) throw Error(ErrorCode::InvalidArgument, "clock cannot move backwards");
  catch_up(t);
  sim_now_ = t;
}

std::optional<double> SimTapeStorage::next_event_time() const {
  std::lock_guard lock(mu_);
  std::optional<double> earliest;
  for (std::int64_t idx : active_) {
    double finish = files_[static_cast<std::size_t>(idx)].staging_finish;
    if (!earliest || finish < *earliest) earliest = finish;
  }
  return earliest;
}

std::int64_t SimTapeStorage::pool_occupancy_bytes() const {
  std::lock_guard lock(mu_);
  return occupancy_;
}

std::int64_t SimTapeStorage::peak_pool_bytes() const {
  std::lock_guard lock(mu_);
  return peak_;
}

std::vector<SimTapeEvent> SimTapeStorage::event_trace() const {
  std::lock_guard lock(mu_);
  return trace_;
}

}  // namespace granule
