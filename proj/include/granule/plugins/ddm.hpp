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
#include <optional>
#include <string>
#include <vector>

namespace granule {

enum class ReplicaState { TapeOnly, Staging, OnDisk };

std::string to_string(ReplicaState s);

/// Storage-side view of one file of a dataset.
struct Replica {
  std::string scope;
  std::string name;
  ReplicaState state = ReplicaState::TapeOnly;
  std::int64_t size_bytes = 0;
  std::optional<std::int64_t> event_count;
  std::string locator;
};

/// Data-management backend interface. stage_in requires TapeOnly, release
/// requires OnDisk; violations throw Error(IllegalState).
class DdmClient {
 public:
  virtual ~DdmClient() = default;

  virtual std::vector<Replica> list_files(const std::string& scope, const std::string& name) = 0;
  virtual void stage_in(const Replica& replica) = 0;
  virtual Replica poll_state(const Replica& replica) = 0;
  virtual void release(const Replica& replica) = 0;
};

}  // namespace granule
