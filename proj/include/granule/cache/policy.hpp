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

#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

namespace granule {

/// Usage record of one cached content plus the policy constants that shape
/// its lifetime. All policy functions are pure; callers serialize per
/// content_key.
struct UsageState {
  std::string content_key;
  std::vector<double> access_times;  // sorted ascending
  double base_lifetime_seconds = 86400;
  double alpha = 1.0;
  double lambda_decay = 1.0 / 86400;
  double min_lifetime_seconds = 3600;
  double max_lifetime_seconds = 2592000;
};

/// Appends an access at time t; throws NonMonotonicTime when t precedes the
/// last recorded access.
UsageState record_access(UsageState state, double t);

/// Exponentially-decayed access-frequency score scaled onto the base
/// lifetime:
///   f        = sum_i exp(-lambda_decay * (now - t_i))
///   lifetime = clamp(base * (1 + alpha * f), min, max)
/// More recent use extends the lifetime; with no accesses it decays to the
/// base and the clamp keeps it inside [min, max].
double compute_lifetime(const UsageState& state, double now);

/// True when the content has idled past its lifetime shrunk by pool
/// pressure: idle > lifetime * (1 - pressure). At pressure 1 anything idle
/// is evictable, at pressure 0 only lifetime-expired items are.
bool should_evict(const UsageState& state, double now, double pool_pressure);

/// Reads the cache.* policy constants from a config object, falling back to
/// the defaults above.
UsageState usage_state_from_config(const nlohmann::json& config, const std::string& content_key);

}  // namespace granule
