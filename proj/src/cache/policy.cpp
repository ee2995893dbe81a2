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

#include "granule/cache/policy.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <nlohmann/json.hpp>

#include "granule/errors.hpp"

namespace granule {

UsageState record_access(UsageState state, double t) {
  if (!state.access_times.empty() && t < state.access_times.back()) {
    throw Error(ErrorCode::NonMonotonicTime,
                "access at " + std::to_string(t) + " precedes last recorded access");
  }
  state.access_times.push_back(t);
  return state;
}

double compute_lifetime(const UsageState& state, double now) {
  double frequency = 0;
  for (double t : state.access_times) {
    frequency += std::exp(-state.lambda_decay * (now - t));
  }
  double lifetime = state.base_lifetime_seconds * (1.0 + state.alpha * frequency);
  return std::clamp(lifetime, state.min_lifetime_seconds, state.max_lifetime_seconds);
}

bool should_evict(const UsageState& state, double now, double pool_pressure) {
  double pressure = std::clamp(pool_pressure, 0.0, 1.0);
  double idle = state.access_times.empty()
                    ? std::numeric_limits<double>::infinity()
                    : now - state.access_times.back();
  return idle > compute_lifetime(state, now) * (1.0 - pressure);
}

UsageState usage_state_from_config(const nlohmann::json& config, const std::string& content_key) {
  UsageState state;
  state.content_key = content_key;
  if (config.contains("cache")) {
    const nlohmann::json& c = config["cache"];
    state.alpha = c.value("alpha", state.alpha);
    state.lambda_decay = c.value("lambda_decay", state.lambda_decay);
    state.base_lifetime_seconds = c.value("base_lifetime_seconds", state.base_lifetime_seconds);
    state.min_lifetime_seconds = c.value("min_lifetime_seconds", state.min_lifetime_seconds);
    state.max_lifetime_seconds = c.value("max_lifetime_seconds", state.max_lifetime_seconds);
  }
  if (state.lambda_decay <= 0) throw Error(ErrorCode::InvalidArgument, "lambda_decay must be > 0");
  if (state.alpha < 0) throw Error(ErrorCode::InvalidArgument, "alpha must be >= 0");
  if (!(state.min_lifetime_seconds <= state.base_lifetime_seconds &&
        state.base_lifetime_seconds <= state.max_lifetime_seconds)) {
    throw Error(ErrorCode::InvalidArgument, "need min <= base <= max lifetime");
  }
  return state;
}

}  // namespace granule
