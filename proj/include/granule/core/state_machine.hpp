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

#include "granule/core/types.hpp"

namespace granule {

// The request and content lifecycles every other module must obey. All
// functions here are pure; illegal (state, event) pairs throw
// Error(IllegalTransition).

/// Request lifecycle:
///   New        + Claim         -> InProgress
///   InProgress + AllDelivered  -> Finished
///   InProgress + MixedTerminal -> SubFinished
///   InProgress + AllFailed     -> Failed
///   any non-terminal + Cancel  -> Cancelled
/// Terminal states (Finished, SubFinished, Failed, Cancelled) admit nothing.
RequestStatus next_request_status(RequestStatus current, RequestEvent event);

/// Content lifecycle:
///   New        + StageRequested -> Staging
///   Staging    + Staged         -> Available
///   New        + AlreadyOnDisk  -> Available
///   Available  + NotifySent     -> Delivering
///   Delivering + Acked          -> Delivered
///   Delivered  + ReleaseInput   -> Released   (input contents only)
///   New | Staging | Delivering + Fail -> Failed
ContentStatus next_content_status(ContentStatus current, ContentEvent event);

/// True when `to` is one legal step from `from` under some event.
bool content_transition_allowed(ContentStatus from, ContentStatus to);
bool request_transition_allowed(RequestStatus from, RequestStatus to);

struct CollectionCounters {
  std::int64_t total = 0;
  std::int64_t available = 0;  // Available, Delivering, Delivered, Released
  std::int64_t delivered = 0;  // Delivered, Released

  bool operator==(const CollectionCounters&) const = default;
};

CollectionCounters derive_collection_counters(const std::vector<ContentStatus>& statuses);

/// Decides the request-finishing event once every Output-collection content
/// is terminal (Delivered, Released or Failed) and the collections are
/// closed; returns nothing before that.
std::optional<RequestEvent> derive_request_event(const std::vector<ContentStatus>& output_statuses,
                                                 bool collections_closed);

struct EventRange {
  std::int64_t min_id = 0;
  std::int64_t max_id = 0;

  bool operator==(const EventRange&) const = default;
};

/// Splits [0, event_count-1] into contiguous chunks of chunk_size events,
/// the last one possibly shorter. Throws InvalidArgument on zero inputs.
std::vector<EventRange> split_event_ranges(std::int64_t event_count, std::int64_t chunk_size);

/// Injective "scope:name:min_id:max_id" encoding used for content
/// deduplication. Throws InvalidArgument when scope or name contains ':'.
std::string canonical_content_key(const std::string& scope, const std::string& name,
                                  std::int64_t min_id, std::int64_t max_id);

}  // namespace granule
