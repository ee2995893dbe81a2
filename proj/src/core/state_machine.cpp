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

#include "granule/core/state_machine.hpp"

#include <algorithm>

#include "granule/errors.hpp"

namespace granule {

RequestStatus next_request_status(RequestStatus current, RequestEvent event) {
  if (!is_terminal(current) && event == RequestEvent::Cancel) return RequestStatus::Cancelled;
  switch (current) {
    case RequestStatus::New:
      if (event == RequestEvent::Claim) return RequestStatus::InProgress;
      break;
    case RequestStatus::InProgress:
      if (event == RequestEvent::AllDelivered) return RequestStatus::Finished;
      if (event == RequestEvent::MixedTerminal) return RequestStatus::SubFinished;
      if (event == RequestEvent::AllFailed) return RequestStatus::Failed;
      break;
    default:
      break;
  }
  throw Error(ErrorCode::IllegalTransition,
              "request " + to_string(current) + " + " + to_string(event));
}

ContentStatus next_content_status(ContentStatus current, ContentEvent event) {
  switch (current) {
    case ContentStatus::New:
      if (event == ContentEvent::StageRequested) return ContentStatus::Staging;
      if (event == ContentEvent::AlreadyOnDisk) return ContentStatus::Available;
      if (event == ContentEvent::Fail) return ContentStatus::Failed;
      break;
    case ContentStatus::Staging:
      if (event == ContentEvent::Staged) return ContentStatus::Available;
      if (event == ContentEvent::Fail) return ContentStatus::Failed;
      break;
    case ContentStatus::Available:
      if (event == ContentEvent::NotifySent) return ContentStatus::Delivering;
      break;
    case ContentStatus::Delivering:
      if (event == ContentEvent::Acked) return ContentStatus::Delivered;
      if (event == ContentEvent::Fail) return ContentStatus::Failed;
      break;
    case ContentStatus::Delivered:
      if (event == ContentEvent::ReleaseInput) return ContentStatus::Released;
      break;
    default:
      break;
  }
  throw Error(ErrorCode::IllegalTransition,
              "content " + to_string(current) + " + " + to_string(event));
}

namespace {

constexpr ContentEvent kAllContentEvents[] = {
    ContentEvent::StageRequested, ContentEvent::Staged,       ContentEvent::AlreadyOnDisk,
    ContentEvent::NotifySent,     ContentEvent::Acked,        ContentEvent::ReleaseInput,
    ContentEvent::Fail,
};

constexpr RequestEvent kAllRequestEvents[] = {
    RequestEvent::Claim,     RequestEvent::AllDelivered, RequestEvent::MixedTerminal,
    RequestEvent::AllFailed, RequestEvent::Cancel,
};

}  // namespace

bool content_transition_allowed(ContentStatus from, ContentStatus to) {
  for (ContentEvent e : kAllContentEvents) {
    try {
      if (next_content_status(from, e) == to) return true;
    } catch (const Error&) {
    }
  }
  return false;
}

bool request_transition_allowed(RequestStatus from, RequestStatus to) {
  for (RequestEvent e : kAllRequestEvents) {
    try {
      if (next_request_status(from, e) == to) return true;
    } catch (const Error&) {
    }
  }
  return false;
}

CollectionCounters derive_collection_counters(const std::vector<ContentStatus>& statuses) {
  CollectionCounters c;
  c.total = static_cast<std::int64_t>(statuses.size());
  for (ContentStatus s : statuses) {
    switch (s) {
      case ContentStatus::Available:
      case ContentStatus::Delivering:
        c.available++;
        break;
      case ContentStatus::Delivered:
      case ContentStatus::Released:
        c.available++;
        c.delivered++;
        break;
      default:
        break;
    }
  }
  return c;
}

std::optional<RequestEvent> derive_request_event(const std::vector<ContentStatus>& output_statuses,
                                                 bool collections_closed) {
  if (!collections_closed) return std::nullopt;
  bool any_failed = false;
  bool all_failed = true;
  for (ContentStatus s : output_statuses) {
    switch (s) {
      case ContentStatus::Delivered:
      case ContentStatus::Released:
        all_failed = false;
        break;
      case ContentStatus::Failed:
        any_failed = true;
        break;
      default:
        return std::nullopt;  // non-terminal content, nothing to decide yet
    }
  }
  if (output_statuses.empty()) all_failed = false;
  if (!any_failed) return RequestEvent::AllDelivered;
  if (all_failed) return RequestEvent::AllFailed;
  return RequestEvent::MixedTerminal;
}

std::vector<EventRange> split_event_ranges(std::int64_t event_count, std::int64_t chunk_size) {
  if (event_count < 1) throw Error(ErrorCode::InvalidArgument, "event_count must be >= 1");
  if (chunk_size < 1) throw Error(ErrorCode::InvalidArgument, "chunk_size must be >= 1");
  std::vector<EventRange> ranges;
  ranges.reserve(static_cast<std::size_t>((event_count + chunk_size - 1) / chunk_size));
  for (std::int64_t lo = 0; lo < event_count; lo += chunk_size) {
    ranges.push_back({lo, std::min(lo + chunk_size - 1, event_count - 1)});
  }
  return ranges;
}

std::string canonical_content_key(const std::string& scope, const std::string& name,
                                  std::int64_t min_id, std::int64_t max_id) {
  if (scope.find(':') != std::string::npos || name.find(':') != std::string::npos) {
    throw Error(ErrorCode::InvalidArgument, "scope and name must not contain ':'");
  }
  return scope + ":" + name + ":" + std::to_string(min_id) + ":" + std::to_string(max_id);
}

}  // namespace granule
