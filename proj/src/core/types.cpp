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

#include "granule/core/types.hpp"

#include <array>
#include <utility>

#include "granule/errors.hpp"

namespace granule {
namespace {

template <typename E, std::size_t N>
std::string enum_to_string(E v, const std::array<std::pair<E, const char*>, N>& table,
                           const char* kind) {
  for (const auto& [e, s] : table) {
    if (e == v) return s;
  }
  throw Error(ErrorCode::Internal, std::string("unmapped ") + kind + " enum value");
}

template <typename E, std::size_t N>
E enum_from_string(const std::string& s, const std::array<std::pair<E, const char*>, N>& table,
                   const char* kind) {
  for (const auto& [e, name] : table) {
    if (s == name) return e;
  }
  throw Error(ErrorCode::InvalidArgument, std::string("unknown ") + kind + " '" + s + "'");
}

constexpr std::array<std::pair<RequestType, const char*>, 3> kRequestType{{
    {RequestType::StageIn, "stage_in"},
    {RequestType::Transform, "transform"},
    {RequestType::EventStream, "event_stream"},
}};

constexpr std::array<std::pair<Granularity, const char*>, 2> kGranularity{{
    {Granularity::File, "file"},
    {Granularity::EventRange, "event_range"},
}};

constexpr std::array<std::pair<RequestStatus, const char*>, 6> kRequestStatus{{
    {RequestStatus::New, "new"},
    {RequestStatus::InProgress, "in_progress"},
    {RequestStatus::Finished, "finished"},
    {RequestStatus::SubFinished, "sub_finished"},
    {RequestStatus::Failed, "failed"},
    {RequestStatus::Cancelled, "cancelled"},
}};

constexpr std::array<std::pair<RequestEvent, const char*>, 5> kRequestEvent{{
    {RequestEvent::Claim, "claim"},
    {RequestEvent::AllDelivered, "all_delivered"},
    {RequestEvent::MixedTerminal, "mixed_terminal"},
    {RequestEvent::AllFailed, "all_failed"},
    {RequestEvent::Cancel, "cancel"},
}};

constexpr std::array<std::pair<ContentStatus, const char*>, 7> kContentStatus{{
    {ContentStatus::New, "new"},
    {ContentStatus::Staging, "staging"},
    {ContentStatus::Available, "available"},
    {ContentStatus::Delivering, "delivering"},
    {ContentStatus::Delivered, "delivered"},
    {ContentStatus::Failed, "failed"},
    {ContentStatus::Released, "released"},
}};

constexpr std::array<std::pair<ContentEvent, const char*>, 7> kContentEvent{{
    {ContentEvent::StageRequested, "stage_requested"},
    {ContentEvent::Staged, "staged"},
    {ContentEvent::AlreadyOnDisk, "already_on_disk"},
    {ContentEvent::NotifySent, "notify_sent"},
    {ContentEvent::Acked, "acked"},
    {ContentEvent::ReleaseInput, "release_input"},
    {ContentEvent::Fail, "fail"},
}};

constexpr std::array<std::pair<CollectionRelation, const char*>, 2> kRelation{{
    {CollectionRelation::Input, "input"},
    {CollectionRelation::Output, "output"},
}};

constexpr std::array<std::pair<CollectionStatus, const char*>, 2> kCollectionStatus{{
    {CollectionStatus::Open, "open"},
    {CollectionStatus::Closed, "closed"},
}};

constexpr std::array<std::pair<TransformStatus, const char*>, 4> kTransformStatus{{
    {TransformStatus::New, "new"},
    {TransformStatus::Running, "running"},
    {TransformStatus::Finished, "finished"},
    {TransformStatus::Failed, "failed"},
}};

constexpr std::array<std::pair<MessageType, const char*>, 3> kMessageType{{
    {MessageType::ContentAvailable, "content_available"},
    {MessageType::CollectionClosed, "collection_closed"},
    {MessageType::RequestFinished, "request_finished"},
}};

constexpr std::array<std::pair<MessageStatus, const char*>, 3> kMessageStatus{{
    {MessageStatus::New, "new"},
    {MessageStatus::Sent, "sent"},
    {MessageStatus::Acked, "acked"},
}};

}  // namespace

std::string to_string(RequestType v) { return enum_to_string(v, kRequestType, "request_type"); }
std::string to_string(Granularity v) { return enum_to_string(v, kGranularity, "granularity"); }
std::string to_string(RequestStatus v) { return enum_to_string(v, kRequestStatus, "request_status"); }
std::string to_string(RequestEvent v) { return enum_to_string(v, kRequestEvent, "request_event"); }
std::string to_string(ContentStatus v) { return enum_to_string(v, kContentStatus, "content_status"); }
std::string to_string(ContentEvent v) { return enum_to_string(v, kContentEvent, "content_event"); }
std::string to_string(CollectionRelation v) { return enum_to_string(v, kRelation, "relation"); }
std::string to_string(CollectionStatus v) {
  return enum_to_string(v, kCollectionStatus, "collection_status");
}
std::string to_string(TransformStatus v) {
  return enum_to_string(v, kTransformStatus, "transform_status");
}
std::string to_string(MessageType v) { return enum_to_string(v, kMessageType, "msg_type"); }
std::string to_string(MessageStatus v) { return enum_to_string(v, kMessageStatus, "msg_status"); }

RequestType request_type_from_string(const std::string& s) {
  return enum_from_string(s, kRequestType, "request_type");
}
Granularity granularity_from_string(const std::string& s) {
  return enum_from_string(s, kGranularity, "granularity");
}
RequestStatus request_status_from_string(const std::string& s) {
  return enum_from_string(s, kRequestStatus, "request_status");
}
ContentStatus content_status_from_string(const std::string& s) {
  return enum_from_string(s, kContentStatus, "content_status");
}
CollectionRelation collection_relation_from_string(const std::string& s) {
  return enum_from_string(s, kRelation, "relation");
}
CollectionStatus collection_status_from_string(const std::string& s) {
  return enum_from_string(s, kCollectionStatus, "collection_status");
}
TransformStatus transform_status_from_string(const std::string& s) {
  return enum_from_string(s, kTransformStatus, "transform_status");
}
MessageType message_type_from_string(const std::string& s) {
  return enum_from_string(s, kMessageType, "msg_type");
}
MessageStatus message_status_from_string(const std::string& s) {
  return enum_from_string(s, kMessageStatus, "msg_status");
}

bool is_terminal(RequestStatus s) {
  return s == RequestStatus::Finished || s == RequestStatus::SubFinished ||
         s == RequestStatus::Failed || s == RequestStatus::Cancelled;
}

const char* error_code_name(ErrorCode code) {
  switch (code) {
    case ErrorCode::IllegalTransition: return "illegal_transition";
    case ErrorCode::InvalidArgument: return "invalid_argument";
    case ErrorCode::NotFound: return "not_found";
    case ErrorCode::VersionConflict: return "version_conflict";
    case ErrorCode::CollectionClosed: return "collection_closed";
    case ErrorCode::StorageError: return "storage_error";
    case ErrorCode::UnknownDataset: return "unknown_dataset";
    case ErrorCode::IllegalState: return "illegal_state";
    case ErrorCode::MissingEventCount: return "missing_event_count";
    case ErrorCode::NonMonotonicTime: return "non_monotonic_time";
    case ErrorCode::InvalidFilter: return "invalid_filter";
    case ErrorCode::PluginNotFound: return "plugin_not_found";
    case ErrorCode::ScenarioFailed: return "scenario_failed";
    case ErrorCode::MismatchedScenarios: return "mismatched_scenarios";
    case ErrorCode::Internal: return "internal";
  }
  return "internal";
}

}  // namespace granule
