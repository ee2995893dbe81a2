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
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace granule {

// Timestamps are seconds as double: unix epoch seconds on the wall clock,
// scenario-relative seconds on the simulated clock.
using Timestamp = double;

enum class RequestType { StageIn, Transform, EventStream };
enum class Granularity { File, EventRange };

enum class RequestStatus { New, InProgress, Finished, SubFinished, Failed, Cancelled };
enum class RequestEvent { Claim, AllDelivered, MixedTerminal, AllFailed, Cancel };

enum class ContentStatus { New, Staging, Available, Delivering, Delivered, Failed, Released };
enum class ContentEvent { StageRequested, Staged, AlreadyOnDisk, NotifySent, Acked, ReleaseInput, Fail };

enum class CollectionRelation { Input, Output };
enum class CollectionStatus { Open, Closed };

enum class TransformStatus { New, Running, Finished, Failed };

enum class MessageType { ContentAvailable, CollectionClosed, RequestFinished };
enum class MessageStatus { New, Sent, Acked };

/// A WFMS-submitted unit of work naming an input dataset, a transform tag
/// and a delivery granularity.
struct Request {
  std::int64_t request_id = 0;
  std::string scope;
  std::string name;
  RequestType request_type = RequestType::StageIn;
  std::string transform_tag;
  Granularity granularity = Granularity::File;
  std::int64_t chunk_size = 0;  // events per range, EventStream only
  std::int64_t priority = 0;
  RequestStatus status = RequestStatus::New;
  Timestamp created_at = 0;
  Timestamp updated_at = 0;
  std::int64_t lifetime_seconds = 86400;
  std::map<std::string, std::string> metadata;
  std::int64_t version = 0;
};

/// An input or output dataset attached to a request, with aggregate
/// content counters maintained by the catalog.
struct Collection {
  std::int64_t collection_id = 0;
  std::int64_t request_id = 0;
  CollectionRelation relation = CollectionRelation::Input;
  std::string scope;
  std::string name;
  std::int64_t total_contents = 0;
  std::int64_t available_contents = 0;
  std::int64_t delivered_contents = 0;
  CollectionStatus status = CollectionStatus::Open;
  std::int64_t version = 0;
};

/// The delivery granule: a whole file or an event range within one.
/// File granularity uses min_id = 0, max_id = event_count - 1, or 0/0 when
/// the event count is unknown.
struct Content {
  std::int64_t content_id = 0;
  std::int64_t collection_id = 0;
  std::string scope;
  std::string name;
  std::int64_t min_id = 0;
  std::int64_t max_id = 0;
  ContentStatus status = ContentStatus::New;
  std::int64_t size_bytes = 0;
  std::string checksum;  // 8-hex-digit adler32, empty when unknown
  std::string locator;
  std::optional<std::int64_t> parent_content_id;  // set on Output contents only
  std::int64_t version = 0;
};

struct Transform {
  std::int64_t transform_id = 0;
  std::int64_t request_id = 0;
  std::string transform_tag;
  TransformStatus status = TransformStatus::New;
  std::int64_t retries = 0;
  std::int64_t max_retries = 3;
  std::int64_t version = 0;
};

/// A fine-grained notification that specific contents are available.
/// content_ids is non-empty for ContentAvailable and empty otherwise.
struct Message {
  std::int64_t msg_id = 0;
  std::int64_t request_id = 0;
  MessageType msg_type = MessageType::ContentAvailable;
  std::vector<std::int64_t> content_ids;
  std::string dedup_key;
  MessageStatus status = MessageStatus::New;
  Timestamp created_at = 0;
};

// Enum <-> lowercase snake_case string, the wire and storage form.
// Parsers throw Error(InvalidArgument) on unknown strings.
std::string to_string(RequestType v);
std::string to_string(Granularity v);
std::string to_string(RequestStatus v);
std::string to_string(RequestEvent v);
std::string to_string(ContentStatus v);
std::string to_string(ContentEvent v);
std::string to_string(CollectionRelation v);
std::string to_string(CollectionStatus v);
std::string to_string(TransformStatus v);
std::string to_string(MessageType v);
std::string to_string(MessageStatus v);

RequestType request_type_from_string(const std::string& s);
Granularity granularity_from_string(const std::string& s);
RequestStatus request_status_from_string(const std::string& s);
ContentStatus content_status_from_string(const std::string& s);
CollectionRelation collection_relation_from_string(const std::string& s);
CollectionStatus collection_status_from_string(const std::string& s);
TransformStatus transform_status_from_string(const std::string& s);
MessageType message_type_from_string(const std::string& s);
MessageStatus message_status_from_string(const std::string& s);

bool is_terminal(RequestStatus s);

}  // namespace granule
