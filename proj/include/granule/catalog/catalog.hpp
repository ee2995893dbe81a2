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
#include <memory>
#include <mutex>
#include <optional>
#include <set>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "granule/core/types.hpp"

namespace granule {

/// Kinds of catalog items. Request, Transform and MessageBatch are the
/// claimable work domains (MessageBatch claims key on request_id: one
/// notification domain per request).
enum class ItemKind { Request, Collection, Content, Transform, Message, MessageBatch };

std::string to_string(ItemKind kind);

struct WorkClaim {
  ItemKind item_kind = ItemKind::Request;
  std::int64_t item_id = 0;
  std::string agent_id;
  Timestamp claimed_at = 0;
  std::int64_t lease_seconds = 0;
};

struct CatalogConfig {
  std::string storage_path;  // file path, or ":memory:" for a volatile store
  std::int64_t lease_seconds_default = 60;
  std::int64_t page_size_max = 1000;
  // Keeps an in-memory log of every status transition; scenario drivers and
  // model-checking tests read it back through transition_log().
  bool record_transitions = false;
};

using FieldValue = std::variant<std::int64_t, double, std::string>;
using FieldChanges = std::map<std::string, FieldValue>;

struct ContentFilter {
  std::optional<std::int64_t> request_id;
  std::optional<std::int64_t> collection_id;
  std::optional<std::set<ContentStatus>> statuses;
  std::string page_token;       // empty = first page
  std::int64_t page_size = 0;   // 0 = page_size_max
};

struct ContentPage {
  std::vector<Content> items;
  std::string next_page_token;  // empty on the last page
};

struct TransitionRecord {
  ItemKind kind = ItemKind::Content;
  std::int64_t item_id = 0;
  std::string from_status;
  std::string to_status;
  Timestamp at = 0;
};

/// The durable store and single serialization point of the service: record
/// mapping plus the transactional operations the daemons and the REST layer
/// run against. One instance may be shared by any number of threads; every
/// public operation is one serializable transaction.
///
/// Status changes are validated against the core transition graphs here, so
/// no caller can persist an illegal lifecycle step. Content status changes
/// refresh the owning collection's counters in the same transaction.
class Catalog {
 public:
  explicit Catalog(CatalogConfig config);
  ~Catalog();

  Catalog(const Catalog&) = delete;
  Catalog& operator=(const Catalog&) = delete;

  /// Closes the underlying store; later operations throw StorageError.
  void close();
  bool ping() const;

  const CatalogConfig& config() const { return config_; }

  // -- requests ------------------------------------------------------------

  /// Stores a fresh request together with its Input and Output collections
  /// and its Transform row in one transaction. Resubmitting while an
  /// identical (scope, name, transform_tag, request_type) request is live
  /// returns the existing id with created=false.
  struct InsertResult {
    std::int64_t request_id = 0;
    bool created = false;
  };
  InsertResult insert_request(const Request& request, Timestamp now);

  Request get_request(std::int64_t request_id) const;
  std::vector<Collection> collections_of(std::int64_t request_id) const;
  Collection get_collection(std::int64_t collection_id) const;
  Transform get_transform(std::int64_t transform_id) const;
  Transform get_transform_of_request(std::int64_t request_id) const;

  // -- work claiming -------------------------------------------------------

  /// Atomically claims up to `limit` items of `kind` whose status string is
  /// in `eligible_statuses` and that carry no live claim by another agent.
  /// A claim by the same agent_id is renewed rather than blocking. Claims
  /// expire once now >= claimed_at + lease_seconds.
  std::vector<std::int64_t> claim_work(ItemKind kind,
                                       const std::vector<std::string>& eligible_statuses,
                                       std::int64_t limit, const std::string& agent_id,
                                       std::int64_t lease_seconds, Timestamp now);

  // -- optimistic updates ---------------------------------------------------

  /// Applies `changes` iff the stored version equals expected_version;
  /// returns the incremented version. "status" changes must be legal
  /// one-step transitions. Throws VersionConflict or NotFound.
  std::int64_t update_with_version(ItemKind kind, std::int64_t item_id,
                                   std::int64_t expected_version, const FieldChanges& changes,
                                   Timestamp now);

  // -- contents ------------------------------------------------------------

  /// Inserts contents into an Open collection, deduplicating on
  /// canonical_content_key within the collection, and refreshes the
  /// collection counters transactionally. Assigns content ids in place.
  /// Returns (inserted, duplicates).
  std::pair<std::int64_t, std::int64_t> bulk_upsert_contents(std::int64_t collection_id,
                                                             std::vector<Content>& contents,
                                                             Timestamp now);

  ContentPage query_contents(const ContentFilter& filter) const;
  Content get_content(std::int64_t content_id) const;

  /// All contents of a collection, content_id ascending (page loop of
  /// query_contents).
  std::vector<Content> contents_of_collection(std::int64_t collection_id) const;

  /// Every match of the filter across all pages, content_id ascending.
  std::vector<Content> contents_filtered(ContentFilter filter) const;

  /// Distinct parent_content_ids already present in a collection.
  std::set<std::int64_t> consumed_parent_ids(std::int64_t collection_id) const;

  /// Persistent per-content delivery-attempt counter; returns the new count.
  std::int64_t increment_content_attempts(std::int64_t content_id);
  std::int64_t content_attempts(std::int64_t content_id) const;

  // -- messages ------------------------------------------------------------

  /// Inserts a New message; a second call with an existing dedup_key returns
  /// the original msg_id and inserts nothing.
  std::int64_t record_message(const Message& message, Timestamp now);

  /// record_message plus the Available -> Delivering step for every bound
  /// content, all in one transaction, so a content can never be batched into
  /// two different messages. Returns (msg_id, inserted).
  std::pair<std::int64_t, bool> record_message_binding_contents(Message& message, Timestamp now);

  /// New -> Sent -> Acked, one step per call; anything else is
  /// IllegalTransition.
  void mark_message(std::int64_t msg_id, MessageStatus new_status, Timestamp now);

  Message get_message(std::int64_t msg_id) const;
  std::vector<Message> messages_of_request(std::int64_t request_id,
                                           std::optional<MessageStatus> status) const;
  std::vector<std::int64_t> acked_message_ids() const;

  // -- heartbeats ----------------------------------------------------------

  void record_heartbeat(const std::string& agent_kind, const std::string& agent_id, Timestamp now);
  std::map<std::string, Timestamp> heartbeats() const;

  // -- inspection ----------------------------------------------------------

  /// Full JSON snapshot of the domain tables, deterministic order. Backs the
  /// `db audit` CLI subcommand.
  nlohmann::json dump_snapshot() const;

  /// FNV-1a hash over the domain tables (requests, collections, contents,
  /// transforms, messages) — claims and heartbeats excluded, so an idle
  /// agent cycle leaves the hash unchanged.
  std::uint64_t domain_state_hash() const;

  /// Recomputes every collection's counters from raw contents and compares
  /// with the stored values. Returns the list of mismatched collection ids.
  std::vector<std::int64_t> audit_counters() const;

  std::vector<TransitionRecord> transition_log() const;

 private:
  class Impl;
  CatalogConfig config_;
  std::unique_ptr<Impl> impl_;
};

}  // namespace granule
