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

#include <algorithm>
#include <map>

#include <nlohmann/json.hpp>

#include "granule/agents/agents.hpp"
#include "granule/core/state_machine.hpp"
#include "granule/errors.hpp"

namespace granule {

namespace {

Collection find_collection(const std::vector<Collection>& collections,
                           CollectionRelation relation) {
  for (const Collection& c : collections) {
    if (c.relation == relation) return c;
  }
  throw Error(ErrorCode::NotFound, "request has no " + to_string(relation) + " collection");
}

std::string content_batch_dedup_key(std::int64_t request_id,
                                    const std::vector<std::int64_t>& content_ids) {
  std::string key = "req:" + std::to_string(request_id) + ":content_available:";
  for (std::size_t i = 0; i < content_ids.size(); ++i) {
    if (i) key += "-";
    key += std::to_string(content_ids[i]);
  }
  return key;
}

}  // namespace

Conductor::Conductor(Catalog& catalog, DdmClient& ddm, Notifier& notifier, AgentConfig config)
    : catalog_(catalog), ddm_(ddm), notifier_(notifier), config_(std::move(config)) {}

CycleOutcome Conductor::cycle(Timestamp now) {
  CycleOutcome outcome;
  std::vector<std::int64_t> ids = catalog_.claim_work(
      ItemKind::MessageBatch, {to_string(RequestStatus::InProgress)}, config_.batch_limit,
      config_.agent_id, config_.lease_seconds, now);
  outcome.claimed = static_cast<std::int64_t>(ids.size());

  for (std::int64_t request_id : ids) {
    Request request = catalog_.get_request(request_id);
    if (request.status != RequestStatus::InProgress) continue;
    std::vector<Collection> collections = catalog_.collections_of(request_id);
    Collection input_coll = find_collection(collections, CollectionRelation::Input);
    Collection output_coll = find_collection(collections, CollectionRelation::Output);

    send_pending(request, outcome, now);
    batch_available(request, output_coll.collection_id, outcome, now);

    Collection output_now = catalog_.get_collection(output_coll.collection_id);
    if (output_now.status == CollectionStatus::Closed) {
      Message closed;
      closed.request_id = request_id;
      closed.msg_type = MessageType::CollectionClosed;
      closed.dedup_key = "req:" + std::to_string(request_id) + ":collection_closed:" +
                         std::to_string(output_coll.collection_id);
      closed.status = MessageStatus::New;
      std::int64_t msg_id = catalog_.record_message(closed, now);
      Message stored = catalog_.get_message(msg_id);
      if (stored.status == MessageStatus::New) {
        send_and_mark(stored, outcome, now);
      }
    }

    apply_acks(request, outcome, now);
    release_inputs(request, input_coll.collection_id, output_coll.collection_id, outcome, now);
    maybe_finish(request, outcome, now);
  }
  return outcome;
}

void Conductor::send_and_mark(Message& message, CycleOutcome& outcome, Timestamp now) {
  std::vector<Content> contents;
  contents.reserve(message.content_ids.size());
  for (std::int64_t content_id : message.content_ids) {
    contents.push_back(catalog_.get_content(content_id));
  }
  notifier_.send(message, build_message_payload(message, contents));
  if (after_send_hook_) after_send_hook_(message);
  catalog_.mark_message(message.msg_id, MessageStatus::Sent, now);
  message.status = MessageStatus::Sent;
  outcome.progressed++;
}

void Conductor::send_pending(const Request& request, CycleOutcome& outcome, Timestamp now) {
  for (Message& message : catalog_.messages_of_request(request.request_id, MessageStatus::New)) {
    // At-least-once: a crash between send and the Sent write re-sends with
    // the same dedup_key and consumers drop the duplicate.
    send_and_mark(message, outcome, now);
  }
}

void Conductor::batch_available(const Request& request, std::int64_t output_collection_id,
                                CycleOutcome& outcome, Timestamp now) {
  ContentFilter filter;
  filter.collection_id = output_collection_id;
  filter.statuses = {{ContentStatus::Available}};
  std::vector<Content> available = catalog_.contents_filtered(filter);
  for (std::size_t start = 0; start < available.size();
       start += static_cast<std::size_t>(config_.batch_limit)) {
    std::size_t end = std::min(available.size(),
                               start + static_cast<std::size_t>(config_.batch_limit));
    Message message;
    message.request_id = request.request_id;
    message.msg_type = MessageType::ContentAvailable;
    for (std::size_t i = start; i < end; ++i) {
      message.content_ids.push_back(available[i].content_id);
    }
    std::sort(message.content_ids.begin(), message.content_ids.end());
    message.dedup_key = content_batch_dedup_key(request.request_id, message.content_ids);
    message.status = MessageStatus::New;
    auto [msg_id, inserted] = catalog_.record_message_binding_contents(message, now);
    if (inserted) outcome.progressed += 1 + static_cast<std::int64_t>(message.content_ids.size());
    if (message.status == MessageStatus::New) {
      send_and_mark(message, outcome, now);
    }
  }
}

void Conductor::apply_acks(const Request& request, CycleOutcome& outcome, Timestamp now) {
  for (std::int64_t msg_id : notifier_.poll_acks()) {
    Message message = catalog_.get_message(msg_id);
    if (message.request_id != request.request_id ||
        message.msg_type != MessageType::ContentAvailable) {
      continue;
    }
    for (std::int64_t content_id : message.content_ids) {
      Content content = catalog_.get_content(content_id);
      if (content.status != ContentStatus::Delivering) continue;
      catalog_.update_with_version(ItemKind::Content, content_id, content.version,
                                   {{"status", to_string(ContentStatus::Delivered)}}, now);
      outcome.progressed++;
    }
  }
}

void Conductor::release_inputs(const Request& request, std::int64_t input_collection_id,
                               std::int64_t output_collection_id, CycleOutcome& outcome,
                               Timestamp now) {
  std::map<std::int64_t, std::pair<std::int64_t, std::int64_t>> per_parent;  // total, delivered
  for (const Content& output : catalog_.contents_of_collection(output_collection_id)) {
    if (!output.parent_content_id) continue;
    auto& [total, delivered] = per_parent[*output.parent_content_id];
    total++;
    if (output.status == ContentStatus::Delivered) delivered++;
  }

  for (const Content& input : catalog_.contents_of_collection(input_collection_id)) {
    auto it = per_parent.find(input.content_id);
    if (it == per_parent.end()) continue;
    auto [total, delivered] = it->second;
    if (total == 0 || delivered != total) continue;

    // Every output derived from this input is delivered: walk the input to
    // Released. Delivery milestones are applied by proxy through the
    // outputs; the chain keeps each step on the declared graph and is
    // resumable after a crash at any point.
    Content current = catalog_.get_content(input.content_id);
    bool released_now = false;
    while (current.status == ContentStatus::Available ||
           current.status == ContentStatus::Delivering ||
           current.status == ContentStatus::Delivered) {
      ContentStatus next;
      switch (current.status) {
        case ContentStatus::Available: next = ContentStatus::Delivering; break;
        case ContentStatus::Delivering: next = ContentStatus::Delivered; break;
        default: next = ContentStatus::Released; break;
      }
      if (next == ContentStatus::Released) {
        Replica replica;
        replica.scope = current.scope;
        replica.name = current.name;
        try {
          ddm_.release(replica);
        } catch (const Error& e) {
          // Already off disk (a crash between release and the status write,
          // or a re-run) is success; anything else retries next cycle.
          if (e.code() != ErrorCode::IllegalState) throw;
        }
        released_now = true;
      }
      catalog_.update_with_version(ItemKind::Content, current.content_id, current.version,
                                   {{"status", to_string(next)}}, now);
      outcome.progressed++;
      current = catalog_.get_content(current.content_id);
    }
    if (released_now) outcome.released_bytes += current.size_bytes;
  }
}

void Conductor::maybe_finish(const Request& request, CycleOutcome& outcome, Timestamp now) {
  std::vector<Collection> collections = catalog_.collections_of(request.request_id);
  bool outputs_closed = true;
  std::vector<ContentStatus> output_statuses;
  for (const Collection& c : collections) {
    if (c.relation != CollectionRelation::Output) continue;
    if (c.status != CollectionStatus::Closed) outputs_closed = false;
    for (const Content& content : catalog_.contents_of_collection(c.collection_id)) {
      output_statuses.push_back(content.status);
    }
  }
  std::optional<RequestEvent> event = derive_request_event(output_statuses, outputs_closed);
  if (!event) return;

  Message finished;
  finished.request_id = request.request_id;
  finished.msg_type = MessageType::RequestFinished;
  finished.dedup_key = "req:" + std::to_string(request.request_id) + ":request_finished";
  finished.status = MessageStatus::New;
  std::int64_t msg_id = catalog_.record_message(finished, now);
  Message stored = catalog_.get_message(msg_id);
  if (stored.status == MessageStatus::New) {
    send_and_mark(stored, outcome, now);
  }

  // The status flip comes last so a crash anywhere above leaves the request
  // claimable and every step idempotent to finish.
  Request current = catalog_.get_request(request.request_id);
  if (current.status == RequestStatus::InProgress) {
    catalog_.update_with_version(ItemKind::Request, current.request_id, current.version,
                                 {{"status", to_string(next_request_status(current.status, *event))}},
                                 now);
    outcome.progressed++;
  }
}

}  // namespace granule
