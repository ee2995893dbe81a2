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

#include <nlohmann/json.hpp>

#include "granule/agents/agents.hpp"
#include "granule/core/checksum.hpp"
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

}  // namespace

std::string to_string(AgentKind kind) {
  switch (kind) {
    case AgentKind::Transporter: return "transporter";
    case AgentKind::Transformer: return "transformer";
    case AgentKind::Conductor: return "conductor";
  }
  return "transporter";
}

Transporter::Transporter(Catalog& catalog, DdmClient& ddm, AgentConfig config)
    : catalog_(catalog), ddm_(ddm), config_(std::move(config)) {}

CycleOutcome Transporter::cycle(Timestamp now) {
  CycleOutcome outcome;
  std::vector<std::int64_t> ids = catalog_.claim_work(
      ItemKind::Request,
      {to_string(RequestStatus::New), to_string(RequestStatus::InProgress)},
      config_.batch_limit, config_.agent_id, config_.lease_seconds, now);
  outcome.claimed = static_cast<std::int64_t>(ids.size());
  for (std::int64_t id : ids) {
    Request request = catalog_.get_request(id);
    if (is_terminal(request.status)) continue;
    if (request.status == RequestStatus::New) {
      populate_new_request(request, outcome, now);
    } else {
      poll_staging(request, outcome, now);
    }
  }
  return outcome;
}

void Transporter::populate_new_request(const Request& request, CycleOutcome& outcome,
                                       Timestamp now) {
  std::vector<Replica> replicas;
  try {
    replicas = ddm_.list_files(request.scope, request.name);
  } catch (const Error& e) {
    if (e.code() != ErrorCode::UnknownDataset) throw;
    // No file list will ever exist, so there is nothing to fail content by
    // content; cancel the request and record why.
    nlohmann::json metadata(request.metadata);
    metadata["error"] = "unknown_dataset";
    catalog_.update_with_version(ItemKind::Request, request.request_id, request.version,
                                 {{"status", to_string(RequestStatus::Cancelled)},
                                  {"metadata", metadata.dump()}},
                                 now);
    outcome.progressed++;
    return;
  }

  Collection input = find_collection(catalog_.collections_of(request.request_id),
                                     CollectionRelation::Input);
  std::vector<Content> contents;
  contents.reserve(replicas.size());
  for (const Replica& replica : replicas) {
    Content c;
    c.scope = replica.scope;
    c.name = replica.name;
    c.min_id = 0;
    c.max_id = replica.event_count ? *replica.event_count - 1 : 0;
    c.status = ContentStatus::New;
    c.size_bytes = replica.size_bytes;
    // Synthetic catalog checksum; the simulated backend has no bytes to sum.
    c.checksum = adler32_hex(replica.locator);
    c.locator = replica.locator;
    contents.push_back(std::move(c));
  }
  catalog_.bulk_upsert_contents(input.collection_id, contents, now);

  for (std::size_t i = 0; i < contents.size(); ++i) {
    const Content& content = contents[i];
    Content stored = catalog_.get_content(content.content_id);
    if (stored.status != ContentStatus::New) continue;  // already advanced earlier
    advance_new_content(stored, replicas[i], outcome, now);
  }

  // The simulated DDM returns the complete list in one shot, so the total is
  // final and the collection can close now.
  Collection refreshed = catalog_.get_collection(input.collection_id);
  if (refreshed.status == CollectionStatus::Open) {
    catalog_.update_with_version(ItemKind::Collection, refreshed.collection_id, refreshed.version,
                                 {{"status", to_string(CollectionStatus::Closed)}}, now);
    outcome.progressed++;
  }

  Request current = catalog_.get_request(request.request_id);
  if (current.status == RequestStatus::New) {
    catalog_.update_with_version(ItemKind::Request, current.request_id, current.version,
                                 {{"status", to_string(RequestStatus::InProgress)}}, now);
    outcome.progressed++;
  }
}

void Transporter::advance_new_content(const Content& content, const Replica& replica,
                                      CycleOutcome& outcome, Timestamp now) {
  try {
    if (replica.state == ReplicaState::OnDisk) {
      catalog_.update_with_version(ItemKind::Content, content.content_id, content.version,
                                   {{"status", to_string(ContentStatus::Available)}}, now);
      outcome.progressed++;
      return;
    }
    if (replica.state == ReplicaState::TapeOnly) {
      try {
        ddm_.stage_in(replica);
      } catch (const Error& e) {
        // Already requested (a crash between stage_in and the status write
        // leaves the replica staging) is fine; anything else counts as a
        // delivery attempt.
        if (e.code() != ErrorCode::IllegalState) throw;
      }
    }
    catalog_.update_with_version(ItemKind::Content, content.content_id, content.version,
                                 {{"status", to_string(ContentStatus::Staging)}}, now);
    outcome.progressed++;
  } catch (const Error& e) {
    if (e.code() == ErrorCode::VersionConflict) return;  // another instance advanced it
    std::int64_t attempts = catalog_.increment_content_attempts(content.content_id);
    if (attempts >= kMaxAttempts) {
      Content fresh = catalog_.get_content(content.content_id);
      if (fresh.status == ContentStatus::New || fresh.status == ContentStatus::Staging) {
        catalog_.update_with_version(ItemKind::Content, fresh.content_id, fresh.version,
                                     {{"status", to_string(ContentStatus::Failed)}}, now);
        outcome.failed++;
      }
    }
  }
}

void Transporter::poll_staging(const Request& request, CycleOutcome& outcome, Timestamp now) {
  Collection input = find_collection(catalog_.collections_of(request.request_id),
                                     CollectionRelation::Input);

  // Recovery: contents left in New (a crash before their stage-in status
  // write) take the populate step again.
  ContentFilter new_filter;
  new_filter.collection_id = input.collection_id;
  new_filter.statuses = {{ContentStatus::New}};
  for (const Content& content : catalog_.query_contents(new_filter).items) {
    Replica probe;
    probe.scope = content.scope;
    probe.name = content.name;
    try {
      Replica replica = ddm_.poll_state(probe);
      advance_new_content(content, replica, outcome, now);
    } catch (const Error&) {
      std::int64_t attempts = catalog_.increment_content_attempts(content.content_id);
      if (attempts >= kMaxAttempts) {
        catalog_.update_with_version(ItemKind::Content, content.content_id, content.version,
                                     {{"status", to_string(ContentStatus::Failed)}}, now);
        outcome.failed++;
      }
    }
  }

  ContentFilter staging_filter;
  staging_filter.collection_id = input.collection_id;
  staging_filter.statuses = {{ContentStatus::Staging}};
  for (const Content& content : catalog_.query_contents(staging_filter).items) {
    Replica probe;
    probe.scope = content.scope;
    probe.name = content.name;
    try {
      Replica replica = ddm_.poll_state(probe);
      if (replica.state == ReplicaState::OnDisk) {
        catalog_.update_with_version(ItemKind::Content, content.content_id, content.version,
                                     {{"status", to_string(ContentStatus::Available)}}, now);
        outcome.progressed++;
      }
    } catch (const Error& e) {
      if (e.code() == ErrorCode::VersionConflict) continue;
      std::int64_t attempts = catalog_.increment_content_attempts(content.content_id);
      if (attempts >= kMaxAttempts) {
        Content fresh = catalog_.get_content(content.content_id);
        if (fresh.status == ContentStatus::Staging) {
          catalog_.update_with_version(ItemKind::Content, fresh.content_id, fresh.version,
                                       {{"status", to_string(ContentStatus::Failed)}}, now);
          outcome.failed++;
        }
      }
    }
  }
}

}  // namespace granule
