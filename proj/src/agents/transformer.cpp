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

/// Bookkeeping output recording that an input's data will never be
/// delivered; keeps request-level derivation complete even for inputs that
/// failed before producing anything.
Content failed_mirror_of(const Content& input) {
  Content out;
  out.scope = input.scope;
  out.name = input.name;
  out.min_id = input.min_id;
  out.max_id = input.max_id;
  out.size_bytes = input.size_bytes;
  out.checksum = input.checksum;
  out.locator = input.locator;
  out.parent_content_id = input.content_id;
  out.status = ContentStatus::Failed;
  return out;
}

}  // namespace

Transformer::Transformer(Catalog& catalog, const PluginRegistry& registry, AgentConfig config)
    : catalog_(catalog), registry_(registry), config_(std::move(config)) {}

CycleOutcome Transformer::cycle(Timestamp now) {
  CycleOutcome outcome;
  std::vector<std::int64_t> ids = catalog_.claim_work(
      ItemKind::Transform,
      {to_string(TransformStatus::New), to_string(TransformStatus::Running)},
      config_.batch_limit, config_.agent_id, config_.lease_seconds, now);
  outcome.claimed = static_cast<std::int64_t>(ids.size());

  for (std::int64_t transform_id : ids) {
    Transform transform = catalog_.get_transform(transform_id);
    Request request = catalog_.get_request(transform.request_id);
    if (is_terminal(request.status)) continue;
    std::vector<Collection> collections = catalog_.collections_of(request.request_id);
    Collection input_coll = find_collection(collections, CollectionRelation::Input);
    Collection output_coll = find_collection(collections, CollectionRelation::Output);

    if (output_coll.status == CollectionStatus::Closed) {
      if (transform.status == TransformStatus::Running) {
        catalog_.update_with_version(ItemKind::Transform, transform.transform_id,
                                     transform.version,
                                     {{"status", to_string(TransformStatus::Finished)}}, now);
        outcome.progressed++;
      }
      continue;
    }

    std::vector<Content> inputs = catalog_.contents_of_collection(input_coll.collection_id);
    std::set<std::int64_t> consumed = catalog_.consumed_parent_ids(output_coll.collection_id);

    nlohmann::json params;
    if (request.chunk_size > 0) params["chunk_size"] = request.chunk_size;

    std::vector<Content> drafts;  // born Available (real) or Failed (mirror)
    bool plugin_error = false;
    std::vector<std::size_t> erroring;

    std::shared_ptr<TransformPlugin> plugin;
    try {
      plugin = registry_.transform(transform.transform_tag);
    } catch (const Error&) {
      plugin = nullptr;  // treated as a permanent plugin failure below
    }

    for (std::size_t i = 0; i < inputs.size(); ++i) {
      const Content& input = inputs[i];
      if (consumed.count(input.content_id)) continue;
      if (input.status == ContentStatus::Failed) {
        drafts.push_back(failed_mirror_of(input));
        continue;
      }
      if (input.status != ContentStatus::Available) continue;
      if (!plugin) {
        plugin_error = true;
        erroring.push_back(i);
        continue;
      }
      try {
        std::vector<Content> outputs = plugin->transform(input, params);
        for (Content& out : outputs) {
          out.parent_content_id = input.content_id;
          out.status = ContentStatus::Available;
          drafts.push_back(std::move(out));
        }
      } catch (const Error&) {
        plugin_error = true;
        erroring.push_back(i);
      }
    }

    // retries counts failing rounds; once spent, the round's erroring inputs
    // are recorded as lost and the pipeline moves on.
    bool exhausted = transform.retries >= transform.max_retries;
    if (plugin_error && exhausted) {
      for (std::size_t i : erroring) drafts.push_back(failed_mirror_of(inputs[i]));
    }

    if (!drafts.empty()) {
      auto [inserted, duplicates] = catalog_.bulk_upsert_contents(output_coll.collection_id,
                                                                  drafts, now);
      outcome.progressed += inserted;
      for (const Content& draft : drafts) {
        if (draft.status == ContentStatus::Failed) outcome.failed++;
      }
    }

    transform = catalog_.get_transform(transform_id);
    if (plugin_error && !exhausted) {
      FieldChanges changes{{"retries", transform.retries + 1}};
      if (transform.status == TransformStatus::New) {
        changes["status"] = to_string(TransformStatus::Running);
      }
      catalog_.update_with_version(ItemKind::Transform, transform_id, transform.version, changes,
                                   now);
      outcome.progressed++;
      transform = catalog_.get_transform(transform_id);
    } else if (!drafts.empty() && transform.status == TransformStatus::New) {
      catalog_.update_with_version(ItemKind::Transform, transform_id, transform.version,
                                   {{"status", to_string(TransformStatus::Running)}}, now);
      outcome.progressed++;
      transform = catalog_.get_transform(transform_id);
    }

    if (plugin_error && exhausted && transform.status != TransformStatus::Failed) {
      FieldChanges changes{{"status", to_string(TransformStatus::Failed)},
                           {"retries", transform.max_retries}};
      catalog_.update_with_version(ItemKind::Transform, transform_id, transform.version, changes,
                                   now);
      outcome.progressed++;
      transform = catalog_.get_transform(transform_id);
    }

    // Close the output once the input list is final and every input is
    // accounted for, successfully or not.
    if (input_coll.status == CollectionStatus::Closed && !(plugin_error && !exhausted)) {
      std::set<std::int64_t> covered = catalog_.consumed_parent_ids(output_coll.collection_id);
      bool all_covered = !inputs.empty() &&
                         std::all_of(inputs.begin(), inputs.end(), [&](const Content& input) {
                           return covered.count(input.content_id) > 0;
                         });
      if (all_covered) {
        Collection fresh = catalog_.get_collection(output_coll.collection_id);
        if (fresh.status == CollectionStatus::Open) {
          catalog_.update_with_version(ItemKind::Collection, fresh.collection_id, fresh.version,
                                       {{"status", to_string(CollectionStatus::Closed)}}, now);
          outcome.progressed++;
        }
        if (transform.status == TransformStatus::Running) {
          catalog_.update_with_version(ItemKind::Transform, transform_id, transform.version,
                                       {{"status", to_string(TransformStatus::Finished)}}, now);
          outcome.progressed++;
        }
      }
    }
  }
  return outcome;
}

}  // namespace granule
