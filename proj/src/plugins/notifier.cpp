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

#include "granule/plugins/notifier.hpp"

#include "granule/catalog/catalog.hpp"
#include "granule/errors.hpp"

namespace granule {

nlohmann::ordered_json build_message_payload(const Message& message,
                                             const std::vector<Content>& contents) {
  nlohmann::ordered_json payload;
  payload["msg_id"] = message.msg_id;
  payload["dedup_key"] = message.dedup_key;
  payload["msg_type"] = to_string(message.msg_type);
  payload["request_id"] = message.request_id;
  payload["contents"] = nlohmann::ordered_json::array();
  for (const Content& c : contents) {
    nlohmann::ordered_json entry;
    entry["content_id"] = c.content_id;
    entry["scope"] = c.scope;
    entry["name"] = c.name;
    entry["min_id"] = c.min_id;
    entry["max_id"] = c.max_id;
    entry["size_bytes"] = c.size_bytes;
    entry["locator"] = c.locator;
    payload["contents"].push_back(std::move(entry));
  }
  return payload;
}

FileQueueNotifier::FileQueueNotifier(std::filesystem::path log_path, const Catalog& catalog)
    : log_path_(std::move(log_path)), catalog_(catalog) {}

void FileQueueNotifier::send(const Message&, const nlohmann::json& payload) {
  std::lock_guard lock(mu_);
  std::ofstream out(log_path_, std::ios::app);
  if (!out) {
    throw Error(ErrorCode::StorageError, "cannot open " + log_path_.string());
  }
  out << payload.dump() << "\n";
  out.flush();
  if (!out) {
    throw Error(ErrorCode::StorageError, "write to " + log_path_.string() + " failed");
  }
}

std::vector<std::int64_t> FileQueueNotifier::poll_acks() { return catalog_.acked_message_ids(); }

}  // namespace granule
