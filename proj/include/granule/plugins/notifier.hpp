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

#include <filesystem>
#include <fstream>
#include <mutex>
#include <vector>

#include <nlohmann/json.hpp>

#include "granule/core/types.hpp"

namespace granule {

class Catalog;

/// One-directional consumer notification channel. Sends are at-least-once;
/// consumers deduplicate on dedup_key. Acks travel back through the REST ack
/// endpoint and surface via poll_acks.
class Notifier {
 public:
  virtual ~Notifier() = default;

  virtual void send(const Message& message, const nlohmann::json& payload) = 0;
  virtual std::vector<std::int64_t> poll_acks() = 0;
};

/// The published notification line format: field order is fixed as
/// msg_id, dedup_key, msg_type, request_id, contents[].
nlohmann::ordered_json build_message_payload(const Message& message,
                                             const std::vector<Content>& contents);

/// Built-in notifier appending one JSON line per send to a messages.log
/// file; poll_acks reads Acked message ids from the catalog (written there
/// by the REST ack endpoint).
class FileQueueNotifier : public Notifier {
 public:
  FileQueueNotifier(std::filesystem::path log_path, const Catalog& catalog);

  void send(const Message& message, const nlohmann::json& payload) override;
  std::vector<std::int64_t> poll_acks() override;

  const std::filesystem::path& log_path() const { return log_path_; }

 private:
  std::filesystem::path log_path_;
  const Catalog& catalog_;
  std::mutex mu_;
};

}  // namespace granule
