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

#include <functional>
#include <map>
#include <memory>
#include <string>
#include <vector>

#include "granule/plugins/ddm.hpp"
#include "granule/plugins/notifier.hpp"
#include "granule/plugins/transform.hpp"

namespace granule {

// Fixed keys of the built-in plugins.
inline constexpr char kDdmSimTapeKey[] = "ddm.sim_tape";
inline constexpr char kTransformPassthroughKey[] = "transform.passthrough";
inline constexpr char kTransformEventSplitterKey[] = "transform.event_splitter";
inline constexpr char kNotifyFileQueueKey[] = "notify.file_queue";

/// Static plugin registry keyed by "<kind>.<name>" strings. Factories may
/// return a shared instance (the tape simulator does) or a fresh one.
/// Unknown keys fail loudly here so requests are rejected at validation
/// time, never mid-pipeline.
class PluginRegistry {
 public:
  using DdmFactory = std::function<std::shared_ptr<DdmClient>()>;
  using TransformFactory = std::function<std::shared_ptr<TransformPlugin>()>;
  using NotifierFactory = std::function<std::shared_ptr<Notifier>()>;

  void register_ddm(const std::string& key, DdmFactory factory);
  void register_transform(const std::string& key, TransformFactory factory);
  void register_notifier(const std::string& key, NotifierFactory factory);

  std::shared_ptr<DdmClient> ddm(const std::string& key) const;
  std::shared_ptr<TransformPlugin> transform(const std::string& key) const;
  std::shared_ptr<Notifier> notifier(const std::string& key) const;

  bool has_transform(const std::string& key) const;
  std::vector<std::string> transform_keys() const;

 private:
  std::map<std::string, DdmFactory> ddms_;
  std::map<std::string, TransformFactory> transforms_;
  std::map<std::string, NotifierFactory> notifiers_;
};

/// Registers the passthrough and event-splitter transforms under their
/// fixed keys.
void register_builtin_transforms(PluginRegistry& registry);

}  // namespace granule
