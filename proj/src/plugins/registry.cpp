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

#include "granule/plugins/registry.hpp"

#include "granule/errors.hpp"

namespace granule {

namespace {

template <typename Map, typename Factory>
void register_key(Map& map, const std::string& key, Factory factory, const char* kind) {
  if (key.empty()) throw Error(ErrorCode::InvalidArgument, "empty plugin key");
  if (!map.emplace(key, std::move(factory)).second) {
    throw Error(ErrorCode::InvalidArgument,
                std::string(kind) + " plugin key '" + key + "' already registered");
  }
}

template <typename Map>
auto lookup(const Map& map, const std::string& key, const char* kind) {
  auto it = map.find(key);
  if (it == map.end()) {
    throw Error(ErrorCode::PluginNotFound, std::string(kind) + " plugin '" + key + "'");
  }
  return it->second();
}

}  // namespace

void PluginRegistry::register_ddm(const std::string& key, DdmFactory factory) {
  register_key(ddms_, key, std::move(factory), "ddm");
}

void PluginRegistry::register_transform(const std::string& key, TransformFactory factory) {
  register_key(transforms_, key, std::move(factory), "transform");
}

void PluginRegistry::register_notifier(const std::string& key, NotifierFactory factory) {
  register_key(notifiers_, key, std::move(factory), "notifier");
}

std::shared_ptr<DdmClient> PluginRegistry::ddm(const std::string& key) const {
  return lookup(ddms_, key, "ddm");
}

std::shared_ptr<TransformPlugin> PluginRegistry::transform(const std::string& key) const {
  return lookup(transforms_, key, "transform");
}

std::shared_ptr<Notifier> PluginRegistry::notifier(const std::string& key) const {
  return lookup(notifiers_, key, "notifier");
}

bool PluginRegistry::has_transform(const std::string& key) const {
  return transforms_.count(key) > 0;
}

std::vector<std::string> PluginRegistry::transform_keys() const {
  std::vector<std::string> keys;
  for (const auto& [key, factory] : transforms_) keys.push_back(key);
  return keys;
}

void register_builtin_transforms(PluginRegistry& registry) {
  registry.register_transform(kTransformPassthroughKey, [] {
    static auto instance = std::make_shared<PassthroughTransform>();
    return instance;
  });
  registry.register_transform(kTransformEventSplitterKey, [] {
    static auto instance = std::make_shared<EventSplitterTransform>();
    return instance;
  });
}

}  // namespace granule
