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

#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "granule/core/types.hpp"

namespace granule {

/// Turns one Available input content into one or more output content
/// descriptors (collection, parent and status are filled in by the caller).
/// Implementations must be pure per call: no cross-call mutable state.
class TransformPlugin {
 public:
  virtual ~TransformPlugin() = default;

  virtual std::vector<Content> transform(const Content& input,
                                         const nlohmann::json& params) const = 0;
};

/// Identity step used by stage-in requests: one output, same
/// name/size/checksum/range/locator.
class PassthroughTransform : public TransformPlugin {
 public:
  std::vector<Content> transform(const Content& input,
                                 const nlohmann::json& params) const override;
};

/// Splits a file content into event-range descriptors named
/// "<name>#<min>-<max>", sizes proportional to range length. Requires the
/// input's event count (max_id > 0); params carry {"chunk_size": n}.
class EventSplitterTransform : public TransformPlugin {
 public:
  std::vector<Content> transform(const Content& input,
                                 const nlohmann::json& params) const override;
};

}  // namespace granule
