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

#include "granule/plugins/transform.hpp"

#include <cmath>

#include <nlohmann/json.hpp>

#include "granule/core/state_machine.hpp"
#include "granule/errors.hpp"

namespace granule {

std::vector<Content> PassthroughTransform::transform(const Content& input,
                                                     const nlohmann::json&) const {
  Content out;
  out.scope = input.scope;
  out.name = input.name;
  out.min_id = input.min_id;
  out.max_id = input.max_id;
  out.size_bytes = input.size_bytes;
  out.checksum = input.checksum;
  out.locator = input.locator;
  return {out};
}

std::vector<Content> EventSplitterTransform::transform(const Content& input,
                                                       const nlohmann::json& params) const {
  // File contents carry min_id=0, max_id=event_count-1; 0/0 means unknown.
  if (input.min_id != 0 || input.max_id == 0) {
    throw Error(ErrorCode::MissingEventCount, "input '" + input.name + "' has no event count");
  }
  if (!params.contains("chunk_size")) {
    throw Error(ErrorCode::InvalidArgument, "event splitter needs params.chunk_size");
  }
  std::int64_t chunk_size = params["chunk_size"].get<std::int64_t>();
  std::int64_t event_count = input.max_id + 1;
  std::vector<Content> outputs;
  for (const EventRange& range : split_event_ranges(event_count, chunk_size)) {
    std::string suffix =
        "#" + std::to_string(range.min_id) + "-" + std::to_string(range.max_id);
    Content out;
    out.scope = input.scope;
    out.name = input.name + suffix;
    out.min_id = range.min_id;
    out.max_id = range.max_id;
    std::int64_t length = range.max_id - range.min_id + 1;
    out.size_bytes = static_cast<std::int64_t>(std::llround(
        static_cast<double>(input.size_bytes) * static_cast<double>(length) /
        static_cast<double>(event_count)));
    out.checksum = "";  // synthesized ranges carry no checksum
    out.locator = input.locator + suffix;
    outputs.push_back(std::move(out));
  }
  return outputs;
}

}  // namespace granule
