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

#include <stdexcept>
#include <string>

namespace granule {

enum class ErrorCode {
  IllegalTransition,
  InvalidArgument,
  NotFound,
  VersionConflict,
  CollectionClosed,
  StorageError,
  UnknownDataset,
  IllegalState,
  MissingEventCount,
  NonMonotonicTime,
  InvalidFilter,
  PluginNotFound,
  ScenarioFailed,
  MismatchedScenarios,
  Internal,
};

const char* error_code_name(ErrorCode code);

/// The one exception type thrown across module boundaries. `code()` is the
/// machine-readable classification; `what()` carries the human detail.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& detail)
      : std::runtime_error(std::string(error_code_name(code)) + ": " + detail),
        code_(code),
        detail_(detail) {}

  ErrorCode code() const noexcept { return code_; }
  const std::string& detail() const noexcept { return detail_; }

 private:
  ErrorCode code_;
  std::string detail_;
};

}  // namespace granule
