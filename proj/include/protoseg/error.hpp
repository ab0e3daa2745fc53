// Copyright 2026 The protoseg Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <stdexcept>
#include <string>
#include <utility>

namespace protoseg {

/// Base of every error raised by the library. Each subclass corresponds to one
/// failure category so callers (and the CLI) can report or map them precisely.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// tensorio
class FormatError : public Error { using Error::Error; };
class TruncationError : public Error { using Error::Error; };
class DataError : public Error { using Error::Error; };
class ManifestError : public Error { using Error::Error; };
class IoError : public Error { using Error::Error; };

class ArgumentError : public Error { using Error::Error; };

// attribution / prototype
class DegenerateMapError : public Error { using Error::Error; };
class EmptyRegionError : public Error { using Error::Error; };

// index
class BuildError : public Error { using Error::Error; };
class StateError : public Error { using Error::Error; };
class LoadError : public Error { using Error::Error; };

// inference / evaluate
class PlanError : public Error { using Error::Error; };
class UndefinedMetricError : public Error { using Error::Error; };

/// Failure inside one named stage of the segmentation pipeline.
class StageError : public Error {
 public:
  StageError(std::string stage, const std::string& message)
      : Error(stage + ": " + message), stage_(std::move(stage)) {}
  [[nodiscard]] const std::string& stage() const { return stage_; }

 private:
  std::string stage_;
};

}  // namespace protoseg
