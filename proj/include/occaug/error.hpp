// Copyright 2026 The occaug Authors
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
#include <string_view>

namespace occaug {

enum class ErrorKind {
  MissingFile,
  MalformedAnnotation,
  DanglingReference,
  IoFailure,
  CountSumMismatch,
  DegeneratePolygon,
  DimensionMismatch,
  InvalidDimensions,
  EmptyRegion,
  CorruptBank,
  EmptyBank,
  DegenerateResult,
  BadMagic,
  UnsupportedVersion,
  TruncatedFile,
  ShapeOverflow,
  MalformedCheckpoint,
  SchemaMismatch,
  EmptyInput,
  EmptyGroundTruth,
  InvalidConfig,
};

constexpr std::string_view to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::MissingFile: return "MissingFile";
    case ErrorKind::MalformedAnnotation: return "MalformedAnnotation";
    case ErrorKind::DanglingReference: return "DanglingReference";
    case ErrorKind::IoFailure: return "IoFailure";
    case ErrorKind::CountSumMismatch: return "CountSumMismatch";
    case ErrorKind::DegeneratePolygon: return "DegeneratePolygon";
    case ErrorKind::DimensionMismatch: return "DimensionMismatch";
    case ErrorKind::InvalidDimensions: return "InvalidDimensions";
    case ErrorKind::EmptyRegion: return "EmptyRegion";
    case ErrorKind::CorruptBank: return "CorruptBank";
    case ErrorKind::EmptyBank: return "EmptyBank";
    case ErrorKind::DegenerateResult: return "DegenerateResult";
    case ErrorKind::BadMagic: return "BadMagic";
    case ErrorKind::UnsupportedVersion: return "UnsupportedVersion";
    case ErrorKind::TruncatedFile: return "TruncatedFile";
    case ErrorKind::ShapeOverflow: return "ShapeOverflow";
    case ErrorKind::MalformedCheckpoint: return "MalformedCheckpoint";
    case ErrorKind::SchemaMismatch: return "SchemaMismatch";
    case ErrorKind::EmptyInput: return "EmptyInput";
    case ErrorKind::EmptyGroundTruth: return "EmptyGroundTruth";
    case ErrorKind::InvalidConfig: return "InvalidConfig";
  }
  return "Unknown";
}

/// Every fault raised by the toolkit carries one of the kinds above so that
/// callers (and the CLI's machine-readable error line) can dispatch on it.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message)
      : std::runtime_error(std::string(to_string(kind)) + ": " + message),
        kind_(kind),
        detail_(message) {}

  ErrorKind kind() const noexcept { return kind_; }
  const std::string& detail() const noexcept { return detail_; }

 private:
  ErrorKind kind_;
  std::string detail_;
};

}  // namespace occaug
