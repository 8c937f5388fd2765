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

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <variant>
#include <vector>

namespace occaug {

enum class DType : std::uint8_t { Float32 = 0, Float64 = 1 };

const char* to_string(DType dtype) noexcept;

struct Tensor {
  std::vector<std::uint64_t> shape;
  std::variant<std::vector<float>, std::vector<double>> data;

  DType dtype() const noexcept;
  std::size_t element_count() const noexcept;
  /// Bitwise equality of shape, dtype and payload.
  friend bool operator==(const Tensor& a, const Tensor& b);
};

/// Named tensors; std::map keeps the on-disk ascending name order.
using Checkpoint = std::map<std::string, Tensor>;

/// NTCK, little-endian: "NTCK", u32 version (1), u32 count, then per tensor
/// u16 name length, name bytes, u8 dtype, u8 rank, rank x u64 dims, payload.
std::vector<std::uint8_t> encode_checkpoint(const Checkpoint& checkpoint);

/// Throws BadMagic, UnsupportedVersion, TruncatedFile (short or trailing
/// bytes), ShapeOverflow, MalformedCheckpoint (bad dtype, zero dims, names
/// out of order).
Checkpoint decode_checkpoint(std::span<const std::uint8_t> bytes);

void write_checkpoint(const Checkpoint& checkpoint, const std::filesystem::path& path);
Checkpoint read_checkpoint(const std::filesystem::path& path);

/// Element-wise (optionally weighted) mean accumulated in float64 and cast
/// back to each entry's dtype. Throws EmptyInput, SchemaMismatch naming the
/// first offending entry, InvalidConfig for unusable weights.
Checkpoint average_checkpoints(const std::vector<Checkpoint>& checkpoints,
                               const std::optional<std::vector<double>>& weights = std::nullopt);

Checkpoint average_checkpoint_files(const std::vector<std::filesystem::path>& paths,
                                    const std::optional<std::vector<double>>& weights = std::nullopt);

}  // namespace occaug
