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
#include <optional>
#include <span>
#include <string_view>
#include <vector>

namespace occaug {

struct Point {
  double x = 0.0;
  double y = 0.0;
  friend bool operator==(const Point&, const Point&) = default;
};

using Polygon = std::vector<Point>;
using PolygonSet = std::vector<Polygon>;

/// Integer pixel rectangle [x, x+width) x [y, y+height).
struct PixelBox {
  int x = 0;
  int y = 0;
  int width = 0;
  int height = 0;
  friend bool operator==(const PixelBox&, const PixelBox&) = default;
};

/// Row-major binary bitmap, one byte (0 or 1) per pixel.
class BinaryMask {
 public:
  BinaryMask() = default;
  BinaryMask(int height, int width);
  /// Throws InvalidDimensions unless bits.size() == height * width. Nonzero
  /// bytes are normalised to 1.
  BinaryMask(int height, int width, std::vector<std::uint8_t> bits);

  int height() const noexcept { return height_; }
  int width() const noexcept { return width_; }
  std::size_t size() const noexcept { return bits_.size(); }

  bool at(int row, int col) const { return bits_[index(row, col)] != 0; }
  void set(int row, int col, bool value = true) { bits_[index(row, col)] = value ? 1 : 0; }

  std::span<const std::uint8_t> bits() const noexcept { return bits_; }
  std::span<std::uint8_t> bits() noexcept { return bits_; }

  std::int64_t count() const noexcept;
  bool any() const noexcept;

  /// Tight bounding box of the foreground, or nullopt for an empty mask.
  std::optional<PixelBox> bounding_box() const;

  /// Copies out a sub-rectangle; the box must lie inside the mask.
  BinaryMask crop(const PixelBox& box) const;

  BinaryMask flipped_horizontally() const;

  friend bool operator==(const BinaryMask&, const BinaryMask&) = default;

 private:
  std::size_t index(int row, int col) const noexcept {
    return static_cast<std::size_t>(row) * static_cast<std::size_t>(width_) +
           static_cast<std::size_t>(col);
  }

  int height_ = 0;
  int width_ = 0;
  std::vector<std::uint8_t> bits_;
};

/// COCO run-length encoding: column-major runs, alternating background and
/// foreground, starting with a (possibly empty) background run.
struct RleMask {
  int height = 0;
  int width = 0;
  std::vector<std::uint32_t> counts;
  friend bool operator==(const RleMask&, const RleMask&) = default;
};

RleMask rle_encode(const BinaryMask& mask);

/// Same runs as rle_encode of an empty height x width canvas with `stamp`
/// pasted at (offset_x, offset_y), without building the canvas.
RleMask rle_encode_placed(const BinaryMask& stamp, int offset_x, int offset_y, int height,
                          int width);

/// Throws CountSumMismatch when the runs do not cover height * width exactly.
BinaryMask rle_decode(const RleMask& rle);

/// Decodes the packed-string form of COCO counts (read-only support).
RleMask rle_from_compressed(std::string_view counts, int height, int width);

/// Even-odd fill of each polygon, unioned over the set. Pixel (r, c) is
/// foreground iff its centre (c + 0.5, r + 0.5) lies inside. Vertices may lie
/// outside the raster. Throws DegeneratePolygon for fewer than 3 vertices.
BinaryMask rasterize_polygons(const PolygonSet& polygons, int height, int width);

enum class Connectivity { Four = 4, Eight = 8 };

struct ComponentSet {
  int height = 0;
  int width = 0;
  std::vector<std::int32_t> labels;  // row-major, 0 = background
  int count = 0;
  std::vector<std::int64_t> component_sizes;  // component_sizes[k - 1] is label k

  std::int32_t label(int row, int col) const {
    return labels[static_cast<std::size_t>(row) * static_cast<std::size_t>(width) +
                  static_cast<std::size_t>(col)];
  }
};

/// Labels are assigned in row-major first-encounter order.
ComponentSet connected_components(const BinaryMask& mask, Connectivity connectivity);

/// Pixels carrying the given label.
BinaryMask component_mask(const ComponentSet& components, std::int32_t label);

std::int64_t intersection_count(const BinaryMask& a, const BinaryMask& b);
std::int64_t union_count(const BinaryMask& a, const BinaryMask& b);

/// |a ∩ b| / |a ∪ b|, 0 for an empty union. Throws DimensionMismatch.
double iou(const BinaryMask& a, const BinaryMask& b);

BinaryMask subtract(const BinaryMask& base, const BinaryMask& overlay);
BinaryMask intersect(const BinaryMask& a, const BinaryMask& b);

/// Union of canvas with stamp translated by (offset_x, offset_y); stamp
/// pixels that land outside the canvas are dropped.
BinaryMask paste_mask(const BinaryMask& canvas, const BinaryMask& stamp, int offset_x,
                      int offset_y);

}  // namespace occaug
