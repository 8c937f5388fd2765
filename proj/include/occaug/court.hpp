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

#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "occaug/image.hpp"
#include "occaug/mask.hpp"
#include "occaug/rng.hpp"

namespace occaug {

/// Classical court-detection parameters. Hue is on OpenCV's 0..179 scale;
/// saturation and value on 0..255.
struct DetectorConfig {
  int hue_tolerance = 12;
  int saturation_floor = 40;
  int value_floor = 40;
  int close_kernel = 9;
  double hough_threshold_fraction = 0.3;  // of the image diagonal, in votes
  double region_min_fraction = 0.20;
  /// A colour band is reliable when at least this fraction of the central
  /// third falls inside it.
  double reliable_fraction = 0.25;
};

struct ColorBand {
  int hue_center = 0;
  int hue_tolerance = 0;
  int saturation_min = 0;
  int value_min = 0;
  bool reliable = false;

  bool contains(int hue, int saturation, int value) const;
};

struct PixelPoint {
  int x = 0;
  int y = 0;
  friend bool operator==(const PixelPoint&, const PixelPoint&) = default;
};

struct PlayableRegion {
  std::vector<PixelPoint> polygon;  // convex, >= 3 vertices
  double confidence = 0.0;
  BinaryMask interior_mask;  // rasterisation of polygon
  int supporting_lines = 0;
};

enum class DetectionStage { Color, Contour, Area, Hough };

std::string_view to_string(DetectionStage stage);

struct DetectionFailure {
  DetectionStage stage = DetectionStage::Contour;
  std::string reason;
};

using DetectionResult = std::variant<PlayableRegion, DetectionFailure>;

struct PlacementBounds {
  int x_lo = 0;
  int x_hi = 0;
  int y_lo = 0;
  int y_hi = 0;
  friend bool operator==(const PlacementBounds&, const PlacementBounds&) = default;
};

enum class CourtSide { Left, Right, Unknown };

std::string_view to_string(CourtSide side);
std::optional<CourtSide> parse_court_side(std::string_view text);

struct Anchor {
  int x = 0;
  int y = 0;
  friend bool operator==(const Anchor&, const Anchor&) = default;
};

/// Modal hue of the saturated pixels in the central third of the image,
/// widened by config.hue_tolerance.
ColorBand dominant_court_color(const RgbImage& image, const DetectorConfig& config = {});

/// Colour threshold, morphological close, largest external contour, Hough
/// refinement of the hull edges. Deterministic.
DetectionResult detect_playable_region(const RgbImage& image, const DetectorConfig& config = {});

/// Default paste coordinates when detection fails:
///   Left:    w/5 <= x <= w
///   Right:   0 <= x <= w - w/5
///   Unknown: w/5 <= x <= w - w/5
///   all:     h/2 - h/5 <= y <= h/2 + h/5
/// Fractional endpoints are rounded toward the interval interior.
/// Throws InvalidDimensions for non-positive sizes.
PlacementBounds fallback_bounds(int width, int height, CourtSide side);

/// Left when the region centroid lies strictly left of width/2, else Right;
/// Unknown on failure. A metadata override wins when given.
CourtSide infer_court_side(const DetectionResult& detection, int image_width,
                           std::optional<CourtSide> override_side = std::nullopt);

using PlacementArea = std::variant<PlayableRegion, PlacementBounds>;

/// Draws paste anchors uniformly over a region's interior pixels or over the
/// integer lattice of a bounds rectangle. Throws EmptyRegion.
class AnchorSampler {
 public:
  explicit AnchorSampler(const PlacementArea& area);
  explicit AnchorSampler(const PlayableRegion& region);
  explicit AnchorSampler(const PlacementBounds& bounds);

  Anchor operator()(Rng& rng) const;

 private:
  std::vector<Anchor> pixels_;
  std::optional<PlacementBounds> bounds_;
};

Anchor sample_anchor(const PlayableRegion& region, Rng& rng);
Anchor sample_anchor(const PlacementBounds& bounds, Rng& rng);

/// Renders the region outline onto a copy of the image (debug overlays).
RgbImage draw_region_overlay(const RgbImage& image, const DetectionResult& detection);

}  // namespace occaug
