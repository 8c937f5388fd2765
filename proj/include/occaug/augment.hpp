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
#include <string>
#include <vector>

#include <json.hpp>

#include "occaug/court.hpp"
#include "occaug/dataset.hpp"
#include "occaug/entity_bank.hpp"
#include "occaug/image.hpp"
#include "occaug/rng.hpp"

namespace occaug {

struct Size2 {
  int width = 0;
  int height = 0;
  friend bool operator==(const Size2&, const Size2&) = default;
};

/// Half-widths of symmetric photometric jitter. Brightness and contrast are
/// fractions of full scale, saturation a relative gain, hue in units of the
/// 0..179 hue circle.
struct PhotometricRanges {
  double brightness = 0.2;
  double contrast = 0.2;
  double saturation = 0.2;
  double hue = 10.0;
};

struct JitterConfig {
  double scale_min = 0.8;
  double scale_max = 1.2;
  double rotation_min = -15.0;  // degrees
  double rotation_max = 15.0;
  double hflip_probability = 0.5;
  PhotometricRanges photometric;
};

/// Resize targets used after copy-paste (width, height).
std::vector<Size2> default_resize_scales();

struct AugmentationConfig {
  double paste_probability = 0.80;
  double occluder_probability = 0.70;
  int max_entities = 40;
  double min_visible_fraction = 0.10;
  JitterConfig jitter;
  PhotometricRanges global_photometric;
  double global_hflip_probability = 0.5;
  std::vector<Size2> resize_scales = default_resize_scales();
  Size2 output_size{1760, 1280};
  std::uint64_t seed = 0;

  /// Throws InvalidConfig naming the offending field.
  void validate() const;
};

/// Parameters actually drawn for one entity.
struct JitterParams {
  bool hflip = false;
  double scale = 1.0;
  double rotation_deg = 0.0;
  double brightness = 0.0;
  double contrast = 0.0;
  double saturation = 0.0;
  double hue = 0.0;
  friend bool operator==(const JitterParams&, const JitterParams&) = default;
};

struct PhotometricParams {
  double brightness = 0.0;
  double contrast = 0.0;
  double saturation = 0.0;
  double hue = 0.0;
};

/// One pasted entity (primary or occluder).
struct PasteRecord {
  std::int64_t image_id = 0;
  std::size_t bank_index = 0;
  Anchor anchor;
  bool occluder = false;
  JitterParams jitter;
  /// Absent when the stamp fell entirely outside the image.
  std::optional<std::int64_t> annotation_id;
  std::vector<std::int64_t> dropped_annotation_ids;
};

struct AugmentedSample {
  std::int64_t image_id = 0;
  RgbImage image;
  std::vector<InstanceAnnotation> annotations;
  std::vector<PasteRecord> provenance;
  /// Annotations dropped by the crop in the base transform chain.
  std::vector<std::int64_t> crop_dropped_ids;
  bool paste_event = false;
  /// Placement used fallback bounds instead of a detected region.
  bool fallback = false;
  int primary_count = 0;
  int occluder_count = 0;
};

PhotometricParams draw_photometric(const PhotometricRanges& ranges, Rng& rng);

/// Per-pixel brightness, contrast, saturation and hue shifts; zero deltas
/// leave the pixels untouched.
void apply_photometric(RgbImage& image, const PhotometricParams& params);

JitterParams draw_jitter(const JitterConfig& config, Rng& rng);

/// Flip, scale, rotate about the crop centre (bilinear pixels, nearest mask),
/// then photometric jitter on the crop; the result is re-tightened to the
/// mask's bounding box. Throws DegenerateResult when the mask vanishes.
EntityRecord apply_jitter(const EntityRecord& entity, const JitterParams& params);

EntityRecord jitter_entity(const EntityRecord& entity, const JitterConfig& config, Rng& rng,
                           JitterParams* applied = nullptr);

/// Anchor for an occluder of the given size whose centre is `centre`.
Anchor occluder_anchor_for_centre(Anchor centre, Size2 occluder_size);

/// Occluder anchor with its centre uniform over the integer points of the
/// initial entity's top-left quadrant [x, x + w/2] x [y, y + h/2].
Anchor place_occluder(Anchor initial_anchor, Size2 initial_size, Size2 occluder_size, Rng& rng);

/// Location-aware copy-paste with occlusion simulation. Later pastes occlude
/// everything beneath them; annotations left with less than
/// min_visible_fraction of their pre-occlusion pixels are dropped. New
/// annotations get ids first_new_id, first_new_id + 1, ...
AugmentedSample copy_paste(const RgbImage& image, std::int64_t image_id,
                           const std::vector<InstanceAnnotation>& annotations,
                           const EntityBank& bank, const PlacementArea& area,
                           const AugmentationConfig& config, Rng& rng,
                           std::int64_t first_new_id);

/// Random resize into one of the scales (aspect preserved), optional flip,
/// global photometric jitter, random crop to at most output_size, black
/// padding on the bottom/right to exactly output_size. Annotations follow in
/// lockstep and are re-checked against min_visible_fraction after the crop.
AugmentedSample base_transform_chain(AugmentedSample sample, const AugmentationConfig& config,
                                     Rng& rng);

/// Court detection (or fallback bounds), copy-paste and the base chain for
/// one image, with the per-image generator derived from (config.seed,
/// image_id).
AugmentedSample augment_image(const RgbImage& image, const ImageRecord& record,
                              const std::vector<InstanceAnnotation>& annotations,
                              const EntityBank& bank, const AugmentationConfig& config,
                              const DetectorConfig& detector,
                              std::optional<CourtSide> side_override, std::int64_t first_new_id);

struct AugmentOptions {
  AugmentationConfig augmentation;
  DetectorConfig detector;
  std::map<std::int64_t, CourtSide> side_overrides;
  unsigned jobs = 1;
};

struct AugmentSummary {
  std::size_t images = 0;
  std::size_t paste_events = 0;
  std::size_t primaries = 0;
  std::size_t occluders = 0;
  std::size_t drops = 0;
  std::size_t skipped = 0;
  std::size_t fallbacks = 0;
};

struct AugmentResult {
  DatasetBundle bundle;
  AugmentSummary summary;
};

/// Batch driver. Writes out/images/<stem>.png, out/annotations.json and
/// out/provenance.jsonl. Per-image failures are logged and skipped.
AugmentResult augment_dataset(const DatasetBundle& bundle, const std::filesystem::path& image_root,
                              const EntityBank& bank, const AugmentOptions& options,
                              const std::filesystem::path& out);

nlohmann::json to_json(const PasteRecord& record);
nlohmann::json to_json(const JitterParams& params);

/// Reads a {"<image_id>": "left"|"right"} map. Throws InvalidConfig.
std::map<std::int64_t, CourtSide> load_side_map(const std::filesystem::path& path);

}  // namespace occaug
