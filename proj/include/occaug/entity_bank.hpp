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
#include <functional>
#include <vector>

#include "occaug/dataset.hpp"
#include "occaug/image.hpp"
#include "occaug/mask.hpp"
#include "occaug/rng.hpp"

namespace occaug {

/// A ground-truth instance cut out for pasting. The crop keeps the
/// background pixels of its bounding box; the mask selects the instance.
struct EntityRecord {
  std::int64_t source_image_id = 0;
  std::int64_t source_annotation_id = 0;
  std::int64_t category_id = 0;
  RgbImage crop;
  BinaryMask mask;
  int crop_origin_x = 0;
  int crop_origin_y = 0;

  int width() const { return mask.width(); }
  int height() const { return mask.height(); }
};

bool operator==(const EntityRecord& a, const EntityRecord& b);

struct EntityBank {
  std::vector<EntityRecord> entries;

  bool empty() const { return entries.empty(); }
  std::size_t size() const { return entries.size(); }
};

bool operator==(const EntityBank& a, const EntityBank& b);

struct ExtractionReport {
  EntityBank bank;
  std::vector<std::int64_t> skipped_empty;  // annotation ids with an empty mask
  std::size_t skipped_crowd = 0;
};

using ImageProvider = std::function<RgbImage(const ImageRecord&)>;

/// One entry per non-crowd annotation with a nonempty mask, in annotation
/// order.
ExtractionReport extract_entities(const DatasetBundle& bundle, const ImageProvider& images);
ExtractionReport extract_entities(const DatasetBundle& bundle,
                                  const std::filesystem::path& image_root);

/// Layout: manifest.json, crops/<index>.png, masks/<index>.png (1-bit).
void save_bank(const EntityBank& bank, const std::filesystem::path& root);

/// Throws MissingFile when the manifest is absent and CorruptBank when the
/// manifest and the crop/mask files disagree.
EntityBank load_bank(const std::filesystem::path& root);

/// Uniform with replacement. Throws EmptyBank when count > 0 and the bank is
/// empty.
std::vector<std::size_t> sample_entity_indices(const EntityBank& bank, std::size_t count, Rng& rng);
std::vector<EntityRecord> sample_entities(const EntityBank& bank, std::size_t count, Rng& rng);

}  // namespace occaug
