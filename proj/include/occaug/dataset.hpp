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
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include <json.hpp>

#include "occaug/image.hpp"
#include "occaug/mask.hpp"

namespace occaug {

struct ImageRecord {
  std::int64_t id = 0;
  std::string file_name;
  int width = 0;
  int height = 0;
  friend bool operator==(const ImageRecord&, const ImageRecord&) = default;
};

struct Category {
  std::int64_t id = 0;
  std::string name;
  friend bool operator==(const Category&, const Category&) = default;
};

struct BBox {
  double x = 0.0;
  double y = 0.0;
  double w = 0.0;
  double h = 0.0;
  friend bool operator==(const BBox&, const BBox&) = default;
};

using Segmentation = std::variant<PolygonSet, RleMask>;

struct InstanceAnnotation {
  std::int64_t id = 0;
  std::int64_t image_id = 0;
  std::int64_t category_id = 0;
  Segmentation segmentation;
  BBox bbox;
  double area = 0.0;
  bool iscrowd = false;
  /// Prediction confidence; only present in prediction files.
  std::optional<double> score;
  friend bool operator==(const InstanceAnnotation&, const InstanceAnnotation&) = default;
};

struct DatasetBundle {
  std::vector<ImageRecord> images;
  std::vector<InstanceAnnotation> annotations;
  std::vector<Category> categories;
  friend bool operator==(const DatasetBundle&, const DatasetBundle&) = default;

  const ImageRecord* find_image(std::int64_t id) const;
  std::vector<const InstanceAnnotation*> annotations_for(std::int64_t image_id) const;
};

BinaryMask decode_segmentation(const Segmentation& segmentation, int height, int width);
BinaryMask decode_mask(const InstanceAnnotation& annotation, const ImageRecord& image);

/// Sets area to the decoded foreground count and bbox to its tight box.
void refresh_derived_fields(InstanceAnnotation& annotation, const BinaryMask& mask);

/// Throws DanglingReference or MalformedAnnotation on the first violated
/// invariant; when decode_masks is set, every segmentation is decoded too.
void validate(const DatasetBundle& bundle, bool decode_masks = true);

/// Sorted by id, with area and bbox recomputed from the masks.
DatasetBundle canonicalize(DatasetBundle bundle);

/// Parses COCO instance JSON. Derived fields (area, bbox) are recomputed
/// from the segmentation; structural problems raise MalformedAnnotation and
/// broken references raise DanglingReference.
DatasetBundle parse_dataset(const nlohmann::json& doc);

/// Parses a COCO results list ([{image_id, category_id, segmentation,
/// score}, ...]) against the image inventory of a reference bundle.
DatasetBundle parse_results(const nlohmann::json& doc, const DatasetBundle& reference);

nlohmann::json dataset_to_json(const DatasetBundle& bundle);

/// Reads and validates an annotation file without touching image files.
DatasetBundle read_annotations(const std::filesystem::path& annotation_path);

/// read_annotations plus a check that every image file exists under
/// image_root. Throws MissingFile.
DatasetBundle load_dataset(const std::filesystem::path& annotation_path,
                           const std::filesystem::path& image_root);

/// Writes the canonical form of the bundle and makes sure image_root exists.
/// Throws IoFailure.
void save_dataset(const DatasetBundle& bundle, const std::filesystem::path& annotation_path,
                  const std::filesystem::path& image_root = {});

RgbImage load_image_for(const ImageRecord& record, const std::filesystem::path& image_root);

}  // namespace occaug
