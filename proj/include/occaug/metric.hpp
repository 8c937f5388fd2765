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
#include <vector>

#include <json.hpp>

#include "occaug/dataset.hpp"
#include "occaug/mask.hpp"

namespace occaug {

enum class DprAggregation { Micro, Macro };

struct MetricOptions {
  Connectivity connectivity = Connectivity::Four;
  double iou_threshold = 0.5;
  DprAggregation dpr_aggregation = DprAggregation::Micro;
  /// Count unmatched split instances as zero recall in DPR.
  bool unmatched_in_dpr = false;
  /// Average OIR and DPR over images that contain split instances.
  bool per_image = false;
};

/// A ground-truth instance whose mask has two or more connected components.
struct SplitInstance {
  std::int64_t annotation_id = 0;
  std::int64_t image_id = 0;
  BinaryMask mask;
  ComponentSet components;
  /// Largest component; ties go to the lowest label.
  std::int32_t main_component_label = 0;
  BinaryMask disconnected_pixels;
  std::int64_t disconnected_count = 0;
};

/// nullopt when the mask has fewer than two components.
std::optional<SplitInstance> analyze_instance(std::int64_t annotation_id, std::int64_t image_id,
                                              const BinaryMask& mask, Connectivity connectivity);

std::vector<SplitInstance> find_split_instances(const DatasetBundle& gt,
                                                Connectivity connectivity);

struct PredictionMask {
  std::int64_t id = 0;
  std::int64_t image_id = 0;
  BinaryMask mask;
};

struct MatchPair {
  std::size_t split_index = 0;
  std::size_t prediction_index = 0;
  std::int64_t intersection = 0;
  std::int64_t union_ = 0;
  friend bool operator==(const MatchPair&, const MatchPair&) = default;
};

/// Greedy one-to-one matching of split instances to predictions of the same
/// image: candidate pairs with IoU >= threshold, taken by IoU descending, ties
/// by lower ground-truth id then lower prediction id. Category is ignored.
/// Throws DimensionMismatch.
std::vector<MatchPair> match_predictions(const std::vector<SplitInstance>& split,
                                         const std::vector<PredictionMask>& predictions,
                                         double iou_threshold);

struct InstanceResult {
  std::int64_t annotation_id = 0;
  std::int64_t image_id = 0;
  std::optional<std::int64_t> matched_prediction_id;
  std::int64_t disconnected_total = 0;
  std::int64_t disconnected_recalled = 0;
};

struct OMReport {
  double oir = 1.0;
  double dpr = 1.0;
  double om = 1.0;
  std::int64_t split_instance_count = 0;
  std::int64_t recalled_count = 0;
  std::vector<InstanceResult> per_instance;
  MetricOptions options;
};

/// Throws EmptyGroundTruth when gt has no images, DimensionMismatch when a
/// prediction does not fit its image.
OMReport evaluate_om(const DatasetBundle& gt, const DatasetBundle& predictions,
                     const MetricOptions& options = {});

/// Predictions may be a full dataset document or a bare results list.
OMReport evaluate_om_files(const std::filesystem::path& gt_path,
                           const std::filesystem::path& prediction_path,
                           const MetricOptions& options = {});

nlohmann::json to_json(const OMReport& report);

/// Shortest round-trip decimal; integral values keep a trailing ".0".
std::string format_ratio(double value);

/// "OIR=<v> DPR=<v> OM=<v>"
std::string summary_line(const OMReport& report);

}  // namespace occaug
