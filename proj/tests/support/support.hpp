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
#include <string>
#include <vector>

#include "occaug/augment.hpp"
#include "occaug/dataset.hpp"
#include "occaug/image.hpp"
#include "occaug/mask.hpp"
#include "occaug/rng.hpp"
#include "occaug/swa.hpp"

namespace occaug::testing {

/// Fresh directory under the system temp dir, removed on destruction.
class TempDir {
 public:
  explicit TempDir(const std::string& tag = "occaug");
  ~TempDir();
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;
  const std::filesystem::path& path() const { return path_; }
  std::filesystem::path operator/(const std::string& leaf) const { return path_ / leaf; }

 private:
  std::filesystem::path path_;
};

BinaryMask random_mask(Rng& rng, int height, int width, double density);

/// Union of a few random axis-aligned rectangles.
BinaryMask random_blob_mask(Rng& rng, int height, int width, int max_blobs);

/// A mask with at least two 4-connected components.
BinaryMask random_split_mask(Rng& rng, int height, int width);

/// Byte-compare of two files' contents.
bool same_file_contents(const std::filesystem::path& a, const std::filesystem::path& b);

/// Relative paths of every regular file under root, sorted.
std::vector<std::string> list_tree(const std::filesystem::path& root);

// ---------------------------------------------------------------------------
// Oracles. Written independently of the library code they check.

namespace oracle {

/// Breadth-first labelling; labels assigned in row-major order of the first
/// pixel reached.
struct Labels {
  std::vector<int> label;  // row-major, 0 = background
  int count = 0;
  std::vector<long> sizes;  // sizes[k - 1] for label k
};
Labels flood_labels(const BinaryMask& mask, int connectivity);

/// Column-major run lengths built from an explicit pixel sequence.
std::vector<std::uint32_t> naive_rle(const BinaryMask& mask);

/// Ray-casting point-in-polygon at each pixel centre, union over polygons.
BinaryMask point_in_polygon_mask(const PolygonSet& polygons, int height, int width);

struct InstanceMask {
  std::int64_t id = 0;
  std::int64_t image_id = 0;
  BinaryMask mask;
};

struct OmOutcome {
  double oir = 1.0;
  double dpr = 1.0;
  double om = 1.0;
  long split = 0;
  long recalled = 0;
};

/// Exhaustive pairwise IoU plus repeated best-pair selection, pooled over
/// images, micro DPR over matched instances.
OmOutcome brute_force_om(const std::vector<InstanceMask>& gt,
                         const std::vector<InstanceMask>& predictions,
                         const std::vector<std::int64_t>& image_ids, int connectivity,
                         double iou_threshold);

}  // namespace oracle

// ---------------------------------------------------------------------------
// Random OM scenes.

struct Scene {
  DatasetBundle gt;
  DatasetBundle predictions;
  std::vector<oracle::InstanceMask> gt_masks;
  std::vector<oracle::InstanceMask> prediction_masks;
  std::vector<std::int64_t> image_ids;
};

/// 1-2 images up to max_side square-ish, up to max_instances ground-truth
/// instances per image, every ground-truth mask forced to be split.
Scene random_scene(Rng& rng, int max_side, int max_instances);

DatasetBundle bundle_from_masks(const std::vector<oracle::InstanceMask>& masks,
                                const std::vector<ImageRecord>& images);

// ---------------------------------------------------------------------------
// Synthetic basketball courts.

struct CourtRender {
  RgbImage image;
  Polygon court;          // ground-truth outline, image coordinates
  BinaryMask court_mask;  // point-in-polygon oracle rasterisation
  int court_hue = 0;      // 0..179
};

struct CourtRenderOptions {
  int width = 640;
  int height = 400;
  /// Fraction of the full-size court outline kept (scaled about its centre).
  double court_scale = 1.0;
  int players = 8;
};

CourtRender render_court(Rng& rng, const CourtRenderOptions& options = {});

/// Writes `count` rendered courts with player annotations to dir/images and
/// dir/annotations.json.
DatasetBundle write_synthetic_dataset(const std::filesystem::path& dir, Rng& rng, int count,
                                      int width, int height);

// ---------------------------------------------------------------------------

Checkpoint random_checkpoint(Rng& rng, int tensors);

/// A small bank of solid-colour entities with assorted mask shapes.
EntityBank make_test_bank(Rng& rng, int entries);

}  // namespace occaug::testing
