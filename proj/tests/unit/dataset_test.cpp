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

#include <fstream>

#include <gtest/gtest.h>

#include "occaug/dataset.hpp"
#include "occaug/error.hpp"
#include "support.hpp"

namespace occaug {
namespace {

using nlohmann::json;

ErrorKind kind_of(const std::function<void()>& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.kind();
  }
  ADD_FAILURE() << "no error raised";
  return ErrorKind::InvalidConfig;
}

json small_doc() {
  return json::parse(R"({
    "images": [{"id": 1, "file_name": "a.png", "width": 8, "height": 6}],
    "categories": [{"id": 1, "name": "player"}],
    "annotations": [
      {"id": 5, "image_id": 1, "category_id": 1, "iscrowd": 0,
       "segmentation": [[1, 1, 5, 1, 5, 4, 1, 4]], "area": 999, "bbox": [0, 0, 1, 1]},
      {"id": 2, "image_id": 1, "category_id": 1,
       "segmentation": {"size": [6, 8], "counts": [7, 3, 38]}}
    ]})");
}

DatasetBundle random_bundle(Rng& rng) {
  DatasetBundle b;
  const auto n_cat = rng.uniform_int(1, 3);
  for (int c = 1; c <= n_cat; ++c) b.categories.push_back({c * 10, "cat" + std::to_string(c)});
  const auto n_img = rng.uniform_int(1, 4);
  std::int64_t next = 1;
  for (int i = 1; i <= n_img; ++i) {
    const int w = static_cast<int>(rng.uniform_int(1, 24));
    const int h = static_cast<int>(rng.uniform_int(1, 24));
    b.images.push_back({i * 3, "dir/img" + std::to_string(i) + ".png", w, h});
    const auto n_ann = rng.uniform_int(0, 4);
    for (int k = 0; k < n_ann; ++k) {
      InstanceAnnotation a;
      a.id = next++ * 7 % 101 + 1000 * i;
      a.image_id = i * 3;
      a.category_id = 10 * rng.uniform_int(1, n_cat);
      a.iscrowd = rng.bernoulli(0.2);
      if (rng.bernoulli(0.5)) {
        a.segmentation = rle_encode(testing::random_mask(rng, h, w, 0.4));
      } else {
        Polygon p;
        for (int v = 0; v < 4; ++v) p.push_back({rng.uniform_real(0, w), rng.uniform_real(0, h)});
        a.segmentation = PolygonSet{p};
      }
      if (rng.bernoulli(0.3)) a.score = rng.uniform_real(0, 1);
      b.annotations.push_back(a);
    }
  }
  // Shuffle annotation order so canonicalisation has work to do.
  for (std::size_t i = b.annotations.size(); i > 1; --i) {
    std::swap(b.annotations[i - 1], b.annotations[static_cast<std::size_t>(rng.uniform_int(0, static_cast<std::int64_t>(i) - 1))]);
  }
  return b;
}

TEST(Dataset, ParseRecomputesDerivedFields) {
  const DatasetBundle b = parse_dataset(small_doc());
  ASSERT_EQ(b.annotations.size(), 2u);
  const auto& poly = b.annotations[0];
  EXPECT_EQ(poly.area, 12.0);
  EXPECT_EQ(poly.bbox, (BBox{1, 1, 4, 3}));
  const auto& rle = b.annotations[1];
  EXPECT_EQ(rle.area, 3.0);
  EXPECT_EQ(rle.bbox, (BBox{1, 1, 1, 3}));
}

TEST(Dataset, EmptyAnnotationListIsFine) {
  json doc = small_doc();
  doc["annotations"] = json::array();
  EXPECT_TRUE(parse_dataset(doc).annotations.empty());
}

TEST(Dataset, DanglingImageReference) {
  json doc = small_doc();
  doc["annotations"][0]["image_id"] = 999;
  EXPECT_EQ(kind_of([&] { parse_dataset(doc); }), ErrorKind::DanglingReference);
}

TEST(Dataset, DanglingCategoryReference) {
  json doc = small_doc();
  doc["annotations"][1]["category_id"] = 4;
  EXPECT_EQ(kind_of([&] { parse_dataset(doc); }), ErrorKind::DanglingReference);
}

TEST(Dataset, DuplicateIdsAreMalformed) {
  json doc = small_doc();
  doc["annotations"][1]["id"] = 5;
  try {
    parse_dataset(doc);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::MalformedAnnotation);
    EXPECT_NE(e.detail().find('5'), std::string::npos);
  }
}

TEST(Dataset, StructuralProblemsAreMalformed) {
  json doc = small_doc();
  doc["annotations"][0].erase("segmentation");
  EXPECT_EQ(kind_of([&] { parse_dataset(doc); }), ErrorKind::MalformedAnnotation);
  doc = small_doc();
  doc["images"][0]["width"] = 0;
  EXPECT_EQ(kind_of([&] { parse_dataset(doc); }), ErrorKind::MalformedAnnotation);
}

TEST(Dataset, RleSizeMustMatchImage) {
  json doc = small_doc();
  doc["annotations"][1]["segmentation"]["size"] = {8, 6};
  EXPECT_EQ(kind_of([&] { parse_dataset(doc); }), ErrorKind::DimensionMismatch);
}

TEST(Dataset, CompressedRleCountsAreReadable) {
  json doc = small_doc();
  doc["annotations"][1]["segmentation"]["counts"] = "73V1";
  const DatasetBundle b = parse_dataset(doc);
  EXPECT_EQ(b.annotations[1].area, 3.0);
}

TEST(Dataset, MissingFiles) {
  testing::TempDir dir;
  EXPECT_EQ(kind_of([&] { read_annotations(dir / "nope.json"); }), ErrorKind::MissingFile);
  std::ofstream(dir / "ann.json") << small_doc().dump();
  EXPECT_EQ(kind_of([&] { load_dataset(dir / "ann.json", dir.path()); }), ErrorKind::MissingFile);
  std::ofstream(dir / "bad.json") << "{not json";
  EXPECT_EQ(kind_of([&] { read_annotations(dir / "bad.json"); }), ErrorKind::MalformedAnnotation);
}

TEST(Dataset, SaveIntoUnwritableLocation) {
  testing::TempDir dir;
  std::ofstream(dir / "blocker") << "x";
  const DatasetBundle b = parse_dataset(small_doc());
  EXPECT_EQ(kind_of([&] { save_dataset(b, dir / "blocker" / "ann.json", dir / "blocker"); }),
            ErrorKind::IoFailure);
}

TEST(Dataset, SavedAreasMatchMasks) {
  testing::TempDir dir;
  DatasetBundle b = parse_dataset(small_doc());
  b.annotations[0].area = 1.0;  // stale
  save_dataset(b, dir / "ann.json", dir / "images");
  std::ifstream in(dir / "ann.json");
  const json written = json::parse(in);
  for (const auto& a : written["annotations"]) {
    const InstanceAnnotation& ann = a["id"].get<int>() == 5 ? b.annotations[0] : b.annotations[1];
    EXPECT_EQ(a["area"].get<double>(), static_cast<double>(decode_mask(ann, b.images[0]).count()));
  }
}

TEST(Dataset, RandomRoundTrips) {
  Rng rng(2024);
  testing::TempDir dir;
  for (int i = 0; i < 100; ++i) {
    const DatasetBundle b = random_bundle(rng);
    const auto path = dir / ("ann" + std::to_string(i) + ".json");
    save_dataset(b, path, dir / "images");
    EXPECT_EQ(read_annotations(path), canonicalize(b)) << "bundle " << i;
  }
}

TEST(Dataset, ResultsListUsesReferenceImages) {
  const DatasetBundle ref = parse_dataset(small_doc());
  const json results = json::parse(R"([
    {"image_id": 1, "category_id": 1, "score": 0.9,
     "segmentation": {"size": [6, 8], "counts": [0, 48]}}])");
  const DatasetBundle preds = parse_results(results, ref);
  ASSERT_EQ(preds.annotations.size(), 1u);
  EXPECT_EQ(preds.annotations[0].id, 1);
  EXPECT_EQ(preds.annotations[0].area, 48.0);
  EXPECT_EQ(preds.annotations[0].score, 0.9);
}

}  // namespace
}  // namespace occaug
