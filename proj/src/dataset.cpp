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

#include "occaug/dataset.hpp"

#include <algorithm>
#include <limits>
#include <fstream>
#include <set>
#include <sstream>
#include <unordered_map>
#include <unordered_set>

#include "occaug/error.hpp"

namespace occaug {
namespace {

using nlohmann::json;

[[noreturn]] void malformed(std::int64_t annotation_id, const std::string& what) {
  throw Error(ErrorKind::MalformedAnnotation,
              "annotation " + std::to_string(annotation_id) + ": " + what);
}

std::int64_t require_int(const json& obj, const char* key, const std::string& context) {
  auto it = obj.find(key);
  if (it == obj.end() || !it->is_number_integer()) {
    throw Error(ErrorKind::MalformedAnnotation,
                context + ": missing or non-integer field '" + key + "'");
  }
  return it->get<std::int64_t>();
}

PolygonSet parse_polygons(const json& seg, std::int64_t ann_id) {
  PolygonSet polys;
  for (const auto& flat : seg) {
    if (!flat.is_array()) malformed(ann_id, "polygon must be a flat coordinate list");
    if (flat.size() % 2 != 0) malformed(ann_id, "polygon has an odd number of coordinates");
    if (flat.size() < 6) malformed(ann_id, "polygon has fewer than 3 vertices");
    Polygon poly;
    poly.reserve(flat.size() / 2);
    for (std::size_t i = 0; i < flat.size(); i += 2) {
      if (!flat[i].is_number() || !flat[i + 1].is_number()) {
        malformed(ann_id, "non-numeric polygon coordinate");
      }
      poly.push_back({flat[i].get<double>(), flat[i + 1].get<double>()});
    }
    polys.push_back(std::move(poly));
  }
  return polys;
}

RleMask parse_rle(const json& seg, std::int64_t ann_id) {
  auto size = seg.find("size");
  auto counts = seg.find("counts");
  if (size == seg.end() || !size->is_array() || size->size() != 2 ||
      !(*size)[0].is_number_integer() || !(*size)[1].is_number_integer()) {
    malformed(ann_id, "RLE needs size [height, width]");
  }
  const int h = (*size)[0].get<int>();
  const int w = (*size)[1].get<int>();
  if (h < 0 || w < 0) malformed(ann_id, "negative RLE size");
  if (counts == seg.end()) malformed(ann_id, "RLE without counts");
  if (counts->is_string()) {
    try {
      return rle_from_compressed(counts->get<std::string>(), h, w);
    } catch (const Error& e) {
      malformed(ann_id, e.detail());
    }
  }
  if (!counts->is_array()) malformed(ann_id, "RLE counts must be a list or string");
  RleMask rle{h, w, {}};
  rle.counts.reserve(counts->size());
  for (const auto& c : *counts) {
    if (!c.is_number_integer() || c.get<std::int64_t>() < 0 ||
        c.get<std::int64_t>() > std::numeric_limits<std::uint32_t>::max()) {
      malformed(ann_id, "RLE counts must be non-negative integers");
    }
    rle.counts.push_back(c.get<std::uint32_t>());
  }
  return rle;
}

Segmentation parse_segmentation(const json& seg, std::int64_t ann_id) {
  if (seg.is_array()) return parse_polygons(seg, ann_id);
  if (seg.is_object()) return parse_rle(seg, ann_id);
  malformed(ann_id, "segmentation must be polygons or RLE");
}

json segmentation_to_json(const Segmentation& seg) {
  if (const auto* polys = std::get_if<PolygonSet>(&seg)) {
    json out = json::array();
    for (const auto& poly : *polys) {
      json flat = json::array();
      for (const auto& p : poly) {
        flat.push_back(p.x);
        flat.push_back(p.y);
      }
      out.push_back(std::move(flat));
    }
    return out;
  }
  const auto& rle = std::get<RleMask>(seg);
  return json{{"size", {rle.height, rle.width}}, {"counts", rle.counts}};
}

InstanceAnnotation parse_annotation(const json& a, std::optional<std::int64_t> fallback_id) {
  if (!a.is_object()) {
    throw Error(ErrorKind::MalformedAnnotation, "annotation entry is not an object");
  }
  InstanceAnnotation ann;
  if (fallback_id && !a.contains("id")) {
    ann.id = *fallback_id;
  } else {
    ann.id = require_int(a, "id", "annotation");
  }
  const std::string ctx = "annotation " + std::to_string(ann.id);
  ann.image_id = require_int(a, "image_id", ctx);
  ann.category_id = require_int(a, "category_id", ctx);
  auto seg = a.find("segmentation");
  if (seg == a.end()) malformed(ann.id, "missing segmentation");
  ann.segmentation = parse_segmentation(*seg, ann.id);
  if (auto bbox = a.find("bbox"); bbox != a.end()) {
    if (!bbox->is_array() || bbox->size() != 4) malformed(ann.id, "bbox must have 4 numbers");
    for (const auto& v : *bbox) {
      if (!v.is_number()) malformed(ann.id, "bbox must have 4 numbers");
    }
    ann.bbox = {(*bbox)[0].get<double>(), (*bbox)[1].get<double>(), (*bbox)[2].get<double>(),
                (*bbox)[3].get<double>()};
  }
  if (auto area = a.find("area"); area != a.end()) {
    if (!area->is_number()) malformed(ann.id, "area must be numeric");
    ann.area = area->get<double>();
  }
  if (auto crowd = a.find("iscrowd"); crowd != a.end()) {
    if (crowd->is_boolean()) {
      ann.iscrowd = crowd->get<bool>();
    } else if (crowd->is_number_integer()) {
      ann.iscrowd = crowd->get<std::int64_t>() != 0;
    } else {
      malformed(ann.id, "iscrowd must be 0/1");
    }
  }
  if (auto score = a.find("score"); score != a.end() && !score->is_null()) {
    if (!score->is_number()) malformed(ann.id, "score must be numeric");
    ann.score = score->get<double>();
  }
  return ann;
}

void finish_annotations(DatasetBundle& bundle) {
  std::unordered_map<std::int64_t, const ImageRecord*> by_id;
  for (const auto& img : bundle.images) by_id[img.id] = &img;
  for (auto& ann : bundle.annotations) {
    auto it = by_id.find(ann.image_id);
    if (it == by_id.end()) continue;  // reported by validate()
    try {
      refresh_derived_fields(ann, decode_mask(ann, *it->second));
    } catch (const Error& e) {
      if (e.kind() == ErrorKind::MalformedAnnotation || e.kind() == ErrorKind::DimensionMismatch) throw;
      malformed(ann.id, e.detail());
    }
  }
}

std::string read_text(const std::filesystem::path& path) {
  if (!std::filesystem::is_regular_file(path)) {
    throw Error(ErrorKind::MissingFile, path.string());
  }
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::IoFailure, "cannot open " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

}  // namespace

const ImageRecord* DatasetBundle::find_image(std::int64_t id) const {
  for (const auto& img : images) {
    if (img.id == id) return &img;
  }
  return nullptr;
}

std::vector<const InstanceAnnotation*> DatasetBundle::annotations_for(std::int64_t image_id) const {
  std::vector<const InstanceAnnotation*> out;
  for (const auto& ann : annotations) {
    if (ann.image_id == image_id) out.push_back(&ann);
  }
  return out;
}

BinaryMask decode_segmentation(const Segmentation& segmentation, int height, int width) {
  if (const auto* polys = std::get_if<PolygonSet>(&segmentation)) {
    return rasterize_polygons(*polys, height, width);
  }
  const auto& rle = std::get<RleMask>(segmentation);
  if (rle.height != height || rle.width != width) {
    throw Error(ErrorKind::DimensionMismatch,
                "RLE size " + std::to_string(rle.height) + "x" + std::to_string(rle.width) +
                    " does not match image " + std::to_string(height) + "x" +
                    std::to_string(width));
  }
  return rle_decode(rle);
}

BinaryMask decode_mask(const InstanceAnnotation& annotation, const ImageRecord& image) {
  return decode_segmentation(annotation.segmentation, image.height, image.width);
}

void refresh_derived_fields(InstanceAnnotation& annotation, const BinaryMask& mask) {
  annotation.area = static_cast<double>(mask.count());
  if (auto box = mask.bounding_box()) {
    annotation.bbox = {static_cast<double>(box->x), static_cast<double>(box->y),
                       static_cast<double>(box->width), static_cast<double>(box->height)};
  } else {
    annotation.bbox = {};
  }
}

void validate(const DatasetBundle& bundle, bool decode_masks) {
  std::unordered_map<std::int64_t, const ImageRecord*> images;
  for (const auto& img : bundle.images) {
    const std::string ctx = "image " + std::to_string(img.id);
    if (img.width <= 0 || img.height <= 0) {
      throw Error(ErrorKind::MalformedAnnotation, ctx + ": non-positive dimensions");
    }
    if (img.file_name.empty()) throw Error(ErrorKind::MalformedAnnotation, ctx + ": empty file_name");
    if (!images.emplace(img.id, &img).second) {
      throw Error(ErrorKind::MalformedAnnotation, ctx + ": duplicate image id");
    }
  }
  std::unordered_set<std::int64_t> categories;
  for (const auto& cat : bundle.categories) {
    if (!categories.insert(cat.id).second) {
      throw Error(ErrorKind::MalformedAnnotation,
                  "category " + std::to_string(cat.id) + ": duplicate category id");
    }
  }
  std::unordered_set<std::int64_t> ids;
  for (const auto& ann : bundle.annotations) {
    if (!ids.insert(ann.id).second) malformed(ann.id, "duplicate annotation id");
    auto img = images.find(ann.image_id);
    if (img == images.end()) {
      throw Error(ErrorKind::DanglingReference,
                  "annotation " + std::to_string(ann.id) + " references missing image " +
                      std::to_string(ann.image_id));
    }
    if (!categories.contains(ann.category_id)) {
      throw Error(ErrorKind::DanglingReference,
                  "annotation " + std::to_string(ann.id) + " references missing category " +
                      std::to_string(ann.category_id));
    }
    if (decode_masks) {
      try {
        (void)decode_mask(ann, *img->second);
      } catch (const Error& e) {
        if (e.kind() == ErrorKind::DimensionMismatch) throw;
        malformed(ann.id, e.detail());
      }
    }
  }
}

DatasetBundle canonicalize(DatasetBundle bundle) {
  auto by_id = [](const auto& a, const auto& b) { return a.id < b.id; };
  std::sort(bundle.images.begin(), bundle.images.end(), by_id);
  std::sort(bundle.categories.begin(), bundle.categories.end(), by_id);
  std::sort(bundle.annotations.begin(), bundle.annotations.end(), by_id);
  finish_annotations(bundle);
  return bundle;
}

DatasetBundle parse_dataset(const json& doc) {
  if (!doc.is_object()) throw Error(ErrorKind::MalformedAnnotation, "top level must be an object");
  DatasetBundle bundle;
  for (const char* key : {"images", "annotations", "categories"}) {
    auto it = doc.find(key);
    if (it == doc.end() || !it->is_array()) {
      throw Error(ErrorKind::MalformedAnnotation, std::string("missing array '") + key + "'");
    }
  }
  for (const auto& img : doc["images"]) {
    if (!img.is_object()) throw Error(ErrorKind::MalformedAnnotation, "image entry is not an object");
    ImageRecord rec;
    rec.id = require_int(img, "id", "image");
    const std::string ctx = "image " + std::to_string(rec.id);
    if (!img.contains("file_name") || !img["file_name"].is_string()) {
      throw Error(ErrorKind::MalformedAnnotation, ctx + ": missing file_name");
    }
    rec.file_name = img["file_name"].get<std::string>();
    rec.width = static_cast<int>(require_int(img, "width", ctx));
    rec.height = static_cast<int>(require_int(img, "height", ctx));
    bundle.images.push_back(std::move(rec));
  }
  for (const auto& cat : doc["categories"]) {
    if (!cat.is_object()) throw Error(ErrorKind::MalformedAnnotation, "category entry is not an object");
    Category c;
    c.id = require_int(cat, "id", "category");
    if (auto name = cat.find("name"); name != cat.end() && name->is_string()) {
      c.name = name->get<std::string>();
    }
    bundle.categories.push_back(std::move(c));
  }
  for (const auto& a : doc["annotations"]) bundle.annotations.push_back(parse_annotation(a, std::nullopt));
  validate(bundle, /*decode_masks=*/false);
  finish_annotations(bundle);
  return bundle;
}

DatasetBundle parse_results(const json& doc, const DatasetBundle& reference) {
  if (!doc.is_array()) throw Error(ErrorKind::MalformedAnnotation, "results must be a list");
  DatasetBundle bundle;
  bundle.images = reference.images;
  bundle.categories = reference.categories;
  std::int64_t next_id = 1;
  for (const auto& a : doc) bundle.annotations.push_back(parse_annotation(a, next_id++));
  validate(bundle, /*decode_masks=*/false);
  finish_annotations(bundle);
  return bundle;
}

json dataset_to_json(const DatasetBundle& bundle) {
  json images = json::array();
  for (const auto& img : bundle.images) {
    images.push_back({{"id", img.id},
                      {"file_name", img.file_name},
                      {"width", img.width},
                      {"height", img.height}});
  }
  json annotations = json::array();
  for (const auto& ann : bundle.annotations) {
    json a{{"id", ann.id},
           {"image_id", ann.image_id},
           {"category_id", ann.category_id},
           {"segmentation", segmentation_to_json(ann.segmentation)},
           {"bbox", {ann.bbox.x, ann.bbox.y, ann.bbox.w, ann.bbox.h}},
           {"area", ann.area},
           {"iscrowd", ann.iscrowd ? 1 : 0}};
    if (ann.score) a["score"] = *ann.score;
    annotations.push_back(std::move(a));
  }
  json categories = json::array();
  for (const auto& cat : bundle.categories) categories.push_back({{"id", cat.id}, {"name", cat.name}});
  return json{{"images", std::move(images)},
              {"annotations", std::move(annotations)},
              {"categories", std::move(categories)}};
}

DatasetBundle read_annotations(const std::filesystem::path& annotation_path) {
  const std::string text = read_text(annotation_path);
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw Error(ErrorKind::MalformedAnnotation,
                annotation_path.string() + ": invalid JSON: " + e.what());
  }
  return parse_dataset(doc);
}

DatasetBundle load_dataset(const std::filesystem::path& annotation_path,
                           const std::filesystem::path& image_root) {
  DatasetBundle bundle = read_annotations(annotation_path);
  for (const auto& img : bundle.images) {
    const auto path = image_root / img.file_name;
    if (!std::filesystem::is_regular_file(path)) {
      throw Error(ErrorKind::MissingFile,
                  "image " + std::to_string(img.id) + ": " + path.string());
    }
  }
  return bundle;
}

void save_dataset(const DatasetBundle& bundle, const std::filesystem::path& annotation_path,
                  const std::filesystem::path& image_root) {
  validate(bundle);
  const DatasetBundle canonical = canonicalize(bundle);
  std::error_code ec;
  if (!image_root.empty()) {
    std::filesystem::create_directories(image_root, ec);
    if (ec || !std::filesystem::is_directory(image_root)) {
      throw Error(ErrorKind::IoFailure, "cannot create " + image_root.string());
    }
  }
  if (annotation_path.has_parent_path()) {
    std::filesystem::create_directories(annotation_path.parent_path(), ec);
  }
  std::ofstream out(annotation_path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorKind::IoFailure, "cannot write " + annotation_path.string());
  out << dataset_to_json(canonical).dump() << '\n';
  out.flush();
  if (!out) throw Error(ErrorKind::IoFailure, "write failed for " + annotation_path.string());
}

RgbImage load_image_for(const ImageRecord& record, const std::filesystem::path& image_root) {
  RgbImage image = load_image(image_root / record.file_name);
  if (image.cols != record.width || image.rows != record.height) {
    throw Error(ErrorKind::DimensionMismatch,
                "image " + std::to_string(record.id) + " is " + std::to_string(image.cols) +
                    "x" + std::to_string(image.rows) + ", annotation says " +
                    std::to_string(record.width) + "x" + std::to_string(record.height));
  }
  return image;
}

}  // namespace occaug
