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

#include "occaug/entity_bank.hpp"

#include <fstream>
#include <map>
#include <sstream>

#include <json.hpp>

#include "occaug/error.hpp"

namespace occaug {
namespace {

using nlohmann::json;

[[noreturn]] void corrupt(const std::string& what) { throw Error(ErrorKind::CorruptBank, what); }

std::int64_t manifest_int(const json& entry, const char* key, std::size_t position) {
  auto it = entry.find(key);
  if (it == entry.end() || !it->is_number_integer()) {
    corrupt("manifest entry " + std::to_string(position) + " lacks integer '" + key + "'");
  }
  return it->get<std::int64_t>();
}

}  // namespace

bool operator==(const EntityRecord& a, const EntityRecord& b) {
  return a.source_image_id == b.source_image_id &&
         a.source_annotation_id == b.source_annotation_id && a.category_id == b.category_id &&
         a.crop_origin_x == b.crop_origin_x && a.crop_origin_y == b.crop_origin_y &&
         a.mask == b.mask && images_equal(a.crop, b.crop);
}

bool operator==(const EntityBank& a, const EntityBank& b) { return a.entries == b.entries; }

ExtractionReport extract_entities(const DatasetBundle& bundle, const ImageProvider& images) {
  ExtractionReport report;
  std::map<std::int64_t, RgbImage> cache;
  for (const auto& ann : bundle.annotations) {
    if (ann.iscrowd) {
      ++report.skipped_crowd;
      continue;
    }
    const ImageRecord* record = bundle.find_image(ann.image_id);
    if (record == nullptr) {
      throw Error(ErrorKind::DanglingReference,
                  "annotation " + std::to_string(ann.id) + " references missing image");
    }
    const BinaryMask mask = decode_mask(ann, *record);
    const auto box = mask.bounding_box();
    if (!box) {
      report.skipped_empty.push_back(ann.id);
      continue;
    }
    auto it = cache.find(record->id);
    if (it == cache.end()) {
      RgbImage img = images(*record);
      if (img.cols != record->width || img.rows != record->height) {
        throw Error(ErrorKind::DimensionMismatch,
                    "image " + std::to_string(record->id) + " size differs from its record");
      }
      it = cache.emplace(record->id, std::move(img)).first;
    }
    EntityRecord entry;
    entry.source_image_id = ann.image_id;
    entry.source_annotation_id = ann.id;
    entry.category_id = ann.category_id;
    entry.crop_origin_x = box->x;
    entry.crop_origin_y = box->y;
    entry.crop = it->second(cv::Rect(box->x, box->y, box->width, box->height)).clone();
    entry.mask = mask.crop(*box);
    report.bank.entries.push_back(std::move(entry));
  }
  return report;
}

ExtractionReport extract_entities(const DatasetBundle& bundle,
                                  const std::filesystem::path& image_root) {
  return extract_entities(bundle, [&](const ImageRecord& rec) { return load_image_for(rec, image_root); });
}

void save_bank(const EntityBank& bank, const std::filesystem::path& root) {
  std::error_code ec;
  std::filesystem::create_directories(root / "crops", ec);
  std::filesystem::create_directories(root / "masks", ec);
  if (ec || !std::filesystem::is_directory(root / "crops") ||
      !std::filesystem::is_directory(root / "masks")) {
    throw Error(ErrorKind::IoFailure, "cannot create bank directories under " + root.string());
  }
  json entries = json::array();
  for (std::size_t i = 0; i < bank.entries.size(); ++i) {
    const auto& e = bank.entries[i];
    if (e.crop.rows != e.mask.height() || e.crop.cols != e.mask.width()) {
      throw Error(ErrorKind::DimensionMismatch,
                  "entity " + std::to_string(i) + " crop and mask differ in size");
    }
    const std::string name = std::to_string(i) + ".png";
    save_image(e.crop, root / "crops" / name);
    save_mask_png(e.mask, root / "masks" / name);
    entries.push_back({{"index", i},
                       {"source_image_id", e.source_image_id},
                       {"source_annotation_id", e.source_annotation_id},
                       {"category_id", e.category_id},
                       {"crop_origin_x", e.crop_origin_x},
                       {"crop_origin_y", e.crop_origin_y},
                       {"width", e.width()},
                       {"height", e.height()}});
  }
  std::ofstream out(root / "manifest.json", std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorKind::IoFailure, "cannot write manifest under " + root.string());
  out << json{{"version", 1}, {"entries", std::move(entries)}}.dump(1) << '\n';
  if (!out) throw Error(ErrorKind::IoFailure, "cannot write manifest under " + root.string());
}

EntityBank load_bank(const std::filesystem::path& root) {
  const auto manifest_path = root / "manifest.json";
  if (!std::filesystem::is_regular_file(manifest_path)) {
    throw Error(ErrorKind::MissingFile, manifest_path.string());
  }
  std::ifstream in(manifest_path, std::ios::binary);
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::parse_error& e) {
    corrupt(std::string("manifest is not valid JSON: ") + e.what());
  }
  if (!doc.is_object() || !doc.contains("entries") || !doc["entries"].is_array()) {
    corrupt("manifest has no entries list");
  }
  EntityBank bank;
  const auto& entries = doc["entries"];
  for (std::size_t pos = 0; pos < entries.size(); ++pos) {
    const auto& m = entries[pos];
    if (static_cast<std::size_t>(manifest_int(m, "index", pos)) != pos) {
      corrupt("manifest entry " + std::to_string(pos) + " is out of order");
    }
    const std::string name = std::to_string(pos) + ".png";
    const auto crop_path = root / "crops" / name;
    const auto mask_path = root / "masks" / name;
    if (!std::filesystem::is_regular_file(crop_path)) corrupt("entry " + std::to_string(pos) + ": missing " + crop_path.string());
    if (!std::filesystem::is_regular_file(mask_path)) corrupt("entry " + std::to_string(pos) + ": missing " + mask_path.string());
    EntityRecord e;
    e.source_image_id = manifest_int(m, "source_image_id", pos);
    e.source_annotation_id = manifest_int(m, "source_annotation_id", pos);
    e.category_id = manifest_int(m, "category_id", pos);
    e.crop_origin_x = static_cast<int>(manifest_int(m, "crop_origin_x", pos));
    e.crop_origin_y = static_cast<int>(manifest_int(m, "crop_origin_y", pos));
    const auto width = manifest_int(m, "width", pos);
    const auto height = manifest_int(m, "height", pos);
    try {
      e.crop = load_image(crop_path);
      e.mask = load_mask_png(mask_path);
    } catch (const Error& err) {
      corrupt("entry " + std::to_string(pos) + ": " + err.detail());
    }
    if (e.crop.cols != width || e.crop.rows != height || e.mask.width() != width ||
        e.mask.height() != height) {
      corrupt("entry " + std::to_string(pos) + ": file dimensions disagree with manifest");
    }
    if (!e.mask.any()) corrupt("entry " + std::to_string(pos) + ": empty mask");
    bank.entries.push_back(std::move(e));
  }
  // Stray files beyond the manifest mean the two are out of sync.
  const auto stray = root / "crops" / (std::to_string(entries.size()) + ".png");
  if (std::filesystem::exists(stray)) corrupt("crop files beyond manifest: " + stray.string());
  return bank;
}

std::vector<std::size_t> sample_entity_indices(const EntityBank& bank, std::size_t count, Rng& rng) {
  if (count > 0 && bank.empty()) throw Error(ErrorKind::EmptyBank, "cannot sample from an empty bank");
  std::vector<std::size_t> out;
  out.reserve(count);
  for (std::size_t i = 0; i < count; ++i) {
    out.push_back(static_cast<std::size_t>(
        rng.uniform_int(0, static_cast<std::int64_t>(bank.size()) - 1)));
  }
  return out;
}

std::vector<EntityRecord> sample_entities(const EntityBank& bank, std::size_t count, Rng& rng) {
  std::vector<EntityRecord> out;
  for (auto idx : sample_entity_indices(bank, count, rng)) out.push_back(bank.entries[idx]);
  return out;
}

}  // namespace occaug
