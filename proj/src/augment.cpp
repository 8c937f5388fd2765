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

#include "occaug/augment.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <fstream>
#include <numbers>
#include <sstream>
#include <thread>

#include <opencv2/imgproc.hpp>

#include "occaug/error.hpp"
#include "occaug/log.hpp"

namespace occaug {
namespace {

using nlohmann::json;

[[noreturn]] void bad_config(const std::string& field, const std::string& why) {
  throw Error(ErrorKind::InvalidConfig, field + ": " + why);
}

void check_probability(double p, const char* field) {
  if (!(p >= 0.0 && p <= 1.0)) bad_config(field, "must lie in [0, 1]");
}

void check_range(double lo, double hi, const char* field) {
  if (!(lo <= hi)) bad_config(field, "min exceeds max");
}

void check_nonnegative(double v, const char* field) {
  if (!(v >= 0.0)) bad_config(field, "must be non-negative");
}

// Pasted entity bookkeeping inside copy_paste.
struct PastedState {
  EntityRecord entity;
  Anchor anchor;
  std::int64_t id = 0;
  std::int64_t pre = 0;
  std::int64_t visible = 0;
  bool alive = false;
};

struct OriginalState {
  BinaryMask mask;
  std::optional<PixelBox> box;
  std::int64_t pre = 0;
  std::int64_t visible = 0;
  bool alive = true;
};

// Segmentation, area and bbox for a local mask sitting at (x0, y0) in an
// H x W frame.
void set_placed_mask(InstanceAnnotation& ann, const BinaryMask& local, int x0, int y0, int H,
                     int W) {
  ann.segmentation = rle_encode_placed(local, x0, y0, H, W);
  ann.area = static_cast<double>(local.count());
  if (const auto box = local.bounding_box()) {
    ann.bbox = {static_cast<double>(x0 + box->x), static_cast<double>(y0 + box->y),
                static_cast<double>(box->width), static_cast<double>(box->height)};
  } else {
    ann.bbox = {};
  }
}

bool boxes_overlap(const PixelBox& a, const PixelBox& b) {
  return a.x < b.x + b.width && b.x < a.x + a.width && a.y < b.y + b.height &&
         b.y < a.y + a.height;
}

bool below_visibility(std::int64_t visible, std::int64_t pre, double fraction) {
  return static_cast<double>(visible) < fraction * static_cast<double>(pre);
}

}  // namespace

std::vector<Size2> default_resize_scales() {
  return {{3680, 3080}, {3200, 2400}, {2680, 2080}, {2000, 1400}, {1920, 1440}, {1800, 1200},
          {1600, 1024}, {1333, 800},  {1624, 1234}, {2336, 1752}, {2456, 2054}};
}

void AugmentationConfig::validate() const {
  check_probability(paste_probability, "paste_probability");
  check_probability(occluder_probability, "occluder_probability");
  check_probability(min_visible_fraction, "min_visible_fraction");
  check_probability(jitter.hflip_probability, "hflip_probability");
  check_probability(global_hflip_probability, "global_hflip_probability");
  if (max_entities < 1) bad_config("max_entities", "must be at least 1");
  check_range(jitter.scale_min, jitter.scale_max, "scale");
  if (!(jitter.scale_min > 0.0)) bad_config("scale_min", "must be positive");
  check_range(jitter.rotation_min, jitter.rotation_max, "rotation");
  for (const auto* r : {&jitter.photometric, &global_photometric}) {
    check_nonnegative(r->brightness, "brightness");
    check_nonnegative(r->contrast, "contrast");
    check_nonnegative(r->saturation, "saturation");
    check_nonnegative(r->hue, "hue");
  }
  if (output_size.width <= 0 || output_size.height <= 0) bad_config("output_size", "must be positive");
  if (resize_scales.empty()) bad_config("resize_scales", "must not be empty");
  for (const auto& s : resize_scales) {
    if (s.width <= 0 || s.height <= 0) bad_config("resize_scales", "entries must be positive");
  }
}

PhotometricParams draw_photometric(const PhotometricRanges& ranges, Rng& rng) {
  PhotometricParams p;
  p.brightness = rng.uniform_real(-ranges.brightness, ranges.brightness);
  p.contrast = rng.uniform_real(-ranges.contrast, ranges.contrast);
  p.saturation = rng.uniform_real(-ranges.saturation, ranges.saturation);
  p.hue = rng.uniform_real(-ranges.hue, ranges.hue);
  return p;
}

void apply_photometric(RgbImage& image, const PhotometricParams& params) {
  if (image.empty()) return;
  if (params.brightness != 0.0 || params.contrast != 0.0) {
    // (x - 128) * (1 + c) + 128 + 255 * b
    const double alpha = 1.0 + params.contrast;
    const double beta = 255.0 * params.brightness - 128.0 * params.contrast;
    image.convertTo(image, -1, alpha, beta);
  }
  if (params.saturation != 0.0 || params.hue != 0.0) {
    cv::Mat hsv;
    cv::cvtColor(image, hsv, cv::COLOR_RGB2HSV);
    const int shift = static_cast<int>(std::lround(params.hue));
    const double gain = 1.0 + params.saturation;
    for (int r = 0; r < hsv.rows; ++r) {
      auto* row = hsv.ptr<cv::Vec3b>(r);
      for (int c = 0; c < hsv.cols; ++c) {
        row[c][0] = static_cast<std::uint8_t>(((row[c][0] + shift) % 180 + 180) % 180);
        row[c][1] = cv::saturate_cast<std::uint8_t>(row[c][1] * gain);
      }
    }
    cv::cvtColor(hsv, image, cv::COLOR_HSV2RGB);
  }
}

JitterParams draw_jitter(const JitterConfig& config, Rng& rng) {
  JitterParams p;
  p.hflip = rng.bernoulli(config.hflip_probability);
  p.scale = rng.uniform_real(config.scale_min, config.scale_max);
  p.rotation_deg = rng.uniform_real(config.rotation_min, config.rotation_max);
  const PhotometricParams photo = draw_photometric(config.photometric, rng);
  p.brightness = photo.brightness;
  p.contrast = photo.contrast;
  p.saturation = photo.saturation;
  p.hue = photo.hue;
  return p;
}

EntityRecord apply_jitter(const EntityRecord& entity, const JitterParams& params) {
  EntityRecord out = entity;
  out.crop = entity.crop.clone();
  if (params.hflip) {
    cv::flip(out.crop, out.crop, 1);
    out.mask = out.mask.flipped_horizontally();
  }

  if (params.scale != 1.0 || params.rotation_deg != 0.0) {
    if (!(params.scale > 0.0)) throw Error(ErrorKind::DegenerateResult, "non-positive scale");
    const double w = out.mask.width();
    const double h = out.mask.height();
    const double theta = params.rotation_deg * std::numbers::pi / 180.0;
    const double a00 = params.scale * std::cos(theta);
    const double a01 = -params.scale * std::sin(theta);
    const double a10 = params.scale * std::sin(theta);
    const double a11 = params.scale * std::cos(theta);
    const double cx = w / 2.0;
    const double cy = h / 2.0;
    double min_x = 1e300, max_x = -1e300, min_y = 1e300, max_y = -1e300;
    for (const auto& [px, py] : {std::pair{0.0, 0.0}, {w, 0.0}, {0.0, h}, {w, h}}) {
      const double qx = a00 * (px - cx) + a01 * (py - cy);
      const double qy = a10 * (px - cx) + a11 * (py - cy);
      min_x = std::min(min_x, qx);
      max_x = std::max(max_x, qx);
      min_y = std::min(min_y, qy);
      max_y = std::max(max_y, qy);
    }
    const int out_w = std::max(1, static_cast<int>(std::ceil(max_x - min_x - 1e-9)));
    const int out_h = std::max(1, static_cast<int>(std::ceil(max_y - min_y - 1e-9)));
    // Continuous map q = A p + t with pixel centres at half-integers.
    const double tx = -(a00 * cx + a01 * cy) - min_x;
    const double ty = -(a10 * cx + a11 * cy) - min_y;

    const cv::Matx23d forward(a00, a01, a00 * 0.5 + a01 * 0.5 + tx - 0.5,
                              a10, a11, a10 * 0.5 + a11 * 0.5 + ty - 0.5);
    cv::Mat warped;
    cv::warpAffine(out.crop, warped, cv::Mat(forward), cv::Size(out_w, out_h), cv::INTER_LINEAR,
                   cv::BORDER_REPLICATE);

    const double det = a00 * a11 - a01 * a10;
    const double i00 = a11 / det, i01 = -a01 / det, i10 = -a10 / det, i11 = a00 / det;
    BinaryMask mask(out_h, out_w);
    const int src_w = out.mask.width();
    const int src_h = out.mask.height();
    for (int y = 0; y < out_h; ++y) {
      for (int x = 0; x < out_w; ++x) {
        const double qx = x + 0.5 - tx;
        const double qy = y + 0.5 - ty;
        const double px = i00 * qx + i01 * qy;
        const double py = i10 * qx + i11 * qy;
        const int sc = static_cast<int>(std::floor(px));
        const int sr = static_cast<int>(std::floor(py));
        if (sc >= 0 && sc < src_w && sr >= 0 && sr < src_h && out.mask.at(sr, sc)) mask.set(y, x);
      }
    }
    out.crop = warped;
    out.mask = std::move(mask);
  }

  const auto box = out.mask.bounding_box();
  if (!box) throw Error(ErrorKind::DegenerateResult, "transformed mask is empty");
  if (box->width != out.mask.width() || box->height != out.mask.height()) {
    out.crop = out.crop(cv::Rect(box->x, box->y, box->width, box->height)).clone();
    out.mask = out.mask.crop(*box);
  }
  apply_photometric(out.crop, {params.brightness, params.contrast, params.saturation, params.hue});
  return out;
}

EntityRecord jitter_entity(const EntityRecord& entity, const JitterConfig& config, Rng& rng,
                           JitterParams* applied) {
  const JitterParams params = draw_jitter(config, rng);
  if (applied != nullptr) *applied = params;
  return apply_jitter(entity, params);
}

Anchor occluder_anchor_for_centre(Anchor centre, Size2 occluder_size) {
  return {centre.x - occluder_size.width / 2, centre.y - occluder_size.height / 2};
}

Anchor place_occluder(Anchor initial_anchor, Size2 initial_size, Size2 occluder_size, Rng& rng) {
  const int cx = static_cast<int>(
      rng.uniform_int(initial_anchor.x, initial_anchor.x + initial_size.width / 2));
  const int cy = static_cast<int>(
      rng.uniform_int(initial_anchor.y, initial_anchor.y + initial_size.height / 2));
  return occluder_anchor_for_centre({cx, cy}, occluder_size);
}

AugmentedSample copy_paste(const RgbImage& image, std::int64_t image_id,
                           const std::vector<InstanceAnnotation>& annotations,
                           const EntityBank& bank, const PlacementArea& area,
                           const AugmentationConfig& config, Rng& rng,
                           std::int64_t first_new_id) {
  AugmentedSample sample;
  sample.image_id = image_id;
  sample.image = image.clone();
  const int H = image.rows;
  const int W = image.cols;

  sample.paste_event = rng.bernoulli(config.paste_probability);
  if (!sample.paste_event) {
    sample.annotations = annotations;
    return sample;
  }
  if (bank.empty()) throw Error(ErrorKind::EmptyBank, "copy-paste needs a nonempty entity bank");
  const AnchorSampler sampler(area);

  std::vector<OriginalState> originals;
  originals.reserve(annotations.size());
  for (const auto& ann : annotations) {
    OriginalState st;
    st.mask = decode_segmentation(ann.segmentation, H, W);
    st.box = st.mask.bounding_box();
    st.pre = st.visible = st.mask.count();
    originals.push_back(std::move(st));
  }
  std::vector<std::uint8_t> covered(static_cast<std::size_t>(H) * W, 0);
  std::vector<std::int32_t> owner(static_cast<std::size_t>(H) * W, 0);
  std::vector<PastedState> pasted;
  std::int64_t next_id = first_new_id;

  auto paste = [&](std::size_t bank_index, const JitterParams& params, EntityRecord entity,
                   Anchor anchor, bool occluder) {
    PasteRecord record;
    record.image_id = image_id;
    record.bank_index = bank_index;
    record.anchor = anchor;
    record.occluder = occluder;
    record.jitter = params;

    PastedState state;
    const auto label = static_cast<std::int32_t>(pasted.size() + 1);
    const int r0 = std::max(0, -anchor.y);
    const int r1 = std::min(entity.height(), H - anchor.y);
    const int c0 = std::max(0, -anchor.x);
    const int c1 = std::min(entity.width(), W - anchor.x);
    const PixelBox stamp_box{anchor.x, anchor.y, entity.width(), entity.height()};
    std::vector<std::size_t> candidates;
    for (std::size_t i = 0; i < originals.size(); ++i) {
      if (originals[i].alive && originals[i].box && boxes_overlap(*originals[i].box, stamp_box)) {
        candidates.push_back(i);
      }
    }
    for (int r = r0; r < r1; ++r) {
      const int gy = anchor.y + r;
      const auto* src = entity.crop.ptr<cv::Vec3b>(r);
      auto* dst = sample.image.ptr<cv::Vec3b>(gy);
      for (int c = c0; c < c1; ++c) {
        if (!entity.mask.at(r, c)) continue;
        const int gx = anchor.x + c;
        const std::size_t p = static_cast<std::size_t>(gy) * W + gx;
        dst[gx] = src[c];
        if (owner[p] > 0) --pasted[owner[p] - 1].visible;
        owner[p] = label;
        if (covered[p] == 0) {
          covered[p] = 1;
          for (auto i : candidates) {
            if (originals[i].mask.at(gy, gx)) --originals[i].visible;
          }
        }
        ++state.pre;
      }
    }
    state.visible = state.pre;
    state.alive = state.pre > 0;
    if (state.alive) {
      state.id = next_id++;
      record.annotation_id = state.id;
    }

    for (std::size_t i = 0; i < originals.size(); ++i) {
      auto& o = originals[i];
      if (o.alive && o.pre > 0 && below_visibility(o.visible, o.pre, config.min_visible_fraction)) {
        o.alive = false;
        record.dropped_annotation_ids.push_back(annotations[i].id);
      }
    }
    for (auto& prev : pasted) {
      if (prev.alive && below_visibility(prev.visible, prev.pre, config.min_visible_fraction)) {
        prev.alive = false;
        record.dropped_annotation_ids.push_back(prev.id);
      }
    }
    state.entity = std::move(entity);
    state.anchor = anchor;
    pasted.push_back(std::move(state));
    sample.provenance.push_back(std::move(record));
  };

  const auto target = rng.uniform_int(1, config.max_entities);
  std::int64_t slots = 0;
  while (slots < target) {
    const std::size_t idx = sample_entity_indices(bank, 1, rng).front();
    const JitterParams params = draw_jitter(config.jitter, rng);
    ++slots;
    EntityRecord primary;
    try {
      primary = apply_jitter(bank.entries[idx], params);
    } catch (const Error& e) {
      if (e.kind() != ErrorKind::DegenerateResult) throw;
      log::debug("image " + std::to_string(image_id) + ": skipped degenerate entity " + std::to_string(idx));
      continue;
    }
    const Anchor anchor = sampler(rng);
    const Size2 primary_size{primary.width(), primary.height()};
    paste(idx, params, std::move(primary), anchor, false);
    ++sample.primary_count;

    // The occluder shares the per-image cap with the primaries.
    if (!rng.bernoulli(config.occluder_probability) || slots >= config.max_entities) continue;
    const std::size_t occ_idx = sample_entity_indices(bank, 1, rng).front();
    const JitterParams occ_params = draw_jitter(config.jitter, rng);
    ++slots;
    EntityRecord occluder;
    try {
      occluder = apply_jitter(bank.entries[occ_idx], occ_params);
    } catch (const Error& e) {
      if (e.kind() != ErrorKind::DegenerateResult) throw;
      continue;
    }
    const Anchor occ_anchor = place_occluder(anchor, primary_size,
                                             {occluder.width(), occluder.height()}, rng);
    paste(occ_idx, occ_params, std::move(occluder), occ_anchor, true);
    ++sample.occluder_count;
  }

  for (std::size_t i = 0; i < annotations.size(); ++i) {
    const auto& o = originals[i];
    if (!o.alive) continue;
    InstanceAnnotation ann = annotations[i];
    if (o.visible != o.pre) {
      BinaryMask visible = o.mask;
      auto bits = visible.bits();
      for (std::size_t p = 0; p < bits.size(); ++p) bits[p] &= static_cast<std::uint8_t>(covered[p] ^ 1);
      ann.segmentation = rle_encode(visible);
      refresh_derived_fields(ann, visible);
    }
    sample.annotations.push_back(std::move(ann));
  }
  for (std::size_t k = 0; k < pasted.size(); ++k) {
    const auto& st = pasted[k];
    if (!st.alive) continue;
    const auto label = static_cast<std::int32_t>(k + 1);
    const int r0 = std::max(0, st.anchor.y);
    const int r1 = std::min(H, st.anchor.y + st.entity.height());
    const int c0 = std::max(0, st.anchor.x);
    const int c1 = std::min(W, st.anchor.x + st.entity.width());
    BinaryMask local(r1 - r0, c1 - c0);
    for (int r = r0; r < r1; ++r) {
      for (int c = c0; c < c1; ++c) {
        if (owner[static_cast<std::size_t>(r) * W + c] == label) local.set(r - r0, c - c0);
      }
    }
    InstanceAnnotation ann;
    ann.id = st.id;
    ann.image_id = image_id;
    ann.category_id = st.entity.category_id;
    set_placed_mask(ann, local, c0, r0, H, W);
    sample.annotations.push_back(std::move(ann));
  }
  return sample;
}

AugmentedSample base_transform_chain(AugmentedSample sample, const AugmentationConfig& config,
                                     Rng& rng) {
  const int w = sample.image.cols;
  const int h = sample.image.rows;
  const Size2 out_size = config.output_size;
  if (w <= 0 || h <= 0) throw Error(ErrorKind::InvalidDimensions, "empty image in base transform chain");

  const Size2 scale = config.resize_scales[static_cast<std::size_t>(
      rng.uniform_int(0, static_cast<std::int64_t>(config.resize_scales.size()) - 1))];
  const double factor = std::min(static_cast<double>(scale.width) / w,
                                 static_cast<double>(scale.height) / h);
  const int nw = std::max(1, static_cast<int>(std::lround(w * factor)));
  const int nh = std::max(1, static_cast<int>(std::lround(h * factor)));
  const bool flip = rng.bernoulli(config.global_hflip_probability);
  const PhotometricParams photo = draw_photometric(config.global_photometric, rng);
  const int cw = std::min(nw, out_size.width);
  const int ch = std::min(nh, out_size.height);
  const int x0 = static_cast<int>(rng.uniform_int(0, nw - cw));
  const int y0 = static_cast<int>(rng.uniform_int(0, nh - ch));
  // Crop window in resized, unflipped coordinates.
  const int wx0 = flip ? nw - x0 - cw : x0;

  cv::Mat region;
  if (nw == w && nh == h) {
    region = sample.image(cv::Rect(wx0, y0, cw, ch)).clone();
  } else {
    const double sx = static_cast<double>(nw) / w;
    const double sy = static_cast<double>(nh) / h;
    const cv::Matx23d m(sx, 0.0, 0.5 * sx - 0.5 - wx0, 0.0, sy, 0.5 * sy - 0.5 - y0);
    cv::warpAffine(sample.image, region, cv::Mat(m), cv::Size(cw, ch), cv::INTER_LINEAR,
                   cv::BORDER_REPLICATE);
  }
  if (flip) cv::flip(region, region, 1);
  apply_photometric(region, photo);
  RgbImage canvas(out_size.height, out_size.width, CV_8UC3, cv::Scalar(0, 0, 0));
  region.copyTo(canvas(cv::Rect(0, 0, cw, ch)));

  // Nearest-neighbour source index for each resized row/column.
  std::vector<int> col_src(nw), row_src(nh);
  for (int x = 0; x < nw; ++x) {
    col_src[x] = std::min(w - 1, static_cast<int>(std::floor((x + 0.5) * w / nw)));
  }
  for (int y = 0; y < nh; ++y) {
    row_src[y] = std::min(h - 1, static_cast<int>(std::floor((y + 0.5) * h / nh)));
  }
  std::vector<std::int64_t> col_mult(w, 0), row_mult(h, 0);
  for (int x = 0; x < nw; ++x) ++col_mult[col_src[x]];
  for (int y = 0; y < nh; ++y) ++row_mult[row_src[y]];

  std::vector<InstanceAnnotation> kept;
  for (auto& ann : sample.annotations) {
    const BinaryMask src = decode_segmentation(ann.segmentation, h, w);
    const auto box = src.bounding_box();
    std::int64_t pre = 0;
    int ya = 0, yb = 0, xa = 0, xb = 0;
    if (box) {
      for (int r = box->y; r < box->y + box->height; ++r) {
        std::int64_t row_sum = 0;
        for (int c = box->x; c < box->x + box->width; ++c) {
          if (src.at(r, c)) row_sum += col_mult[c];
        }
        pre += row_sum * row_mult[r];
      }
      // Only crop rows/columns whose source lies in the source box can be set.
      while (ya < ch && row_src[y0 + ya] < box->y) ++ya;
      yb = ya;
      while (yb < ch && row_src[y0 + yb] < box->y + box->height) ++yb;
      while (xa < cw && col_src[wx0 + xa] < box->x) ++xa;
      xb = xa;
      while (xb < cw && col_src[wx0 + xb] < box->x + box->width) ++xb;
    }
    BinaryMask local(yb - ya, xb - xa);
    std::int64_t visible = 0;
    for (int y = ya; y < yb; ++y) {
      const int sr = row_src[y0 + y];
      for (int x = xa; x < xb; ++x) {
        if (src.at(sr, col_src[wx0 + x])) {
          local.set(y - ya, flip ? xb - 1 - x : x - xa);
          ++visible;
        }
      }
    }
    if (visible == 0 || below_visibility(visible, pre, config.min_visible_fraction)) {
      sample.crop_dropped_ids.push_back(ann.id);
      continue;
    }
    set_placed_mask(ann, local, flip ? cw - xb : xa, ya, out_size.height, out_size.width);
    kept.push_back(std::move(ann));
  }
  sample.annotations = std::move(kept);
  sample.image = std::move(canvas);
  return sample;
}

AugmentedSample augment_image(const RgbImage& image, const ImageRecord& record,
                              const std::vector<InstanceAnnotation>& annotations,
                              const EntityBank& bank, const AugmentationConfig& config,
                              const DetectorConfig& detector,
                              std::optional<CourtSide> side_override, std::int64_t first_new_id) {
  Rng rng(Rng::derive_seed(config.seed, record.id));
  const DetectionResult detection = detect_playable_region(image, detector);
  PlacementArea area;
  if (const auto* region = std::get_if<PlayableRegion>(&detection)) {
    area = *region;
  } else {
    const CourtSide side = infer_court_side(detection, image.cols, side_override);
    area = fallback_bounds(image.cols, image.rows, side);
  }
  AugmentedSample sample =
      copy_paste(image, record.id, annotations, bank, area, config, rng, first_new_id);
  sample.fallback = std::holds_alternative<PlacementBounds>(area);
  return base_transform_chain(std::move(sample), config, rng);
}

json to_json(const JitterParams& p) {
  return json{{"hflip", p.hflip},           {"scale", p.scale},
              {"rotation_deg", p.rotation_deg}, {"brightness", p.brightness},
              {"contrast", p.contrast},     {"saturation", p.saturation},
              {"hue", p.hue}};
}

json to_json(const PasteRecord& r) {
  return json{{"stage", "paste"},
              {"image_id", r.image_id},
              {"bank_index", r.bank_index},
              {"anchor", {r.anchor.x, r.anchor.y}},
              {"occluder", r.occluder},
              {"annotation_id", r.annotation_id ? json(*r.annotation_id) : json(nullptr)},
              {"jitter", to_json(r.jitter)},
              {"dropped_annotation_ids", r.dropped_annotation_ids}};
}

std::map<std::int64_t, CourtSide> load_side_map(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::MissingFile, path.string());
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::parse_error& e) {
    throw Error(ErrorKind::InvalidConfig, "side map is not valid JSON: " + std::string(e.what()));
  }
  if (!doc.is_object()) throw Error(ErrorKind::InvalidConfig, "side map must be an object");
  std::map<std::int64_t, CourtSide> out;
  for (const auto& [key, value] : doc.items()) {
    std::int64_t id = 0;
    try {
      std::size_t used = 0;
      id = std::stoll(key, &used);
      if (used != key.size()) throw std::invalid_argument(key);
    } catch (const std::exception&) {
      throw Error(ErrorKind::InvalidConfig, "side map key '" + key + "' is not an image id");
    }
    const auto side = value.is_string() ? parse_court_side(value.get<std::string>()) : std::nullopt;
    if (!side) throw Error(ErrorKind::InvalidConfig, "side map value for '" + key + "' must be left or right");
    out[id] = *side;
  }
  return out;
}

AugmentResult augment_dataset(const DatasetBundle& bundle, const std::filesystem::path& image_root,
                              const EntityBank& bank, const AugmentOptions& options,
                              const std::filesystem::path& out) {
  const auto& config = options.augmentation;
  config.validate();
  std::error_code ec;
  std::filesystem::create_directories(out / "images", ec);
  if (ec || !std::filesystem::is_directory(out / "images")) {
    throw Error(ErrorKind::IoFailure, "cannot create " + (out / "images").string());
  }

  std::int64_t max_id = 0;
  for (const auto& ann : bundle.annotations) max_id = std::max(max_id, ann.id);

  struct Outcome {
    std::optional<AugmentedSample> sample;
    ImageRecord record;
    std::string error;
  };
  const std::size_t n = bundle.images.size();
  std::vector<Outcome> outcomes(n);
  std::atomic<std::size_t> next{0};

  auto worker = [&]() {
    for (std::size_t i = next++; i < n; i = next++) {
      const ImageRecord& rec = bundle.images[i];
      Outcome& outcome = outcomes[i];
      try {
        const RgbImage image = load_image_for(rec, image_root);
        std::vector<InstanceAnnotation> anns;
        for (const auto* a : bundle.annotations_for(rec.id)) anns.push_back(*a);
        std::optional<CourtSide> side;
        if (auto it = options.side_overrides.find(rec.id); it != options.side_overrides.end()) {
          side = it->second;
        }
        const std::int64_t first_new_id =
            max_id + 1 + static_cast<std::int64_t>(i) * config.max_entities;
        AugmentedSample sample = augment_image(image, rec, anns, bank, config, options.detector,
                                               side, first_new_id);
        ImageRecord out_rec = rec;
        out_rec.file_name = std::filesystem::path(rec.file_name).replace_extension(".png").generic_string();
        out_rec.width = sample.image.cols;
        out_rec.height = sample.image.rows;
        const auto target = out / "images" / out_rec.file_name;
        std::filesystem::create_directories(target.parent_path());
        save_image(sample.image, target);
        sample.image.release();
        outcome.record = std::move(out_rec);
        outcome.sample = std::move(sample);
      } catch (const std::exception& e) {
        outcome.error = e.what();
      }
    }
  };
  const unsigned jobs = std::max(1u, options.jobs);
  if (jobs == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (unsigned j = 0; j < jobs; ++j) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }

  AugmentResult result;
  result.bundle.categories = bundle.categories;
  std::ofstream provenance(out / "provenance.jsonl", std::ios::binary | std::ios::trunc);
  if (!provenance) throw Error(ErrorKind::IoFailure, "cannot write provenance log");
  for (std::size_t i = 0; i < n; ++i) {
    auto& outcome = outcomes[i];
    if (!outcome.sample) {
      ++result.summary.skipped;
      log::warn("skipping image " + std::to_string(bundle.images[i].id) + ": " + outcome.error);
      continue;
    }
    auto& sample = *outcome.sample;
    ++result.summary.images;
    result.summary.paste_events += sample.paste_event ? 1 : 0;
    result.summary.fallbacks += sample.fallback ? 1 : 0;
    result.summary.primaries += static_cast<std::size_t>(sample.primary_count);
    result.summary.occluders += static_cast<std::size_t>(sample.occluder_count);
    for (const auto& rec : sample.provenance) {
      result.summary.drops += rec.dropped_annotation_ids.size();
      provenance << to_json(rec).dump() << '\n';
    }
    if (!sample.crop_dropped_ids.empty()) {
      result.summary.drops += sample.crop_dropped_ids.size();
      provenance << json{{"stage", "crop"},
                         {"image_id", sample.image_id},
                         {"dropped_annotation_ids", sample.crop_dropped_ids}}
                        .dump()
                 << '\n';
    }
    result.bundle.images.push_back(outcome.record);
    for (auto& ann : sample.annotations) result.bundle.annotations.push_back(std::move(ann));
  }
  if (!provenance) throw Error(ErrorKind::IoFailure, "cannot write provenance log");
  save_dataset(result.bundle, out / "annotations.json", out / "images");
  return result;
}

}  // namespace occaug
