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

#include "occaug/mask.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "occaug/error.hpp"

namespace occaug {
namespace {

void require_same_shape(const BinaryMask& a, const BinaryMask& b, const char* op) {
  if (a.height() != b.height() || a.width() != b.width()) {
    throw Error(ErrorKind::DimensionMismatch,
                std::string(op) + ": " + std::to_string(a.height()) + "x" +
                    std::to_string(a.width()) + " vs " + std::to_string(b.height()) + "x" +
                    std::to_string(b.width()));
  }
}

}  // namespace

BinaryMask::BinaryMask(int height, int width) {
  if (height < 0 || width < 0) {
    throw Error(ErrorKind::InvalidDimensions, "negative mask dimensions");
  }
  height_ = height;
  width_ = width;
  bits_.assign(static_cast<std::size_t>(height) * static_cast<std::size_t>(width), 0);
}

BinaryMask::BinaryMask(int height, int width, std::vector<std::uint8_t> bits)
    : height_(height), width_(width), bits_(std::move(bits)) {
  if (height < 0 || width < 0 ||
      bits_.size() != static_cast<std::size_t>(height) * static_cast<std::size_t>(width)) {
    throw Error(ErrorKind::InvalidDimensions,
                "bit count " + std::to_string(bits_.size()) + " does not match " +
                    std::to_string(height) + "x" + std::to_string(width));
  }
  for (auto& b : bits_) b = b != 0 ? 1 : 0;
}

std::int64_t BinaryMask::count() const noexcept {
  std::int64_t n = 0;
  for (auto b : bits_) n += b;
  return n;
}

bool BinaryMask::any() const noexcept {
  return std::any_of(bits_.begin(), bits_.end(), [](std::uint8_t b) { return b != 0; });
}

std::optional<PixelBox> BinaryMask::bounding_box() const {
  int min_r = height_, max_r = -1, min_c = width_, max_c = -1;
  for (int r = 0; r < height_; ++r) {
    const std::uint8_t* row = bits_.data() + index(r, 0);
    for (int c = 0; c < width_; ++c) {
      if (row[c] == 0) continue;
      min_r = std::min(min_r, r);
      max_r = r;
      min_c = std::min(min_c, c);
      max_c = std::max(max_c, c);
    }
  }
  if (max_r < 0) return std::nullopt;
  return PixelBox{min_c, min_r, max_c - min_c + 1, max_r - min_r + 1};
}

BinaryMask BinaryMask::crop(const PixelBox& box) const {
  if (box.x < 0 || box.y < 0 || box.width < 0 || box.height < 0 ||
      box.x + box.width > width_ || box.y + box.height > height_) {
    throw Error(ErrorKind::InvalidDimensions, "crop box outside mask");
  }
  BinaryMask out(box.height, box.width);
  for (int r = 0; r < box.height; ++r) {
    const auto* src = bits_.data() + index(box.y + r, box.x);
    std::copy(src, src + box.width, out.bits_.data() + out.index(r, 0));
  }
  return out;
}

BinaryMask BinaryMask::flipped_horizontally() const {
  BinaryMask out(height_, width_);
  for (int r = 0; r < height_; ++r) {
    for (int c = 0; c < width_; ++c) out.bits_[index(r, c)] = bits_[index(r, width_ - 1 - c)];
  }
  return out;
}

RleMask rle_encode(const BinaryMask& mask) {
  RleMask rle{mask.height(), mask.width(), {}};
  std::uint8_t current = 0;
  std::uint32_t run = 0;
  for (int c = 0; c < mask.width(); ++c) {
    for (int r = 0; r < mask.height(); ++r) {
      const std::uint8_t v = mask.at(r, c) ? 1 : 0;
      if (v != current) {
        rle.counts.push_back(run);
        run = 0;
        current = v;
      }
      ++run;
    }
  }
  rle.counts.push_back(run);
  return rle;
}

RleMask rle_encode_placed(const BinaryMask& stamp, int offset_x, int offset_y, int height,
                          int width) {
  if (height < 0 || width < 0) throw Error(ErrorKind::InvalidDimensions, "negative RLE size");
  RleMask rle{height, width, {}};
  std::uint8_t current = 0;
  std::uint64_t run = 0;
  auto emit = [&](std::uint8_t v, std::uint64_t len) {
    if (len == 0) return;
    if (v != current) {
      rle.counts.push_back(static_cast<std::uint32_t>(run));
      run = 0;
      current = v;
    }
    run += len;
  };
  const int r_lo = std::clamp(offset_y, 0, height);
  const int r_hi = std::clamp(offset_y + stamp.height(), r_lo, height);
  for (int c = 0; c < width; ++c) {
    const int sc = c - offset_x;
    if (sc < 0 || sc >= stamp.width()) {
      emit(0, static_cast<std::uint64_t>(height));
      continue;
    }
    emit(0, static_cast<std::uint64_t>(r_lo));
    for (int r = r_lo; r < r_hi; ++r) emit(stamp.at(r - offset_y, sc) ? 1 : 0, 1);
    emit(0, static_cast<std::uint64_t>(height - r_hi));
  }
  rle.counts.push_back(static_cast<std::uint32_t>(run));
  return rle;
}

BinaryMask rle_decode(const RleMask& rle) {
  if (rle.height < 0 || rle.width < 0) {
    throw Error(ErrorKind::InvalidDimensions, "negative RLE size");
  }
  const std::uint64_t total =
      static_cast<std::uint64_t>(rle.height) * static_cast<std::uint64_t>(rle.width);
  std::uint64_t sum = 0;
  for (auto c : rle.counts) sum += c;
  if (sum != total) {
    throw Error(ErrorKind::CountSumMismatch, "RLE counts sum to " + std::to_string(sum) +
                                                 ", expected " + std::to_string(total));
  }
  BinaryMask mask(rle.height, rle.width);
  std::uint64_t offset = 0;
  bool foreground = false;
  const auto h = static_cast<std::uint64_t>(rle.height);
  for (auto run : rle.counts) {
    if (foreground) {
      for (std::uint64_t i = offset; i < offset + run; ++i) {
        mask.set(static_cast<int>(i % h), static_cast<int>(i / h));
      }
    }
    offset += run;
    foreground = !foreground;
  }
  return mask;
}

RleMask rle_from_compressed(std::string_view counts, int height, int width) {
  RleMask rle{height, width, {}};
  std::vector<std::int64_t> values;
  std::size_t p = 0;
  while (p < counts.size()) {
    std::int64_t x = 0;
    int k = 0;
    bool more = true;
    while (more) {
      if (p >= counts.size()) {
        throw Error(ErrorKind::MalformedAnnotation, "truncated compressed RLE string");
      }
      const std::int64_t c = static_cast<std::int64_t>(counts[p]) - 48;
      x |= (c & 0x1f) << (5 * k);
      more = (c & 0x20) != 0;
      ++p;
      ++k;
      if (!more && (c & 0x10) != 0) x |= -(std::int64_t{1} << (5 * k));
    }
    if (values.size() > 2) x += values[values.size() - 2];
    if (x < 0) throw Error(ErrorKind::MalformedAnnotation, "negative run in compressed RLE");
    values.push_back(x);
  }
  rle.counts.reserve(values.size());
  for (auto v : values) rle.counts.push_back(static_cast<std::uint32_t>(v));
  return rle;
}

BinaryMask rasterize_polygons(const PolygonSet& polygons, int height, int width) {
  BinaryMask mask(height, width);
  std::vector<double> crossings;
  for (const auto& poly : polygons) {
    if (poly.size() < 3) {
      throw Error(ErrorKind::DegeneratePolygon,
                  "polygon with " + std::to_string(poly.size()) + " vertices");
    }
    const std::size_t n = poly.size();
    for (int r = 0; r < height; ++r) {
      const double y = r + 0.5;
      crossings.clear();
      for (std::size_t i = 0, j = n - 1; i < n; j = i++) {
        const Point& a = poly[i];
        const Point& b = poly[j];
        if ((a.y > y) != (b.y > y)) {
          crossings.push_back(a.x + (y - a.y) * (b.x - a.x) / (b.y - a.y));
        }
      }
      std::sort(crossings.begin(), crossings.end());
      // Centre px is inside iff an odd number of crossings lie at or left of
      // it, i.e. px falls in some [x_2k, x_2k+1).
      for (std::size_t k = 0; k + 1 < crossings.size(); k += 2) {
        const double lo = std::ceil(crossings[k] - 0.5);
        const double hi = std::ceil(crossings[k + 1] - 0.5);
        const int c0 = static_cast<int>(std::clamp(lo, 0.0, static_cast<double>(width)));
        const int c1 = static_cast<int>(std::clamp(hi, 0.0, static_cast<double>(width)));
        for (int c = c0; c < c1; ++c) mask.set(r, c);
      }
    }
  }
  return mask;
}

ComponentSet connected_components(const BinaryMask& mask, Connectivity connectivity) {
  ComponentSet out;
  out.height = mask.height();
  out.width = mask.width();
  out.labels.assign(mask.size(), 0);
  const int h = mask.height();
  const int w = mask.width();
  const bool eight = connectivity == Connectivity::Eight;
  std::vector<std::int32_t> stack;
  for (int r = 0; r < h; ++r) {
    for (int c = 0; c < w; ++c) {
      const std::int32_t idx = r * w + c;
      if (!mask.at(r, c) || out.labels[idx] != 0) continue;
      const std::int32_t label = ++out.count;
      std::int64_t size = 0;
      out.labels[idx] = label;
      stack.push_back(idx);
      while (!stack.empty()) {
        const std::int32_t cur = stack.back();
        stack.pop_back();
        ++size;
        const int cr = cur / w;
        const int cc = cur % w;
        for (int dr = -1; dr <= 1; ++dr) {
          for (int dc = -1; dc <= 1; ++dc) {
            if (dr == 0 && dc == 0) continue;
            if (!eight && dr != 0 && dc != 0) continue;
            const int nr = cr + dr;
            const int nc = cc + dc;
            if (nr < 0 || nr >= h || nc < 0 || nc >= w) continue;
            const std::int32_t nidx = nr * w + nc;
            if (!mask.at(nr, nc) || out.labels[nidx] != 0) continue;
            out.labels[nidx] = label;
            stack.push_back(nidx);
          }
        }
      }
      out.component_sizes.push_back(size);
    }
  }
  return out;
}

BinaryMask component_mask(const ComponentSet& components, std::int32_t label) {
  BinaryMask out(components.height, components.width);
  auto bits = out.bits();
  for (std::size_t i = 0; i < components.labels.size(); ++i) {
    bits[i] = components.labels[i] == label ? 1 : 0;
  }
  return out;
}

std::int64_t intersection_count(const BinaryMask& a, const BinaryMask& b) {
  require_same_shape(a, b, "intersection");
  std::int64_t n = 0;
  const auto ab = a.bits();
  const auto bb = b.bits();
  for (std::size_t i = 0; i < ab.size(); ++i) n += ab[i] & bb[i];
  return n;
}

std::int64_t union_count(const BinaryMask& a, const BinaryMask& b) {
  require_same_shape(a, b, "union");
  std::int64_t n = 0;
  const auto ab = a.bits();
  const auto bb = b.bits();
  for (std::size_t i = 0; i < ab.size(); ++i) n += ab[i] | bb[i];
  return n;
}

double iou(const BinaryMask& a, const BinaryMask& b) {
  require_same_shape(a, b, "iou");
  std::int64_t inter = 0;
  std::int64_t uni = 0;
  const auto ab = a.bits();
  const auto bb = b.bits();
  for (std::size_t i = 0; i < ab.size(); ++i) {
    inter += ab[i] & bb[i];
    uni += ab[i] | bb[i];
  }
  return uni == 0 ? 0.0 : static_cast<double>(inter) / static_cast<double>(uni);
}

BinaryMask subtract(const BinaryMask& base, const BinaryMask& overlay) {
  require_same_shape(base, overlay, "subtract");
  BinaryMask out = base;
  auto ob = out.bits();
  const auto vb = overlay.bits();
  for (std::size_t i = 0; i < ob.size(); ++i) ob[i] &= static_cast<std::uint8_t>(vb[i] ^ 1);
  return out;
}

BinaryMask intersect(const BinaryMask& a, const BinaryMask& b) {
  require_same_shape(a, b, "intersect");
  BinaryMask out = a;
  auto ob = out.bits();
  const auto bb = b.bits();
  for (std::size_t i = 0; i < ob.size(); ++i) ob[i] &= bb[i];
  return out;
}

BinaryMask paste_mask(const BinaryMask& canvas, const BinaryMask& stamp, int offset_x,
                      int offset_y) {
  BinaryMask out = canvas;
  const int r0 = std::max(0, -offset_y);
  const int r1 = std::min(stamp.height(), canvas.height() - offset_y);
  const int c0 = std::max(0, -offset_x);
  const int c1 = std::min(stamp.width(), canvas.width() - offset_x);
  for (int r = r0; r < r1; ++r) {
    for (int c = c0; c < c1; ++c) {
      if (stamp.at(r, c)) out.set(r + offset_y, c + offset_x);
    }
  }
  return out;
}

}  // namespace occaug
