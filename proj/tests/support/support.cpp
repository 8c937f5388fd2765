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

#include "support.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <fstream>
#include <iterator>
#include <numbers>

#include <opencv2/imgproc.hpp>
#include <unistd.h>

namespace occaug::testing {

namespace fs = std::filesystem;

TempDir::TempDir(const std::string& tag) {
  static std::uint64_t counter = 0;
  Rng rng(static_cast<std::uint64_t>(::getpid()) * 1000003ULL + counter++);
  for (int attempt = 0; attempt < 100; ++attempt) {
    const auto candidate =
        fs::temp_directory_path() / (tag + "-" + std::to_string(rng.next_u64() % 1000000000ULL));
    if (fs::create_directories(candidate)) {
      path_ = candidate;
      return;
    }
  }
  throw std::runtime_error("cannot create temp dir");
}

TempDir::~TempDir() {
  std::error_code ec;
  fs::remove_all(path_, ec);
}

BinaryMask random_mask(Rng& rng, int height, int width, double density) {
  BinaryMask m(height, width);
  for (int r = 0; r < height; ++r) {
    for (int c = 0; c < width; ++c) {
      if (rng.bernoulli(density)) m.set(r, c);
    }
  }
  return m;
}

BinaryMask random_blob_mask(Rng& rng, int height, int width, int max_blobs) {
  BinaryMask m(height, width);
  const auto blobs = rng.uniform_int(1, max_blobs);
  for (int b = 0; b < blobs; ++b) {
    const int bw = static_cast<int>(rng.uniform_int(1, std::max(1, width / 3)));
    const int bh = static_cast<int>(rng.uniform_int(1, std::max(1, height / 3)));
    const int x = static_cast<int>(rng.uniform_int(0, width - bw));
    const int y = static_cast<int>(rng.uniform_int(0, height - bh));
    for (int r = y; r < y + bh; ++r) {
      for (int c = x; c < x + bw; ++c) m.set(r, c);
    }
  }
  return m;
}

BinaryMask random_split_mask(Rng& rng, int height, int width) {
  while (true) {
    BinaryMask m(height, width);
    const auto blobs = rng.uniform_int(2, 4);
    for (int b = 0; b < blobs; ++b) {
      const int bw = static_cast<int>(rng.uniform_int(1, std::max(1, width / 4)));
      const int bh = static_cast<int>(rng.uniform_int(1, std::max(1, height / 4)));
      const int x = static_cast<int>(rng.uniform_int(0, width - bw));
      const int y = static_cast<int>(rng.uniform_int(0, height - bh));
      for (int r = y; r < y + bh; ++r) {
        for (int c = x; c < x + bw; ++c) m.set(r, c);
      }
    }
    if (oracle::flood_labels(m, 4).count >= 2) return m;
  }
}

bool same_file_contents(const fs::path& a, const fs::path& b) {
  std::ifstream fa(a, std::ios::binary), fb(b, std::ios::binary);
  if (!fa || !fb) return false;
  const std::string sa((std::istreambuf_iterator<char>(fa)), std::istreambuf_iterator<char>());
  const std::string sb((std::istreambuf_iterator<char>(fb)), std::istreambuf_iterator<char>());
  return sa == sb;
}

std::vector<std::string> list_tree(const fs::path& root) {
  std::vector<std::string> out;
  for (const auto& e : fs::recursive_directory_iterator(root)) {
    if (e.is_regular_file()) out.push_back(fs::relative(e.path(), root).generic_string());
  }
  std::sort(out.begin(), out.end());
  return out;
}

namespace oracle {

Labels flood_labels(const BinaryMask& mask, int connectivity) {
  const int h = mask.height();
  const int w = mask.width();
  Labels out;
  out.label.assign(static_cast<std::size_t>(h) * w, 0);
  std::vector<std::pair<int, int>> offsets{{-1, 0}, {1, 0}, {0, -1}, {0, 1}};
  if (connectivity == 8) {
    offsets.insert(offsets.end(), {{-1, -1}, {-1, 1}, {1, -1}, {1, 1}});
  }
  for (int r = 0; r < h; ++r) {
    for (int c = 0; c < w; ++c) {
      if (!mask.at(r, c) || out.label[r * w + c] != 0) continue;
      const int id = ++out.count;
      long size = 0;
      std::deque<std::pair<int, int>> queue{{r, c}};
      out.label[r * w + c] = id;
      while (!queue.empty()) {
        const auto [y, x] = queue.front();
        queue.pop_front();
        ++size;
        for (const auto& [dy, dx] : offsets) {
          const int ny = y + dy, nx = x + dx;
          if (ny < 0 || ny >= h || nx < 0 || nx >= w) continue;
          if (!mask.at(ny, nx) || out.label[ny * w + nx] != 0) continue;
          out.label[ny * w + nx] = id;
          queue.emplace_back(ny, nx);
        }
      }
      out.sizes.push_back(size);
    }
  }
  return out;
}

std::vector<std::uint32_t> naive_rle(const BinaryMask& mask) {
  std::vector<bool> seq;
  for (int c = 0; c < mask.width(); ++c) {
    for (int r = 0; r < mask.height(); ++r) seq.push_back(mask.at(r, c));
  }
  std::vector<std::uint32_t> runs;
  bool current = false;
  std::uint32_t run = 0;
  for (bool v : seq) {
    if (v != current) {
      runs.push_back(run);
      run = 0;
      current = v;
    }
    ++run;
  }
  runs.push_back(run);
  return runs;
}

BinaryMask point_in_polygon_mask(const PolygonSet& polygons, int height, int width) {
  BinaryMask out(height, width);
  for (int r = 0; r < height; ++r) {
    for (int c = 0; c < width; ++c) {
      const double px = c + 0.5, py = r + 0.5;
      for (const auto& poly : polygons) {
        bool inside = false;
        const std::size_t n = poly.size();
        for (std::size_t i = 0, j = n - 1; i < n; j = i++) {
          const Point& a = poly[i];
          const Point& b = poly[j];
          if ((a.y > py) != (b.y > py) && px < (b.x - a.x) * (py - a.y) / (b.y - a.y) + a.x) {
            inside = !inside;
          }
        }
        if (inside) {
          out.set(r, c);
          break;
        }
      }
    }
  }
  return out;
}

OmOutcome brute_force_om(const std::vector<InstanceMask>& gt,
                         const std::vector<InstanceMask>& predictions,
                         const std::vector<std::int64_t>& image_ids, int connectivity,
                         double iou_threshold) {
  OmOutcome out;
  long dpr_num = 0, dpr_den = 0;
  for (auto image_id : image_ids) {
    struct Split {
      std::int64_t id;
      const BinaryMask* mask;
      std::vector<bool> disconnected;
      long disconnected_count = 0;
    };
    std::vector<Split> split;
    for (const auto& g : gt) {
      if (g.image_id != image_id) continue;
      const Labels labels = flood_labels(g.mask, connectivity);
      if (labels.count < 2) continue;
      int main = 1;
      for (int k = 2; k <= labels.count; ++k) {
        if (labels.sizes[k - 1] > labels.sizes[main - 1]) main = k;
      }
      Split s{g.id, &g.mask, std::vector<bool>(labels.label.size(), false)};
      for (std::size_t p = 0; p < labels.label.size(); ++p) {
        if (labels.label[p] != 0 && labels.label[p] != main) {
          s.disconnected[p] = true;
          ++s.disconnected_count;
        }
      }
      split.push_back(std::move(s));
    }
    std::vector<const InstanceMask*> preds;
    for (const auto& p : predictions) {
      if (p.image_id == image_id) preds.push_back(&p);
    }
    struct Pair {
      std::size_t g, p;
      long inter, uni;
    };
    std::vector<Pair> pairs;
    for (std::size_t i = 0; i < split.size(); ++i) {
      for (std::size_t j = 0; j < preds.size(); ++j) {
        long inter = 0, uni = 0;
        const auto a = split[i].mask->bits();
        const auto b = preds[j]->mask.bits();
        for (std::size_t k = 0; k < a.size(); ++k) {
          inter += (a[k] && b[k]) ? 1 : 0;
          uni += (a[k] || b[k]) ? 1 : 0;
        }
        if (inter > 0 && static_cast<double>(inter) >= iou_threshold * static_cast<double>(uni)) {
          pairs.push_back({i, j, inter, uni});
        }
      }
    }
    std::vector<bool> g_used(split.size(), false), p_used(preds.size(), false);
    std::vector<long> recalled(split.size(), -1);
    while (true) {
      const Pair* best = nullptr;
      for (const auto& pr : pairs) {
        if (g_used[pr.g] || p_used[pr.p]) continue;
        if (best == nullptr) {
          best = &pr;
          continue;
        }
        const long lhs = pr.inter * best->uni;
        const long rhs = best->inter * pr.uni;
        const bool better =
            lhs > rhs ||
            (lhs == rhs && (split[pr.g].id < split[best->g].id ||
                            (split[pr.g].id == split[best->g].id && preds[pr.p]->id < preds[best->p]->id)));
        if (better) best = &pr;
      }
      if (best == nullptr) break;
      g_used[best->g] = true;
      p_used[best->p] = true;
      long hit = 0;
      const auto pm = preds[best->p]->mask.bits();
      for (std::size_t k = 0; k < pm.size(); ++k) {
        if (split[best->g].disconnected[k] && pm[k]) ++hit;
      }
      recalled[best->g] = hit;
    }
    for (std::size_t i = 0; i < split.size(); ++i) {
      ++out.split;
      if (recalled[i] >= 0) {
        ++out.recalled;
        dpr_num += recalled[i];
        dpr_den += split[i].disconnected_count;
      }
    }
  }
  out.oir = out.split == 0 ? 1.0 : static_cast<double>(out.recalled) / static_cast<double>(out.split);
  out.dpr = dpr_den == 0 ? 1.0 : static_cast<double>(dpr_num) / static_cast<double>(dpr_den);
  out.om = out.oir * out.dpr;
  return out;
}

}  // namespace oracle

DatasetBundle bundle_from_masks(const std::vector<oracle::InstanceMask>& masks,
                                const std::vector<ImageRecord>& images) {
  DatasetBundle b;
  b.images = images;
  b.categories = {{1, "person"}};
  for (const auto& m : masks) {
    InstanceAnnotation a;
    a.id = m.id;
    a.image_id = m.image_id;
    a.category_id = 1;
    a.segmentation = rle_encode(m.mask);
    refresh_derived_fields(a, m.mask);
    b.annotations.push_back(std::move(a));
  }
  return b;
}

Scene random_scene(Rng& rng, int max_side, int max_instances) {
  Scene s;
  std::vector<ImageRecord> images;
  const auto n_images = rng.uniform_int(1, 2);
  std::int64_t next_gt = 1, next_pred = 1;
  for (std::int64_t i = 1; i <= n_images; ++i) {
    const int w = static_cast<int>(rng.uniform_int(8, max_side));
    const int h = static_cast<int>(rng.uniform_int(8, max_side));
    images.push_back({i, "img" + std::to_string(i) + ".png", w, h});
    s.image_ids.push_back(i);
    const auto n_gt = rng.uniform_int(1, max_instances);
    for (int k = 0; k < n_gt; ++k) {
      s.gt_masks.push_back({next_gt++, i, random_split_mask(rng, h, w)});
    }
    const std::size_t first = s.gt_masks.size() - static_cast<std::size_t>(n_gt);
    const auto n_pred = rng.uniform_int(0, max_instances + 1);
    for (int k = 0; k < n_pred; ++k) {
      BinaryMask m(h, w);
      const int mode = static_cast<int>(rng.uniform_int(0, 3));
      if (mode == 3) {
        m = random_blob_mask(rng, h, w, 3);
      } else {
        const auto& src = s.gt_masks[first + static_cast<std::size_t>(rng.uniform_int(0, n_gt - 1))].mask;
        const double flip = mode == 0 ? 0.0 : mode == 1 ? 0.05 : 0.3;
        std::vector<std::uint8_t> bits(src.bits().begin(), src.bits().end());
        for (auto& b : bits) {
          if (rng.bernoulli(flip)) b ^= 1;
        }
        m = BinaryMask(h, w, std::move(bits));
      }
      s.prediction_masks.push_back({next_pred++, i, std::move(m)});
    }
  }
  s.gt = bundle_from_masks(s.gt_masks, images);
  s.predictions = bundle_from_masks(s.prediction_masks, images);
  return s;
}

namespace {

cv::Vec3b hsv_to_rgb(int h, int s, int v) {
  cv::Mat px(1, 1, CV_8UC3, cv::Scalar(h, s, v));
  cv::cvtColor(px, px, cv::COLOR_HSV2RGB);
  return px.at<cv::Vec3b>(0, 0);
}

int hue_gap(int a, int b) {
  const int d = std::abs(a - b) % 180;
  return std::min(d, 180 - d);
}

cv::Vec3b crowd_colour(Rng& rng, int court_hue) {
  if (rng.bernoulli(0.5)) {
    const auto g = static_cast<std::uint8_t>(rng.uniform_int(20, 200));
    return {g, g, g};
  }
  int hue = 0;
  do {
    hue = static_cast<int>(rng.uniform_int(0, 179));
  } while (hue_gap(hue, court_hue) < 35);
  return hsv_to_rgb(hue, static_cast<int>(rng.uniform_int(60, 255)),
                    static_cast<int>(rng.uniform_int(60, 255)));
}

std::vector<cv::Point> to_cv(const Polygon& poly) {
  std::vector<cv::Point> out;
  for (const auto& p : poly) out.emplace_back(static_cast<int>(std::lround(p.x)), static_cast<int>(std::lround(p.y)));
  return out;
}

Polygon player_outline(Rng& rng, double cx, double cy, double pw, double ph) {
  Polygon poly;
  for (int k = 0; k < 10; ++k) {
    const double t = 2.0 * std::numbers::pi * k / 10.0;
    const double jitter = rng.uniform_real(0.85, 1.0);
    poly.push_back({cx + 0.5 * pw * jitter * std::cos(t), cy + 0.5 * ph * jitter * std::sin(t)});
  }
  return poly;
}

}  // namespace

CourtRender render_court(Rng& rng, const CourtRenderOptions& o) {
  const int w = o.width, h = o.height;
  CourtRender out;
  out.court_hue = static_cast<int>(rng.uniform_int(8, 25));
  RgbImage img(h, w, CV_8UC3);
  constexpr int kBlock = 8;
  for (int by = 0; by < h; by += kBlock) {
    for (int bx = 0; bx < w; bx += kBlock) {
      const cv::Vec3b colour = crowd_colour(rng, out.court_hue);
      img(cv::Rect(bx, by, std::min(kBlock, w - bx), std::min(kBlock, h - by))).setTo(cv::Scalar(colour[0], colour[1], colour[2]));
    }
  }

  const double shift = rng.uniform_real(-0.08, 0.08) * w;
  const double top = rng.uniform_real(0.30, 0.42) * h;
  const double bottom = rng.uniform_real(0.86, 0.95) * h;
  Polygon court{{rng.uniform_real(0.16, 0.28) * w + shift, top},
                {rng.uniform_real(0.72, 0.84) * w + shift, top},
                {rng.uniform_real(0.92, 0.99) * w + shift, bottom},
                {rng.uniform_real(0.01, 0.08) * w + shift, bottom}};
  if (o.court_scale != 1.0) {
    double cx = 0, cy = 0;
    for (const auto& p : court) {
      cx += p.x / 4.0;
      cy += p.y / 4.0;
    }
    for (auto& p : court) {
      p.x = cx + (p.x - cx) * o.court_scale;
      p.y = cy + (p.y - cy) * o.court_scale;
    }
  }
  for (auto& p : court) p.x = std::clamp(p.x, 0.0, static_cast<double>(w));
  out.court = court;
  out.court_mask = oracle::point_in_polygon_mask({court}, h, w);

  const int sat = static_cast<int>(rng.uniform_int(140, 220));
  const int val = static_cast<int>(rng.uniform_int(150, 230));
  const cv::Vec3b floor = hsv_to_rgb(out.court_hue, sat, val);
  for (int r = 0; r < h; ++r) {
    for (int c = 0; c < w; ++c) {
      if (!out.court_mask.at(r, c)) continue;
      auto& px = img.at<cv::Vec3b>(r, c);
      for (int k = 0; k < 3; ++k) {
        px[k] = cv::saturate_cast<std::uint8_t>(floor[k] + static_cast<int>(rng.uniform_int(-8, 8)));
      }
    }
  }

  // Painted lines: a centre line and a key.
  const double scale = o.court_scale;
  const cv::Scalar white(245, 245, 245);
  const double mid_x = (court[0].x + court[1].x + court[2].x + court[3].x) / 4.0;
  cv::line(img, {static_cast<int>(mid_x), static_cast<int>(top + 4)},
           {static_cast<int>(mid_x), static_cast<int>(bottom - 4)}, white, 2);
  cv::circle(img, {static_cast<int>(mid_x), static_cast<int>((top + bottom) / 2)},
             static_cast<int>(0.08 * h * scale) + 1, white, 2);

  for (int k = 0; k < o.players; ++k) {
    const double pw = rng.uniform_real(0.025, 0.045) * w;
    const double ph = rng.uniform_real(0.10, 0.16) * h;
    const double cx = rng.uniform_real(0.1, 0.9) * w;
    const double cy = rng.uniform_real(top, bottom);
    const cv::Vec3b colour = crowd_colour(rng, out.court_hue);
    const Polygon outline = player_outline(rng, cx, cy, pw, ph);
    cv::fillPoly(img, std::vector<std::vector<cv::Point>>{to_cv(outline)},
                 cv::Scalar(colour[0], colour[1], colour[2]));
  }
  out.image = img;
  return out;
}

DatasetBundle write_synthetic_dataset(const fs::path& dir, Rng& rng, int count, int width,
                                      int height) {
  fs::create_directories(dir / "images");
  DatasetBundle bundle;
  bundle.categories = {{1, "player"}, {2, "referee"}};
  std::int64_t next_ann = 1;
  for (int i = 1; i <= count; ++i) {
    CourtRenderOptions opts;
    opts.width = width;
    opts.height = height;
    opts.players = 0;
    CourtRender court = render_court(rng, opts);
    const std::string name = "frame_" + std::to_string(i) + ".png";
    bundle.images.push_back({i, name, width, height});
    const auto players = rng.uniform_int(2, 5);
    for (int k = 0; k < players; ++k) {
      const double pw = rng.uniform_real(0.04, 0.07) * width;
      const double ph = rng.uniform_real(0.15, 0.25) * height;
      const double cx = rng.uniform_real(0.15, 0.85) * width;
      const double cy = rng.uniform_real(0.45, 0.8) * height;
      const Polygon outline = player_outline(rng, cx, cy, pw, ph);
      const cv::Vec3b colour = crowd_colour(rng, court.court_hue);
      const BinaryMask mask = rasterize_polygons({outline}, height, width);
      for (int r = 0; r < height; ++r) {
        for (int c = 0; c < width; ++c) {
          if (mask.at(r, c)) court.image.at<cv::Vec3b>(r, c) = colour;
        }
      }
      InstanceAnnotation a;
      a.id = next_ann++;
      a.image_id = i;
      a.category_id = rng.bernoulli(0.8) ? 1 : 2;
      a.segmentation = PolygonSet{outline};
      refresh_derived_fields(a, mask);
      bundle.annotations.push_back(std::move(a));
    }
    save_image(court.image, dir / "images" / name);
  }
  save_dataset(bundle, dir / "annotations.json", dir / "images");
  return bundle;
}

Checkpoint random_checkpoint(Rng& rng, int tensors) {
  Checkpoint c;
  for (int t = 0; t < tensors; ++t) {
    Tensor tensor;
    const auto rank = rng.uniform_int(0, 3);
    std::size_t n = 1;
    for (int d = 0; d < rank; ++d) {
      const auto dim = static_cast<std::uint64_t>(rng.uniform_int(1, 6));
      tensor.shape.push_back(dim);
      n *= dim;
    }
    if (rng.bernoulli(0.5)) {
      std::vector<float> v(n);
      for (auto& x : v) x = static_cast<float>(rng.uniform_real(-4.0, 4.0));
      tensor.data = std::move(v);
    } else {
      std::vector<double> v(n);
      for (auto& x : v) x = rng.uniform_real(-4.0, 4.0);
      tensor.data = std::move(v);
    }
    c.emplace("layer" + std::to_string(t) + ".weight", std::move(tensor));
  }
  return c;
}

EntityBank make_test_bank(Rng& rng, int entries) {
  EntityBank bank;
  for (int i = 0; i < entries; ++i) {
    EntityRecord e;
    const int w = static_cast<int>(rng.uniform_int(6, 24));
    const int h = static_cast<int>(rng.uniform_int(12, 40));
    e.source_image_id = 1;
    e.source_annotation_id = i + 1;
    e.category_id = 1 + (i % 2);
    e.crop = RgbImage(h, w, CV_8UC3,
                      cv::Scalar(static_cast<double>(rng.uniform_int(0, 255)),
                                 static_cast<double>(rng.uniform_int(0, 255)),
                                 static_cast<double>(rng.uniform_int(0, 255))));
    e.mask = BinaryMask(h, w);
    // Ellipse-ish silhouette touching all four sides.
    for (int r = 0; r < h; ++r) {
      for (int c = 0; c < w; ++c) {
        const double dx = (c + 0.5 - w / 2.0) / (w / 2.0);
        const double dy = (r + 0.5 - h / 2.0) / (h / 2.0);
        if (dx * dx + dy * dy <= 1.0 || c == w / 2 || r == h / 2) e.mask.set(r, c);
      }
    }
    bank.entries.push_back(std::move(e));
  }
  return bank;
}

}  // namespace occaug::testing
