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

#include "occaug/court.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>

#include <opencv2/imgproc.hpp>

#include "occaug/error.hpp"

namespace occaug {
namespace {

constexpr int kHueBins = 180;
constexpr int kHueSmoothRadius = 3;
constexpr double kLineAngleTolerance = 3.0 * std::numbers::pi / 180.0;
constexpr double kParallelSine = 0.087;  // sin(5 deg)

int hue_distance(int a, int b) {
  const int d = std::abs(a - b) % kHueBins;
  return std::min(d, kHueBins - d);
}

struct NormalLine {
  double theta = 0.0;  // [0, pi)
  double rho = 0.0;
};

NormalLine line_through(const cv::Point2d& a, const cv::Point2d& b) {
  const cv::Point2d d = b - a;
  const double len = std::hypot(d.x, d.y);
  const cv::Point2d n(-d.y / len, d.x / len);
  double theta = std::atan2(n.y, n.x);
  double rho = n.x * a.x + n.y * a.y;
  if (theta < 0.0) {
    theta += std::numbers::pi;
    rho = -rho;
  }
  if (theta >= std::numbers::pi) {
    theta -= std::numbers::pi;
    rho = -rho;
  }
  return {theta, rho};
}

// Hough lines share the (theta in [0, pi), rho) convention; a line near
// theta = 0 and one near theta = pi describe the same direction with the
// sign of rho flipped.
bool lines_match(const NormalLine& edge, const NormalLine& hough, double rho_tolerance) {
  const double dt = std::abs(edge.theta - hough.theta);
  if (dt <= kLineAngleTolerance) return std::abs(edge.rho - hough.rho) <= rho_tolerance;
  if (dt >= std::numbers::pi - kLineAngleTolerance) {
    return std::abs(edge.rho + hough.rho) <= rho_tolerance;
  }
  return false;
}

std::optional<cv::Point2d> intersect(const NormalLine& a, const NormalLine& b) {
  const double det = std::cos(a.theta) * std::sin(b.theta) - std::sin(a.theta) * std::cos(b.theta);
  if (std::abs(det) < kParallelSine) return std::nullopt;
  const double x = (a.rho * std::sin(b.theta) - b.rho * std::sin(a.theta)) / det;
  const double y = (b.rho * std::cos(a.theta) - a.rho * std::cos(b.theta)) / det;
  return cv::Point2d(x, y);
}

double polygon_area(const std::vector<PixelPoint>& poly) {
  double twice = 0.0;
  for (std::size_t i = 0, j = poly.size() - 1; i < poly.size(); j = i++) {
    twice += static_cast<double>(poly[j].x) * poly[i].y - static_cast<double>(poly[i].x) * poly[j].y;
  }
  return std::abs(twice) * 0.5;
}

PolygonSet as_polygon_set(const std::vector<PixelPoint>& poly) {
  Polygon out;
  out.reserve(poly.size());
  for (const auto& p : poly) out.push_back({static_cast<double>(p.x), static_cast<double>(p.y)});
  return {out};
}

}  // namespace

bool ColorBand::contains(int hue, int saturation, int value) const {
  return saturation >= saturation_min && value >= value_min &&
         hue_distance(hue, hue_center) <= hue_tolerance;
}

std::string_view to_string(DetectionStage stage) {
  switch (stage) {
    case DetectionStage::Color: return "color";
    case DetectionStage::Contour: return "contour";
    case DetectionStage::Area: return "area";
    case DetectionStage::Hough: return "hough";
  }
  return "unknown";
}

std::string_view to_string(CourtSide side) {
  switch (side) {
    case CourtSide::Left: return "left";
    case CourtSide::Right: return "right";
    case CourtSide::Unknown: return "unknown";
  }
  return "unknown";
}

std::optional<CourtSide> parse_court_side(std::string_view text) {
  if (text == "left") return CourtSide::Left;
  if (text == "right") return CourtSide::Right;
  if (text == "unknown") return CourtSide::Unknown;
  return std::nullopt;
}

ColorBand dominant_court_color(const RgbImage& image, const DetectorConfig& config) {
  ColorBand band;
  band.hue_tolerance = config.hue_tolerance;
  band.saturation_min = config.saturation_floor;
  band.value_min = config.value_floor;
  if (image.empty()) return band;

  cv::Mat hsv;
  cv::cvtColor(image, hsv, cv::COLOR_RGB2HSV);
  cv::Rect centre(0, 0, hsv.cols, hsv.rows);
  if (hsv.cols >= 3 && hsv.rows >= 3) {
    centre = cv::Rect(hsv.cols / 3, hsv.rows / 3, hsv.cols - 2 * (hsv.cols / 3),
                      hsv.rows - 2 * (hsv.rows / 3));
  }

  std::array<std::int64_t, kHueBins> saturated{};
  std::array<std::int64_t, kHueBins> all{};
  std::int64_t saturated_total = 0;
  std::int64_t total = 0;
  for (int r = centre.y; r < centre.y + centre.height; ++r) {
    const auto* row = hsv.ptr<cv::Vec3b>(r);
    for (int c = centre.x; c < centre.x + centre.width; ++c) {
      const auto& px = row[c];
      ++all[px[0]];
      ++total;
      if (px[1] >= config.saturation_floor && px[2] >= config.value_floor) {
        ++saturated[px[0]];
        ++saturated_total;
      }
    }
  }
  const auto& hist = saturated_total > 0 ? saturated : all;
  std::int64_t best = -1;
  for (int h = 0; h < kHueBins; ++h) {
    std::int64_t window = 0;
    for (int d = -kHueSmoothRadius; d <= kHueSmoothRadius; ++d) {
      window += hist[(h + d + kHueBins) % kHueBins];
    }
    if (window > best) {
      best = window;
      band.hue_center = h;
    }
  }
  std::int64_t in_band = 0;
  for (int r = centre.y; r < centre.y + centre.height; ++r) {
    const auto* row = hsv.ptr<cv::Vec3b>(r);
    for (int c = centre.x; c < centre.x + centre.width; ++c) {
      if (band.contains(row[c][0], row[c][1], row[c][2])) ++in_band;
    }
  }
  band.reliable = total > 0 && static_cast<double>(in_band) >=
                                   config.reliable_fraction * static_cast<double>(total);
  return band;
}

DetectionResult detect_playable_region(const RgbImage& image, const DetectorConfig& config) {
  if (image.empty()) return DetectionFailure{DetectionStage::Color, "empty image"};
  const int w = image.cols;
  const int h = image.rows;
  const double image_area = static_cast<double>(w) * h;
  const ColorBand band = dominant_court_color(image, config);
  if (!band.reliable) {
    return DetectionFailure{DetectionStage::Contour, "no dominant court colour in the image centre"};
  }

  cv::Mat hsv;
  cv::cvtColor(image, hsv, cv::COLOR_RGB2HSV);
  cv::Mat court(h, w, CV_8UC1, cv::Scalar(0));
  for (int r = 0; r < h; ++r) {
    const auto* src = hsv.ptr<cv::Vec3b>(r);
    auto* dst = court.ptr<std::uint8_t>(r);
    for (int c = 0; c < w; ++c) {
      if (band.contains(src[c][0], src[c][1], src[c][2])) dst[c] = 255;
    }
  }
  if (config.close_kernel > 1) {
    const cv::Mat kernel = cv::getStructuringElement(
        cv::MORPH_RECT, cv::Size(config.close_kernel, config.close_kernel));
    cv::morphologyEx(court, court, cv::MORPH_CLOSE, kernel);
  }

  std::vector<std::vector<cv::Point>> contours;
  cv::findContours(court, contours, cv::RETR_EXTERNAL, cv::CHAIN_APPROX_SIMPLE);
  if (contours.empty()) return DetectionFailure{DetectionStage::Contour, "no court-coloured pixels"};
  std::size_t largest = 0;
  double largest_area = -1.0;
  for (std::size_t i = 0; i < contours.size(); ++i) {
    const double a = cv::contourArea(contours[i]);
    if (a > largest_area) {
      largest_area = a;
      largest = i;
    }
  }

  std::vector<cv::Point> hull;
  cv::convexHull(contours[largest], hull);
  if (hull.size() < 3 || cv::contourArea(hull) < config.region_min_fraction * image_area) {
    return DetectionFailure{DetectionStage::Area, "candidate region below minimum fraction"};
  }

  cv::Mat filled(h, w, CV_8UC1, cv::Scalar(0));
  cv::drawContours(filled, contours, static_cast<int>(largest), cv::Scalar(255), cv::FILLED);
  cv::Mat edges;
  cv::Canny(filled, edges, 50, 150);
  const double diagonal = std::hypot(static_cast<double>(w), static_cast<double>(h));
  const int votes = std::max(1, static_cast<int>(std::lround(config.hough_threshold_fraction * diagonal)));
  std::vector<cv::Vec2f> hough;
  cv::HoughLines(edges, hough, 1.0, std::numbers::pi / 180.0, votes);

  std::vector<cv::Point> simplified;
  cv::approxPolyDP(hull, simplified, 0.01 * cv::arcLength(hull, true), true);
  if (simplified.size() < 3) simplified = hull;

  const std::size_t n = simplified.size();
  const double rho_tolerance = std::max(4.0, 0.015 * diagonal);
  std::vector<NormalLine> edge_lines(n);
  int supported = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const cv::Point2d a = simplified[i];
    const cv::Point2d b = simplified[(i + 1) % n];
    edge_lines[i] = line_through(a, b);
    for (const auto& l : hough) {
      const NormalLine candidate{l[1], l[0]};
      if (lines_match(edge_lines[i], candidate, rho_tolerance)) {
        edge_lines[i] = candidate;
        ++supported;
        break;
      }
    }
  }
  if (supported < 2) {
    return DetectionFailure{DetectionStage::Hough,
                            "only " + std::to_string(supported) + " supporting boundary lines"};
  }

  // Vertex i joins edge i-1 and edge i; refined vertices that wander far from
  // the hull vertex (near-parallel neighbours) keep the original position.
  const double max_shift = std::max(8.0, 0.05 * diagonal);
  std::vector<cv::Point> refined;
  refined.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    const cv::Point2d original = simplified[i];
    cv::Point2d v = original;
    if (auto p = intersect(edge_lines[(i + n - 1) % n], edge_lines[i]);
        p && std::hypot(p->x - original.x, p->y - original.y) <= max_shift) {
      v = *p;
    }
    refined.emplace_back(static_cast<int>(std::lround(std::clamp(v.x, 0.0, static_cast<double>(w)))),
                         static_cast<int>(std::lround(std::clamp(v.y, 0.0, static_cast<double>(h)))));
  }
  std::vector<cv::Point> final_hull;
  cv::convexHull(refined, final_hull);

  PlayableRegion region;
  for (const auto& p : final_hull) region.polygon.push_back({p.x, p.y});
  if (region.polygon.size() < 3 ||
      polygon_area(region.polygon) < config.region_min_fraction * image_area) {
    return DetectionFailure{DetectionStage::Area, "refined region below minimum fraction"};
  }
  region.interior_mask = rasterize_polygons(as_polygon_set(region.polygon), h, w);
  if (!region.interior_mask.any()) {
    return DetectionFailure{DetectionStage::Area, "refined region has no interior pixels"};
  }
  region.supporting_lines = supported;
  const double fill = std::clamp(largest_area / std::max(1.0, cv::contourArea(hull)), 0.0, 1.0);
  region.confidence = std::clamp(static_cast<double>(supported) / n * fill, 0.0, 1.0);
  return region;
}

PlacementBounds fallback_bounds(int width, int height, CourtSide side) {
  if (width <= 0 || height <= 0) {
    throw Error(ErrorKind::InvalidDimensions,
                "fallback bounds need positive size, got " + std::to_string(width) + "x" +
                    std::to_string(height));
  }
  const std::int64_t w = width;
  const std::int64_t h = height;
  // ceil(w/5), floor(4w/5), ceil(3h/10), floor(7h/10) in exact integer form.
  const auto fifth_up = static_cast<int>((w + 4) / 5);
  const auto four_fifths_down = static_cast<int>((4 * w) / 5);
  PlacementBounds b;
  switch (side) {
    case CourtSide::Left:
      b.x_lo = fifth_up;
      b.x_hi = width;
      break;
    case CourtSide::Right:
      b.x_lo = 0;
      b.x_hi = four_fifths_down;
      break;
    case CourtSide::Unknown:
      b.x_lo = fifth_up;
      b.x_hi = four_fifths_down;
      break;
  }
  b.y_lo = static_cast<int>((3 * h + 9) / 10);
  b.y_hi = static_cast<int>((7 * h) / 10);
  if (b.x_lo > b.x_hi || b.y_lo > b.y_hi) {
    throw Error(ErrorKind::InvalidDimensions,
                "no integer anchor satisfies the fallback bounds for " + std::to_string(width) +
                    "x" + std::to_string(height));
  }
  return b;
}

CourtSide infer_court_side(const DetectionResult& detection, int image_width,
                           std::optional<CourtSide> override_side) {
  if (override_side) return *override_side;
  const auto* region = std::get_if<PlayableRegion>(&detection);
  if (region == nullptr || region->polygon.empty()) return CourtSide::Unknown;
  const auto& poly = region->polygon;
  double twice_area = 0.0;
  double cx = 0.0;
  for (std::size_t i = 0, j = poly.size() - 1; i < poly.size(); j = i++) {
    const double cross = static_cast<double>(poly[j].x) * poly[i].y -
                         static_cast<double>(poly[i].x) * poly[j].y;
    twice_area += cross;
    cx += (poly[j].x + poly[i].x) * cross;
  }
  if (std::abs(twice_area) > 0.0) {
    cx /= 3.0 * twice_area;
  } else {
    cx = 0.0;
    for (const auto& p : poly) cx += p.x;
    cx /= static_cast<double>(poly.size());
  }
  return 2.0 * cx < static_cast<double>(image_width) ? CourtSide::Left : CourtSide::Right;
}

AnchorSampler::AnchorSampler(const PlacementArea& area) {
  if (const auto* region = std::get_if<PlayableRegion>(&area)) {
    *this = AnchorSampler(*region);
  } else {
    *this = AnchorSampler(std::get<PlacementBounds>(area));
  }
}

AnchorSampler::AnchorSampler(const PlayableRegion& region) {
  const auto& mask = region.interior_mask;
  for (int r = 0; r < mask.height(); ++r) {
    for (int c = 0; c < mask.width(); ++c) {
      if (mask.at(r, c)) pixels_.push_back({c, r});
    }
  }
  if (pixels_.empty()) throw Error(ErrorKind::EmptyRegion, "playable region has no interior pixels");
}

AnchorSampler::AnchorSampler(const PlacementBounds& bounds) : bounds_(bounds) {
  if (bounds.x_lo > bounds.x_hi || bounds.y_lo > bounds.y_hi) {
    throw Error(ErrorKind::EmptyRegion, "placement bounds are empty");
  }
}

Anchor AnchorSampler::operator()(Rng& rng) const {
  if (bounds_) {
    const int x = static_cast<int>(rng.uniform_int(bounds_->x_lo, bounds_->x_hi));
    const int y = static_cast<int>(rng.uniform_int(bounds_->y_lo, bounds_->y_hi));
    return {x, y};
  }
  return pixels_[static_cast<std::size_t>(
      rng.uniform_int(0, static_cast<std::int64_t>(pixels_.size()) - 1))];
}

Anchor sample_anchor(const PlayableRegion& region, Rng& rng) { return AnchorSampler(region)(rng); }

Anchor sample_anchor(const PlacementBounds& bounds, Rng& rng) { return AnchorSampler(bounds)(rng); }

RgbImage draw_region_overlay(const RgbImage& image, const DetectionResult& detection) {
  RgbImage out = image.clone();
  if (const auto* region = std::get_if<PlayableRegion>(&detection)) {
    std::vector<cv::Point> pts;
    for (const auto& p : region->polygon) pts.emplace_back(p.x, p.y);
    cv::polylines(out, std::vector<std::vector<cv::Point>>{pts}, true, cv::Scalar(0, 255, 0), 2);
  } else {
    cv::rectangle(out, cv::Rect(0, 0, out.cols, out.rows), cv::Scalar(255, 0, 0), 4);
  }
  return out;
}

}  // namespace occaug
