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

#include "occaug/image.hpp"

#include <cstring>
#include <vector>

#include <opencv2/imgcodecs.hpp>
#include <opencv2/imgproc.hpp>

#include "occaug/error.hpp"

namespace occaug {

RgbImage load_image(const std::filesystem::path& path) {
  if (!std::filesystem::is_regular_file(path)) {
    throw Error(ErrorKind::MissingFile, path.string());
  }
  cv::Mat bgr = cv::imread(path.string(), cv::IMREAD_COLOR);
  if (bgr.empty()) throw Error(ErrorKind::IoFailure, "cannot decode image " + path.string());
  RgbImage rgb;
  cv::cvtColor(bgr, rgb, cv::COLOR_BGR2RGB);
  return rgb;
}

void save_image(const RgbImage& image, const std::filesystem::path& path) {
  if (image.type() != CV_8UC3) {
    throw Error(ErrorKind::IoFailure, "save_image expects an 8-bit RGB raster");
  }
  cv::Mat bgr;
  cv::cvtColor(image, bgr, cv::COLOR_RGB2BGR);
  bool ok = false;
  try {
    ok = cv::imwrite(path.string(), bgr);
  } catch (const cv::Exception& e) {
    throw Error(ErrorKind::IoFailure, "cannot write " + path.string() + ": " + e.what());
  }
  if (!ok) throw Error(ErrorKind::IoFailure, "cannot write " + path.string());
}

cv::Mat to_mat(const BinaryMask& mask) {
  cv::Mat out(mask.height(), mask.width(), CV_8UC1);
  const auto bits = mask.bits();
  for (int r = 0; r < mask.height(); ++r) {
    auto* row = out.ptr<std::uint8_t>(r);
    for (int c = 0; c < mask.width(); ++c) {
      row[c] = bits[static_cast<std::size_t>(r) * mask.width() + c] ? 255 : 0;
    }
  }
  return out;
}

BinaryMask from_mat(const cv::Mat& mat) {
  if (mat.type() != CV_8UC1) {
    throw Error(ErrorKind::InvalidDimensions, "mask matrix must be CV_8UC1");
  }
  std::vector<std::uint8_t> bits(static_cast<std::size_t>(mat.rows) * mat.cols);
  for (int r = 0; r < mat.rows; ++r) {
    const auto* row = mat.ptr<std::uint8_t>(r);
    for (int c = 0; c < mat.cols; ++c) {
      bits[static_cast<std::size_t>(r) * mat.cols + c] = row[c] != 0 ? 1 : 0;
    }
  }
  return BinaryMask(mat.rows, mat.cols, std::move(bits));
}

void save_mask_png(const BinaryMask& mask, const std::filesystem::path& path) {
  const std::vector<int> params{cv::IMWRITE_PNG_BILEVEL, 1};
  bool ok = false;
  try {
    ok = cv::imwrite(path.string(), to_mat(mask), params);
  } catch (const cv::Exception& e) {
    throw Error(ErrorKind::IoFailure, "cannot write " + path.string() + ": " + e.what());
  }
  if (!ok) throw Error(ErrorKind::IoFailure, "cannot write " + path.string());
}

BinaryMask load_mask_png(const std::filesystem::path& path) {
  if (!std::filesystem::is_regular_file(path)) {
    throw Error(ErrorKind::MissingFile, path.string());
  }
  cv::Mat gray = cv::imread(path.string(), cv::IMREAD_GRAYSCALE);
  if (gray.empty()) throw Error(ErrorKind::IoFailure, "cannot decode mask " + path.string());
  return from_mat(gray);
}

bool images_equal(const RgbImage& a, const RgbImage& b) {
  if (a.empty() && b.empty()) return true;
  if (a.rows != b.rows || a.cols != b.cols || a.type() != b.type()) return false;
  const std::size_t row_bytes = static_cast<std::size_t>(a.cols) * a.elemSize();
  for (int r = 0; r < a.rows; ++r) {
    if (std::memcmp(a.ptr(r), b.ptr(r), row_bytes) != 0) return false;
  }
  return true;
}

}  // namespace occaug
