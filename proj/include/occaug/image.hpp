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

#include <filesystem>

#include <opencv2/core.hpp>

#include "occaug/mask.hpp"

namespace occaug {

/// 8-bit, 3-channel raster in R, G, B channel order (CV_8UC3).
using RgbImage = cv::Mat;

/// Reads PNG or JPEG; grayscale is promoted and alpha dropped.
/// Throws MissingFile or IoFailure.
RgbImage load_image(const std::filesystem::path& path);

/// Writes PNG (or JPEG, by extension). Throws IoFailure.
void save_image(const RgbImage& image, const std::filesystem::path& path);

/// Single-channel 1-bit PNG.
void save_mask_png(const BinaryMask& mask, const std::filesystem::path& path);
BinaryMask load_mask_png(const std::filesystem::path& path);

/// CV_8UC1 with 0/255 values.
cv::Mat to_mat(const BinaryMask& mask);
/// Any nonzero pixel of a CV_8UC1 matrix is foreground.
BinaryMask from_mat(const cv::Mat& mat);

bool images_equal(const RgbImage& a, const RgbImage& b);

}  // namespace occaug
