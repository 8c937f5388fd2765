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
#include <map>
#include <optional>
#include <string>
#include <string_view>

#include "occaug/augment.hpp"
#include "occaug/court.hpp"
#include "occaug/metric.hpp"

namespace occaug {

/// Everything a command can be configured with. Flags given on the command
/// line override values loaded from a file.
struct ToolConfig {
  AugmentationConfig augmentation;
  DetectorConfig detector;
  MetricOptions metric;
  unsigned jobs = 0;  // 0: hardware concurrency
  std::optional<std::filesystem::path> annotations;
  std::optional<std::filesystem::path> images;
  std::optional<std::filesystem::path> bank;
  std::optional<std::filesystem::path> out;
  std::optional<std::filesystem::path> side_map;
};

/// Splits `key = value` lines into raw value texts. `[section]` headers and
/// `#` comments are accepted and ignored; keys must be unique across the
/// file. Throws InvalidConfig.
std::map<std::string, std::string> parse_config_text(std::string_view text);

/// Applies raw key/value texts. Unknown keys and unparsable values throw
/// InvalidConfig naming the key.
void apply_config_map(ToolConfig& config, const std::map<std::string, std::string>& values);

void load_config_file(ToolConfig& config, const std::filesystem::path& path);

/// Parses "WxH".
std::optional<Size2> parse_size(std::string_view text);

}  // namespace occaug
