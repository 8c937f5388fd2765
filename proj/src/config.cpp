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

#include "occaug/config.hpp"

#include <cctype>
#include <charconv>
#include <fstream>
#include <functional>
#include <limits>
#include <sstream>

#include "occaug/error.hpp"

namespace occaug {
namespace {

std::string_view trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

[[noreturn]] void bad_value(const std::string& key, const std::string& why) {
  throw Error(ErrorKind::InvalidConfig, "key '" + key + "': " + why);
}

std::string strip_comment(std::string_view line) {
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    if (line[i] == '"' && (i == 0 || line[i - 1] != '\\')) quoted = !quoted;
    if (line[i] == '#' && !quoted) return std::string(line.substr(0, i));
  }
  return std::string(line);
}

double as_double(const std::string& key, std::string_view text) {
  text = trim(text);
  double v = 0.0;
  const auto* end = text.data() + text.size();
  const auto [ptr, ec] = std::from_chars(text.data(), end, v);
  if (ec != std::errc() || ptr != end || text.empty()) bad_value(key, "expected a number");
  return v;
}

long long as_int(const std::string& key, std::string_view text) {
  text = trim(text);
  long long v = 0;
  const auto* end = text.data() + text.size();
  const auto [ptr, ec] = std::from_chars(text.data(), end, v);
  if (ec != std::errc() || ptr != end || text.empty()) bad_value(key, "expected an integer");
  return v;
}

int as_int32(const std::string& key, std::string_view text) {
  const long long v = as_int(key, text);
  if (v < std::numeric_limits<int>::min() || v > std::numeric_limits<int>::max()) {
    bad_value(key, "integer out of range");
  }
  return static_cast<int>(v);
}

bool as_bool(const std::string& key, std::string_view text) {
  text = trim(text);
  if (text == "true") return true;
  if (text == "false") return false;
  bad_value(key, "expected true or false");
}

std::string as_string(const std::string& key, std::string_view text) {
  text = trim(text);
  if (text.size() >= 2 && text.front() == '"' && text.back() == '"') {
    std::string out;
    for (std::size_t i = 1; i + 1 < text.size(); ++i) {
      if (text[i] == '\\' && i + 2 < text.size()) {
        ++i;
        out += text[i] == 'n' ? '\n' : text[i] == 't' ? '\t' : text[i];
      } else if (text[i] == '"') {
        bad_value(key, "unescaped quote in string");
      } else {
        out += text[i];
      }
    }
    return out;
  }
  if (text.empty() || text.front() == '"' || text.front() == '[') bad_value(key, "expected a string");
  return std::string(text);
}

// Nested integer arrays, e.g. [[3680, 3080], [3200, 2400]].
struct ArrayParser {
  const std::string& key;
  std::string_view s;
  std::size_t pos = 0;

  void skip_ws() {
    while (pos < s.size() && (s[pos] == ' ' || s[pos] == '\t')) ++pos;
  }

  void expect(char c) {
    skip_ws();
    if (pos >= s.size() || s[pos] != c) bad_value(key, std::string("expected '") + c + "'");
    ++pos;
  }

  bool peek(char c) {
    skip_ws();
    return pos < s.size() && s[pos] == c;
  }

  std::vector<long long> ints() {
    std::vector<long long> out;
    expect('[');
    if (peek(']')) {
      ++pos;
      return out;
    }
    while (true) {
      skip_ws();
      const std::size_t start = pos;
      while (pos < s.size() && (std::isdigit(static_cast<unsigned char>(s[pos])) || s[pos] == '-' || s[pos] == '+')) {
        ++pos;
      }
      out.push_back(as_int(key, s.substr(start, pos - start)));
      if (peek(',')) {
        ++pos;
        if (peek(']')) break;
        continue;
      }
      break;
    }
    expect(']');
    return out;
  }

  std::vector<std::vector<long long>> nested() {
    std::vector<std::vector<long long>> out;
    expect('[');
    if (peek(']')) {
      ++pos;
      return out;
    }
    while (true) {
      out.push_back(ints());
      if (peek(',')) {
        ++pos;
        if (peek(']')) break;
        continue;
      }
      break;
    }
    expect(']');
    return out;
  }

  void finish() {
    skip_ws();
    if (pos != s.size()) bad_value(key, "trailing characters after array");
  }
};

Size2 pair_to_size(const std::string& key, const std::vector<long long>& v) {
  if (v.size() != 2) bad_value(key, "expected [width, height]");
  if (v[0] <= 0 || v[1] <= 0 || v[0] > std::numeric_limits<int>::max() ||
      v[1] > std::numeric_limits<int>::max()) {
    bad_value(key, "sizes must be positive");
  }
  return {static_cast<int>(v[0]), static_cast<int>(v[1])};
}

Size2 as_size(const std::string& key, std::string_view text) {
  text = trim(text);
  if (!text.empty() && text.front() == '[') {
    ArrayParser p{key, text};
    const auto v = p.ints();
    p.finish();
    return pair_to_size(key, v);
  }
  if (auto s = parse_size(as_string(key, text))) return *s;
  bad_value(key, "expected WxH or [width, height]");
}

std::vector<Size2> as_sizes(const std::string& key, std::string_view text) {
  ArrayParser p{key, trim(text)};
  const auto nested = p.nested();
  p.finish();
  std::vector<Size2> out;
  for (const auto& v : nested) out.push_back(pair_to_size(key, v));
  return out;
}

using Setter = std::function<void(ToolConfig&, const std::string&, std::string_view)>;

const std::map<std::string, Setter>& setters() {
  static const std::map<std::string, Setter> table = [] {
    std::map<std::string, Setter> t;
    auto dbl = [&t](const char* name, auto member) {
      t[name] = [member](ToolConfig& c, const std::string& k, std::string_view v) {
        member(c) = as_double(k, v);
      };
    };
    auto i32 = [&t](const char* name, auto member) {
      t[name] = [member](ToolConfig& c, const std::string& k, std::string_view v) {
        member(c) = as_int32(k, v);
      };
    };
    auto boolean = [&t](const char* name, auto member) {
      t[name] = [member](ToolConfig& c, const std::string& k, std::string_view v) {
        member(c) = as_bool(k, v);
      };
    };
    auto path = [&t](const char* name, auto member) {
      t[name] = [member](ToolConfig& c, const std::string& k, std::string_view v) {
        member(c) = std::filesystem::path(as_string(k, v));
      };
    };

    dbl("paste_probability", [](ToolConfig& c) -> double& { return c.augmentation.paste_probability; });
    dbl("occluder_probability", [](ToolConfig& c) -> double& { return c.augmentation.occluder_probability; });
    i32("max_entities", [](ToolConfig& c) -> int& { return c.augmentation.max_entities; });
    dbl("min_visible_fraction", [](ToolConfig& c) -> double& { return c.augmentation.min_visible_fraction; });
    dbl("scale_min", [](ToolConfig& c) -> double& { return c.augmentation.jitter.scale_min; });
    dbl("scale_max", [](ToolConfig& c) -> double& { return c.augmentation.jitter.scale_max; });
    dbl("rotation_min", [](ToolConfig& c) -> double& { return c.augmentation.jitter.rotation_min; });
    dbl("rotation_max", [](ToolConfig& c) -> double& { return c.augmentation.jitter.rotation_max; });
    dbl("hflip_probability", [](ToolConfig& c) -> double& { return c.augmentation.jitter.hflip_probability; });
    dbl("brightness", [](ToolConfig& c) -> double& { return c.augmentation.jitter.photometric.brightness; });
    dbl("contrast", [](ToolConfig& c) -> double& { return c.augmentation.jitter.photometric.contrast; });
    dbl("saturation", [](ToolConfig& c) -> double& { return c.augmentation.jitter.photometric.saturation; });
    dbl("hue", [](ToolConfig& c) -> double& { return c.augmentation.jitter.photometric.hue; });
    dbl("global_brightness", [](ToolConfig& c) -> double& { return c.augmentation.global_photometric.brightness; });
    dbl("global_contrast", [](ToolConfig& c) -> double& { return c.augmentation.global_photometric.contrast; });
    dbl("global_saturation", [](ToolConfig& c) -> double& { return c.augmentation.global_photometric.saturation; });
    dbl("global_hue", [](ToolConfig& c) -> double& { return c.augmentation.global_photometric.hue; });
    dbl("global_hflip_probability", [](ToolConfig& c) -> double& { return c.augmentation.global_hflip_probability; });
    t["resize_scales"] = [](ToolConfig& c, const std::string& k, std::string_view v) {
      c.augmentation.resize_scales = as_sizes(k, v);
    };
    t["output_size"] = [](ToolConfig& c, const std::string& k, std::string_view v) {
      c.augmentation.output_size = as_size(k, v);
    };
    t["seed"] = [](ToolConfig& c, const std::string& k, std::string_view v) {
      const long long s = as_int(k, v);
      if (s < 0) bad_value(k, "seed must be non-negative");
      c.augmentation.seed = static_cast<std::uint64_t>(s);
    };

    i32("hue_tolerance", [](ToolConfig& c) -> int& { return c.detector.hue_tolerance; });
    i32("saturation_floor", [](ToolConfig& c) -> int& { return c.detector.saturation_floor; });
    i32("value_floor", [](ToolConfig& c) -> int& { return c.detector.value_floor; });
    i32("close_kernel", [](ToolConfig& c) -> int& { return c.detector.close_kernel; });
    dbl("hough_threshold_fraction", [](ToolConfig& c) -> double& { return c.detector.hough_threshold_fraction; });
    dbl("region_min_fraction", [](ToolConfig& c) -> double& { return c.detector.region_min_fraction; });
    dbl("reliable_fraction", [](ToolConfig& c) -> double& { return c.detector.reliable_fraction; });

    t["connectivity"] = [](ToolConfig& c, const std::string& k, std::string_view v) {
      const int n = as_int32(k, v);
      if (n != 4 && n != 8) bad_value(k, "must be 4 or 8");
      c.metric.connectivity = n == 4 ? Connectivity::Four : Connectivity::Eight;
    };
    dbl("iou_threshold", [](ToolConfig& c) -> double& { return c.metric.iou_threshold; });
    t["dpr_aggregation"] = [](ToolConfig& c, const std::string& k, std::string_view v) {
      const std::string s = as_string(k, v);
      if (s == "micro") {
        c.metric.dpr_aggregation = DprAggregation::Micro;
      } else if (s == "macro") {
        c.metric.dpr_aggregation = DprAggregation::Macro;
      } else {
        bad_value(k, "must be micro or macro");
      }
    };
    boolean("unmatched_in_dpr", [](ToolConfig& c) -> bool& { return c.metric.unmatched_in_dpr; });
    boolean("per_image", [](ToolConfig& c) -> bool& { return c.metric.per_image; });

    t["jobs"] = [](ToolConfig& c, const std::string& k, std::string_view v) {
      const int n = as_int32(k, v);
      if (n < 0) bad_value(k, "must be non-negative");
      c.jobs = static_cast<unsigned>(n);
    };
    path("annotations", [](ToolConfig& c) -> std::optional<std::filesystem::path>& { return c.annotations; });
    path("images", [](ToolConfig& c) -> std::optional<std::filesystem::path>& { return c.images; });
    path("bank", [](ToolConfig& c) -> std::optional<std::filesystem::path>& { return c.bank; });
    path("out", [](ToolConfig& c) -> std::optional<std::filesystem::path>& { return c.out; });
    path("side_map", [](ToolConfig& c) -> std::optional<std::filesystem::path>& { return c.side_map; });
    return t;
  }();
  return table;
}

}  // namespace

std::optional<Size2> parse_size(std::string_view text) {
  const auto x = text.find_first_of("xX");
  if (x == std::string_view::npos) return std::nullopt;
  int w = 0, h = 0;
  const auto a = text.substr(0, x);
  const auto b = text.substr(x + 1);
  const auto ra = std::from_chars(a.data(), a.data() + a.size(), w);
  const auto rb = std::from_chars(b.data(), b.data() + b.size(), h);
  if (ra.ec != std::errc() || ra.ptr != a.data() + a.size() || rb.ec != std::errc() ||
      rb.ptr != b.data() + b.size() || a.empty() || b.empty() || w <= 0 || h <= 0) {
    return std::nullopt;
  }
  return Size2{w, h};
}

std::map<std::string, std::string> parse_config_text(std::string_view text) {
  std::map<std::string, std::string> out;
  std::istringstream in{std::string(text)};
  std::string raw;
  int line_no = 0;
  while (std::getline(in, raw)) {
    ++line_no;
    const std::string line = strip_comment(raw);
    const std::string_view body = trim(line);
    if (body.empty()) continue;
    if (body.front() == '[' && body.back() == ']' && body.find('=') == std::string_view::npos) {
      continue;
    }
    const auto eq = body.find('=');
    if (eq == std::string_view::npos) {
      throw Error(ErrorKind::InvalidConfig,
                  "line " + std::to_string(line_no) + ": expected key = value");
    }
    const std::string key(trim(body.substr(0, eq)));
    const std::string value(trim(body.substr(eq + 1)));
    if (key.empty()) {
      throw Error(ErrorKind::InvalidConfig, "line " + std::to_string(line_no) + ": missing key");
    }
    if (value.empty()) bad_value(key, "missing value");
    if (!out.emplace(key, value).second) bad_value(key, "duplicate key");
  }
  return out;
}

void apply_config_map(ToolConfig& config, const std::map<std::string, std::string>& values) {
  const auto& table = setters();
  for (const auto& [key, value] : values) {
    const auto it = table.find(key);
    if (it == table.end()) throw Error(ErrorKind::InvalidConfig, "unknown key '" + key + "'");
    it->second(config, key, value);
  }
}

void load_config_file(ToolConfig& config, const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::MissingFile, path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  apply_config_map(config, parse_config_text(ss.str()));
}

}  // namespace occaug
