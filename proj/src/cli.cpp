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

#include "occaug/cli.hpp"

#include <algorithm>
#include <fstream>
#include <ostream>
#include <sstream>
#include <thread>

#include <CLI11.hpp>

#include "occaug/augment.hpp"
#include "occaug/config.hpp"
#include "occaug/court.hpp"
#include "occaug/dataset.hpp"
#include "occaug/entity_bank.hpp"
#include "occaug/error.hpp"
#include "occaug/image.hpp"
#include "occaug/log.hpp"
#include "occaug/metric.hpp"
#include "occaug/swa.hpp"

namespace occaug::cli {
namespace {

namespace fs = std::filesystem;
using nlohmann::json;

std::string quote(std::string_view s) {
  std::string out;
  for (char c : s) {
    if (c == '"' || c == '\\') {
      out += '\\';
      out += c;
    } else if (c == '\n' || c == '\r') {
      out += ' ';
    } else {
      out += c;
    }
  }
  return out;
}

void report_error(std::ostream& err, std::string_view kind, std::string_view msg) {
  err << "error kind=" << kind << " msg=\"" << quote(msg) << "\"\n";
}

unsigned resolve_jobs(unsigned jobs) {
  if (jobs != 0) return jobs;
  return std::max(1u, std::thread::hardware_concurrency());
}

void write_text(const fs::path& path, const std::string& text) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw Error(ErrorKind::IoFailure, "cannot open " + path.string());
  f << text;
  if (!f) throw Error(ErrorKind::IoFailure, "cannot write " + path.string());
}

bool is_image_file(const fs::path& p) {
  std::string ext = p.extension().string();
  std::transform(ext.begin(), ext.end(), ext.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return ext == ".png" || ext == ".jpg" || ext == ".jpeg" || ext == ".bmp" || ext == ".tif" ||
         ext == ".tiff";
}

// Options shared by augment and the config file.
struct AugmentFlags {
  std::string annotations, images, bank, out, config, side_map;
  std::uint64_t seed = 0;
  double paste_probability = 0.80;
  double occluder_probability = 0.70;
  int max_entities = 40;
  std::string output_size = "1760x1280";
  unsigned jobs = 0;
};

struct EvaluateFlags {
  std::string gt, pred, report = "om_report.json", dpr = "micro";
  int connectivity = 4;
  double iou_threshold = 0.5;
  bool per_image = false;
  bool unmatched_in_dpr = false;
};

struct SwaFlags {
  std::vector<std::string> inputs;
  std::string out;
  std::vector<double> weights;
};

struct ExtractFlags {
  std::string annotations, images, out_bank;
};

struct DetectFlags {
  std::string images, out, overlays, config;
};

int cmd_extract(const ExtractFlags& f, std::ostream& out) {
  const DatasetBundle bundle = load_dataset(f.annotations, f.images);
  const ExtractionReport report = extract_entities(bundle, fs::path(f.images));
  save_bank(report.bank, f.out_bank);
  out << "entities=" << report.bank.size() << " skipped_empty=" << report.skipped_empty.size()
      << " skipped_crowd=" << report.skipped_crowd << '\n';
  return kExitOk;
}

int cmd_detect(const DetectFlags& f, std::ostream& out) {
  ToolConfig config;
  if (!f.config.empty()) load_config_file(config, f.config);
  if (!fs::is_directory(f.images)) throw Error(ErrorKind::MissingFile, f.images);
  std::vector<fs::path> files;
  for (const auto& entry : fs::recursive_directory_iterator(f.images)) {
    if (entry.is_regular_file() && is_image_file(entry.path())) files.push_back(entry.path());
  }
  std::sort(files.begin(), files.end());
  json results = json::array();
  std::size_t detected = 0;
  for (const auto& path : files) {
    const RgbImage image = load_image(path);
    const DetectionResult detection = detect_playable_region(image, config.detector);
    const std::string rel = fs::relative(path, f.images).generic_string();
    json rec{{"file_name", rel}, {"width", image.cols}, {"height", image.rows}};
    if (const auto* region = std::get_if<PlayableRegion>(&detection)) {
      ++detected;
      json poly = json::array();
      for (const auto& p : region->polygon) poly.push_back({p.x, p.y});
      rec["status"] = "detected";
      rec["polygon"] = poly;
      rec["confidence"] = region->confidence;
      rec["supporting_lines"] = region->supporting_lines;
    } else {
      const auto& failure = std::get<DetectionFailure>(detection);
      rec["status"] = "failed";
      rec["stage"] = to_string(failure.stage);
      rec["reason"] = failure.reason;
    }
    rec["side"] = to_string(infer_court_side(detection, image.cols));
    results.push_back(rec);
    if (!f.overlays.empty()) {
      fs::path target = fs::path(f.overlays) / rel;
      target.replace_extension(".png");
      fs::create_directories(target.parent_path());
      save_image(draw_region_overlay(image, detection), target);
    }
  }
  write_text(f.out, json{{"images", results}}.dump(1) + "\n");
  out << "images=" << files.size() << " detected=" << detected
      << " failed=" << files.size() - detected << '\n';
  return kExitOk;
}

int cmd_augment(const AugmentFlags& f, const CLI::App& app, std::ostream& out) {
  ToolConfig config;
  if (!f.config.empty()) load_config_file(config, f.config);
  auto given = [&app](const char* name) { return app.get_option(name)->count() > 0; };
  if (given("--annotations")) config.annotations = f.annotations;
  if (given("--images")) config.images = f.images;
  if (given("--bank")) config.bank = f.bank;
  if (given("--out")) config.out = f.out;
  if (given("--side-map")) config.side_map = f.side_map;
  if (given("--seed")) config.augmentation.seed = f.seed;
  if (given("--jobs")) config.jobs = f.jobs;
  if (given("--paste-probability")) config.augmentation.paste_probability = f.paste_probability;
  if (given("--occluder-probability")) {
    config.augmentation.occluder_probability = f.occluder_probability;
  }
  if (given("--max-entities")) config.augmentation.max_entities = f.max_entities;
  if (given("--output-size")) {
    const auto size = parse_size(f.output_size);
    if (!size) throw Error(ErrorKind::InvalidConfig, "output-size: expected WxH");
    config.augmentation.output_size = *size;
  }
  for (const auto& [field, value] : {std::pair{"annotations", &config.annotations},
                                     {"images", &config.images},
                                     {"bank", &config.bank},
                                     {"out", &config.out}}) {
    if (!*value) throw CLI::RequiredError(std::string("--") + field);
  }
  config.augmentation.validate();

  const DatasetBundle bundle = load_dataset(*config.annotations, *config.images);
  const EntityBank bank = load_bank(*config.bank);
  AugmentOptions options;
  options.augmentation = config.augmentation;
  options.detector = config.detector;
  options.jobs = resolve_jobs(config.jobs);
  if (config.side_map) options.side_overrides = load_side_map(*config.side_map);
  const AugmentResult result = augment_dataset(bundle, *config.images, bank, options, *config.out);
  const auto& s = result.summary;
  out << "images=" << s.images << " pastes=" << s.primaries + s.occluders
      << " occluders=" << s.occluders << " drops=" << s.drops << " skipped=" << s.skipped << '\n';
  return kExitOk;
}

int cmd_evaluate(const EvaluateFlags& f, std::ostream& out) {
  MetricOptions options;
  options.connectivity = f.connectivity == 8 ? Connectivity::Eight : Connectivity::Four;
  options.iou_threshold = f.iou_threshold;
  options.per_image = f.per_image;
  options.unmatched_in_dpr = f.unmatched_in_dpr;
  options.dpr_aggregation = f.dpr == "macro" ? DprAggregation::Macro : DprAggregation::Micro;
  const OMReport report = evaluate_om_files(f.gt, f.pred, options);
  if (!f.report.empty()) write_text(f.report, to_json(report).dump(1) + "\n");
  out << summary_line(report) << '\n';
  return kExitOk;
}

int cmd_swa(const SwaFlags& f, std::ostream& out) {
  std::vector<fs::path> paths(f.inputs.begin(), f.inputs.end());
  std::optional<std::vector<double>> weights;
  if (!f.weights.empty()) weights = f.weights;
  const Checkpoint averaged = average_checkpoint_files(paths, weights);
  write_checkpoint(averaged, f.out);
  out << "tensors=" << averaged.size() << " inputs=" << paths.size() << '\n';
  return kExitOk;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Location-aware copy-paste augmentation, court detection, occlusion metric and "
               "checkpoint averaging.",
               "occaug"};
  app.require_subcommand(1);
  app.set_help_all_flag("--help-all", "Show help for every command");

  ExtractFlags ex;
  auto* extract = app.add_subcommand("extract", "Extract ground-truth entities into a bank");
  extract->add_option("--annotations", ex.annotations, "COCO annotation file")->required();
  extract->add_option("--images", ex.images, "Image root directory")->required();
  extract->add_option("--out-bank", ex.out_bank, "Output bank directory")->required();

  DetectFlags de;
  auto* detect = app.add_subcommand("detect", "Detect the playable court region per image");
  detect->add_option("--images", de.images, "Directory of images")->required();
  detect->add_option("--out", de.out, "Output JSON with region polygons")->required();
  detect->add_option("--overlays", de.overlays, "Directory for debug overlay PNGs");
  detect->add_option("--config", de.config, "key = value config file");

  AugmentFlags au;
  auto* augment = app.add_subcommand("augment", "Run copy-paste augmentation over a dataset");
  augment->add_option("--annotations", au.annotations, "COCO annotation file");
  augment->add_option("--images", au.images, "Image root directory");
  augment->add_option("--bank", au.bank, "Entity bank directory");
  augment->add_option("--out", au.out, "Output directory");
  augment->add_option("--config", au.config, "key = value config file (flags override it)");
  augment->add_option("--seed", au.seed, "Base seed")->capture_default_str();
  augment->add_option("--side-map", au.side_map, "JSON map of image id to left|right");
  augment->add_option("--jobs", au.jobs, "Worker threads (0: all cores)")->capture_default_str();
  augment->add_option("--paste-probability", au.paste_probability, "Per-image paste probability")
      ->capture_default_str();
  augment->add_option("--occluder-probability", au.occluder_probability,
                      "Occluder probability per primary paste")
      ->capture_default_str();
  augment->add_option("--max-entities", au.max_entities, "Cap on pasted entities per image")
      ->capture_default_str();
  augment->add_option("--output-size", au.output_size, "Final image size WxH")
      ->capture_default_str();

  EvaluateFlags ev;
  auto* evaluate = app.add_subcommand("evaluate", "Compute OIR, DPR and OM");
  evaluate->add_option("--gt", ev.gt, "Ground-truth COCO file")->required();
  evaluate->add_option("--pred", ev.pred, "Predictions (COCO file or results list)")->required();
  evaluate->add_option("--connectivity", ev.connectivity, "Pixel connectivity")
      ->check(CLI::IsMember({4, 8}))
      ->capture_default_str();
  evaluate->add_option("--iou-threshold", ev.iou_threshold, "Matching IoU threshold")
      ->check(CLI::Range(0.0, 1.0))
      ->capture_default_str();
  evaluate->add_flag("--per-image", ev.per_image, "Average over images instead of pooling");
  evaluate->add_option("--dpr", ev.dpr, "DPR aggregation")
      ->check(CLI::IsMember({"micro", "macro"}))
      ->capture_default_str();
  evaluate->add_flag("--unmatched-in-dpr", ev.unmatched_in_dpr,
                     "Count unmatched split instances as zero pixel recall");
  evaluate->add_option("--report", ev.report, "JSON report path")->capture_default_str();

  SwaFlags sw;
  auto* swa = app.add_subcommand("swa", "Average NTCK checkpoints");
  swa->add_option("--inputs", sw.inputs, "Checkpoint files")->required()->expected(1, -1);
  swa->add_option("--out", sw.out, "Output checkpoint")->required();
  swa->add_option("--weights", sw.weights, "Optional per-input weights")->expected(1, -1);

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    report_error(err, "Usage", e.what());
    return kExitUsage;
  }

  try {
    if (extract->parsed()) return cmd_extract(ex, out);
    if (detect->parsed()) return cmd_detect(de, out);
    if (augment->parsed()) return cmd_augment(au, *augment, out);
    if (evaluate->parsed()) return cmd_evaluate(ev, out);
    if (swa->parsed()) return cmd_swa(sw, out);
  } catch (const CLI::ParseError& e) {
    report_error(err, "Usage", e.what());
    return kExitUsage;
  } catch (const Error& e) {
    report_error(err, to_string(e.kind()), e.detail());
    return kExitDataError;
  } catch (const std::exception& e) {
    report_error(err, "Internal", e.what());
    return kExitDataError;
  }
  return kExitUsage;
}

}  // namespace occaug::cli
