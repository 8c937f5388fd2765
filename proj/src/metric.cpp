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

#include "occaug/metric.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <map>

#include "occaug/error.hpp"

namespace occaug {
namespace {

struct Candidate {
  MatchPair pair;
  std::int64_t gt_id = 0;
  std::int64_t pred_id = 0;
};

// IoU a.i/a.u > b.i/b.u, compared exactly.
bool higher_iou(const MatchPair& a, const MatchPair& b) {
  return static_cast<std::int64_t>(a.intersection) * b.union_ >
         static_cast<std::int64_t>(b.intersection) * a.union_;
}

bool same_iou(const MatchPair& a, const MatchPair& b) {
  return static_cast<std::int64_t>(a.intersection) * b.union_ ==
         static_cast<std::int64_t>(b.intersection) * a.union_;
}

struct Tally {
  std::int64_t split = 0;
  std::int64_t recalled = 0;
  std::int64_t dpr_num = 0;
  std::int64_t dpr_den = 0;
  double macro_sum = 0.0;
  std::int64_t macro_n = 0;

  void add(const InstanceResult& r, bool unmatched_in_dpr) {
    ++split;
    const bool matched = r.matched_prediction_id.has_value();
    if (matched) ++recalled;
    if (!matched && !unmatched_in_dpr) return;
    dpr_num += r.disconnected_recalled;
    dpr_den += r.disconnected_total;
    if (r.disconnected_total > 0) {
      macro_sum += static_cast<double>(r.disconnected_recalled) /
                   static_cast<double>(r.disconnected_total);
      ++macro_n;
    }
  }

  double oir() const {
    return split == 0 ? 1.0 : static_cast<double>(recalled) / static_cast<double>(split);
  }

  double dpr(DprAggregation aggregation) const {
    if (aggregation == DprAggregation::Macro) {
      return macro_n == 0 ? 1.0 : macro_sum / static_cast<double>(macro_n);
    }
    return dpr_den == 0 ? 1.0 : static_cast<double>(dpr_num) / static_cast<double>(dpr_den);
  }
};

}  // namespace

std::optional<SplitInstance> analyze_instance(std::int64_t annotation_id, std::int64_t image_id,
                                              const BinaryMask& mask, Connectivity connectivity) {
  ComponentSet components = connected_components(mask, connectivity);
  if (components.count < 2) return std::nullopt;
  SplitInstance s;
  s.annotation_id = annotation_id;
  s.image_id = image_id;
  s.mask = mask;
  std::int32_t best = 1;
  for (std::int32_t k = 2; k <= components.count; ++k) {
    if (components.component_sizes[k - 1] > components.component_sizes[best - 1]) best = k;
  }
  s.main_component_label = best;
  s.disconnected_pixels = BinaryMask(mask.height(), mask.width());
  auto out = s.disconnected_pixels.bits();
  for (std::size_t p = 0; p < components.labels.size(); ++p) {
    if (components.labels[p] != 0 && components.labels[p] != best) out[p] = 1;
  }
  s.disconnected_count = mask.count() - components.component_sizes[best - 1];
  s.components = std::move(components);
  return s;
}

std::vector<SplitInstance> find_split_instances(const DatasetBundle& gt,
                                                Connectivity connectivity) {
  std::vector<SplitInstance> out;
  for (const auto& image : gt.images) {
    for (const auto* ann : gt.annotations_for(image.id)) {
      if (auto s = analyze_instance(ann->id, image.id, decode_mask(*ann, image), connectivity)) {
        out.push_back(std::move(*s));
      }
    }
  }
  return out;
}

std::vector<MatchPair> match_predictions(const std::vector<SplitInstance>& split,
                                         const std::vector<PredictionMask>& predictions,
                                         double iou_threshold) {
  std::vector<Candidate> candidates;
  for (std::size_t i = 0; i < split.size(); ++i) {
    for (std::size_t j = 0; j < predictions.size(); ++j) {
      if (split[i].image_id != predictions[j].image_id) continue;
      const BinaryMask& a = split[i].mask;
      const BinaryMask& b = predictions[j].mask;
      if (a.height() != b.height() || a.width() != b.width()) {
        throw Error(ErrorKind::DimensionMismatch,
                    "prediction " + std::to_string(predictions[j].id) + " does not match image " +
                        std::to_string(split[i].image_id));
      }
      const std::int64_t inter = intersection_count(a, b);
      if (inter == 0) continue;
      const std::int64_t uni = union_count(a, b);
      if (static_cast<double>(inter) < iou_threshold * static_cast<double>(uni)) continue;
      candidates.push_back({{i, j, inter, uni}, split[i].annotation_id, predictions[j].id});
    }
  }
  std::sort(candidates.begin(), candidates.end(), [](const Candidate& x, const Candidate& y) {
    if (!same_iou(x.pair, y.pair)) return higher_iou(x.pair, y.pair);
    if (x.gt_id != y.gt_id) return x.gt_id < y.gt_id;
    return x.pred_id < y.pred_id;
  });
  std::vector<bool> gt_used(split.size(), false);
  std::vector<bool> pred_used(predictions.size(), false);
  std::vector<MatchPair> matching;
  for (const auto& c : candidates) {
    if (gt_used[c.pair.split_index] || pred_used[c.pair.prediction_index]) continue;
    gt_used[c.pair.split_index] = true;
    pred_used[c.pair.prediction_index] = true;
    matching.push_back(c.pair);
  }
  return matching;
}

OMReport evaluate_om(const DatasetBundle& gt, const DatasetBundle& predictions,
                     const MetricOptions& options) {
  if (gt.images.empty()) throw Error(ErrorKind::EmptyGroundTruth, "ground truth has no images");
  if (!(options.iou_threshold > 0.0 && options.iou_threshold <= 1.0)) {
    throw Error(ErrorKind::InvalidConfig, "iou_threshold: must lie in (0, 1]");
  }
  OMReport report;
  report.options = options;
  Tally global;
  double oir_sum = 0.0;
  double dpr_sum = 0.0;
  std::int64_t images_with_split = 0;

  for (const auto& image : gt.images) {
    std::vector<SplitInstance> split;
    for (const auto* ann : gt.annotations_for(image.id)) {
      if (auto s = analyze_instance(ann->id, image.id, decode_mask(*ann, image),
                                    options.connectivity)) {
        split.push_back(std::move(*s));
      }
    }
    if (split.empty()) continue;
    std::vector<PredictionMask> preds;
    for (const auto* p : predictions.annotations_for(image.id)) {
      preds.push_back({p->id, image.id, decode_mask(*p, image)});
    }
    const auto matching = match_predictions(split, preds, options.iou_threshold);
    std::vector<std::optional<std::size_t>> match_of(split.size());
    for (const auto& m : matching) match_of[m.split_index] = m.prediction_index;

    Tally local;
    for (std::size_t i = 0; i < split.size(); ++i) {
      InstanceResult r;
      r.annotation_id = split[i].annotation_id;
      r.image_id = image.id;
      r.disconnected_total = split[i].disconnected_count;
      if (match_of[i]) {
        const auto& pred = preds[*match_of[i]];
        r.matched_prediction_id = pred.id;
        r.disconnected_recalled = intersection_count(split[i].disconnected_pixels, pred.mask);
      }
      global.add(r, options.unmatched_in_dpr);
      local.add(r, options.unmatched_in_dpr);
      report.per_instance.push_back(r);
    }
    oir_sum += local.oir();
    dpr_sum += local.dpr(options.dpr_aggregation);
    ++images_with_split;
  }

  report.split_instance_count = global.split;
  report.recalled_count = global.recalled;
  if (options.per_image) {
    if (images_with_split > 0) {
      report.oir = oir_sum / static_cast<double>(images_with_split);
      report.dpr = dpr_sum / static_cast<double>(images_with_split);
    }
  } else {
    report.oir = global.oir();
    report.dpr = global.dpr(options.dpr_aggregation);
  }
  report.om = report.oir * report.dpr;
  return report;
}

OMReport evaluate_om_files(const std::filesystem::path& gt_path,
                           const std::filesystem::path& prediction_path,
                           const MetricOptions& options) {
  const DatasetBundle gt = read_annotations(gt_path);
  std::ifstream in(prediction_path, std::ios::binary);
  if (!in) throw Error(ErrorKind::MissingFile, prediction_path.string());
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw Error(ErrorKind::MalformedAnnotation,
                prediction_path.string() + ": " + std::string(e.what()));
  }
  const DatasetBundle preds = doc.is_array() ? parse_results(doc, gt) : parse_dataset(doc);
  if (!doc.is_array()) {
    for (const auto& p : preds.annotations) {
      const auto* img = gt.find_image(p.image_id);
      const auto* own = preds.find_image(p.image_id);
      if (img == nullptr) {
        throw Error(ErrorKind::DanglingReference,
                    "prediction " + std::to_string(p.id) + " refers to unknown image");
      }
      if (own != nullptr && (own->width != img->width || own->height != img->height)) {
        throw Error(ErrorKind::DimensionMismatch,
                    "image " + std::to_string(p.image_id) + " differs in size between files");
      }
    }
  }
  return evaluate_om(gt, preds, options);
}

nlohmann::json to_json(const OMReport& report) {
  nlohmann::json per = nlohmann::json::array();
  for (const auto& r : report.per_instance) {
    per.push_back({{"annotation_id", r.annotation_id},
                   {"image_id", r.image_id},
                   {"matched_prediction_id", r.matched_prediction_id
                                                 ? nlohmann::json(*r.matched_prediction_id)
                                                 : nlohmann::json(nullptr)},
                   {"disconnected_total", r.disconnected_total},
                   {"disconnected_recalled", r.disconnected_recalled}});
  }
  const auto& o = report.options;
  return {{"oir", report.oir},
          {"dpr", report.dpr},
          {"om", report.om},
          {"split_instance_count", report.split_instance_count},
          {"recalled_count", report.recalled_count},
          {"options",
           {{"connectivity", static_cast<int>(o.connectivity)},
            {"iou_threshold", o.iou_threshold},
            {"dpr_aggregation", o.dpr_aggregation == DprAggregation::Micro ? "micro" : "macro"},
            {"unmatched_in_dpr", o.unmatched_in_dpr},
            {"per_image", o.per_image}}},
          {"per_instance", per}};
}

std::string format_ratio(double value) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), value);
  std::string s(buf, res.ptr);
  if (s.find_first_of(".eEn") == std::string::npos) s += ".0";
  return s;
}

std::string summary_line(const OMReport& report) {
  return "OIR=" + format_ratio(report.oir) + " DPR=" + format_ratio(report.dpr) +
         " OM=" + format_ratio(report.om);
}

}  // namespace occaug
