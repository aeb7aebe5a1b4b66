#include "xdeval/localization.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>
#include <utility>

#include "xdeval/average_precision.hpp"
#include "xdeval/errors.hpp"

namespace xdeval {

void XaiEvalConfig::validate() const {
  if (!(match_iou > 0.0) || match_iou > 1.0) {
    throw ValidationError("match_iou must lie in (0, 1]");
  }
  if (!std::isfinite(score_threshold)) {
    throw ValidationError("score_threshold must be finite");
  }
  if (k < 1) {
    throw ValidationError("k must be at least 1");
  }
}

AlResult attribution_localization(const Grid& grid, const BinaryMask& mask) {
  if (grid.width() != mask.width() || grid.height() != mask.height()) {
    throw ShapeMismatch("grid is " + std::to_string(grid.width()) + "x" +
                        std::to_string(grid.height()) + " but mask is " +
                        std::to_string(mask.width()) + "x" +
                        std::to_string(mask.height()));
  }
  AlResult result;
  const auto& values = grid.values();
  const auto& bits = mask.bits();
  for (std::size_t i = 0; i < values.size(); ++i) {
    const double v = values[i];
    if (v > 0.0) {
      result.r_tot += v;
      if (bits[i]) result.r_box += v;
    }
  }
  if (result.r_tot == 0.0) {
    throw NoPositiveRelevance("attribution map has no positive relevance");
  }
  result.value = result.r_box / result.r_tot;
  return result;
}

BinaryMask topk_mask(const Grid& grid, std::size_t k) {
  const std::size_t n = grid.values().size();
  if (k < 1 || k > n) {
    throw BadK("k must lie in [1, " + std::to_string(n) + "], got " +
               std::to_string(k));
  }
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  // Larger value first; ties keep the smaller row-major index.
  std::stable_sort(order.begin(), order.end(),
                   [&grid](std::size_t a, std::size_t b) {
                     return grid.values()[a] > grid.values()[b];
                   });
  BinaryMask mask = BinaryMask::zeros(grid.width(), grid.height());
  for (std::size_t i = 0; i < k; ++i) {
    mask.set(order[i] / grid.width(), order[i] % grid.width(), true);
  }
  return mask;
}

TkiResult topk_intersection(const Grid& grid, const BinaryMask& target,
                            std::size_t k) {
  if (grid.width() != target.width() || grid.height() != target.height()) {
    throw ShapeMismatch("grid is " + std::to_string(grid.width()) + "x" +
                        std::to_string(grid.height()) + " but target is " +
                        std::to_string(target.width()) + "x" +
                        std::to_string(target.height()));
  }
  const BinaryMask top = topk_mask(grid, k);
  TkiResult result;
  result.k = k;
  for (std::size_t i = 0; i < top.bits().size(); ++i) {
    if (top.bits()[i] && target.bits()[i]) ++result.intersection_count;
  }
  result.value =
      static_cast<double>(result.intersection_count) / static_cast<double>(k);
  return result;
}

XaiEvalResult evaluate_explanations(
    const std::vector<ExplainedDetection>& detections,
    const std::vector<GroundTruth>& gts, const XaiEvalConfig& config) {
  config.validate();

  // Group kept detections and ground truth by (image, class) for matching.
  using GroupKey = std::pair<std::int64_t, int>;
  std::map<GroupKey, std::vector<std::size_t>> det_groups;
  std::map<GroupKey, std::vector<GroundTruth>> gt_groups;
  for (std::size_t i = 0; i < detections.size(); ++i) {
    const Detection& det = detections[i].detection;
    if (det.score >= config.score_threshold) {
      det_groups[{det.image_id, det.category_id}].push_back(i);
    }
  }
  for (const GroundTruth& gt : gts) {
    gt_groups[{gt.image_id, gt.category_id}].push_back(gt);
  }

  // Matched GT (group-local index) per input detection.
  std::vector<std::optional<std::size_t>> matched_gt(detections.size());
  std::size_t matched = 0;
  for (const auto& [key, indices] : det_groups) {
    auto it = gt_groups.find(key);
    if (it == gt_groups.end()) continue;
    std::vector<Detection> group;
    group.reserve(indices.size());
    for (std::size_t i : indices) group.push_back(detections[i].detection);
    auto assignment = greedy_match(group, it->second, config.match_iou);
    for (std::size_t j = 0; j < indices.size(); ++j) {
      if (assignment[j]) {
        matched_gt[indices[j]] = assignment[j];
        ++matched;
      }
    }
  }

  XaiEvalResult result;
  result.matched = matched;
  if (matched == 0) {
    throw NothingToExplain("no detection matched any ground truth");
  }

  // Evaluate in ascending (image_id, input index) order.
  std::vector<std::size_t> eval_order;
  for (std::size_t i = 0; i < detections.size(); ++i) {
    if (matched_gt[i]) eval_order.push_back(i);
  }
  std::stable_sort(eval_order.begin(), eval_order.end(),
                   [&detections](std::size_t a, std::size_t b) {
                     return detections[a].detection.image_id <
                            detections[b].detection.image_id;
                   });

  std::map<int, std::vector<double>> al_by_class;
  std::map<int, std::vector<double>> tki_by_class;
  std::map<int, std::size_t> skipped_by_class;
  std::vector<double> al_all;
  std::vector<double> tki_all;

  for (std::size_t i : eval_order) {
    const Detection& det = detections[i].detection;
    const Grid& grid = detections[i].grid;
    const GroupKey key{det.image_id, det.category_id};

    const std::vector<GroundTruth>& class_gts = gt_groups.at(key);
    BinaryMask target = BinaryMask::zeros(grid.width(), grid.height());
    if (config.target_mode == TargetMode::kMatchedBox) {
      target = rasterize(class_gts[*matched_gt[i]].box, grid.width(),
                         grid.height());
    } else {
      std::vector<Box> boxes;
      boxes.reserve(class_gts.size());
      for (const GroundTruth& gt : class_gts) boxes.push_back(gt.box);
      target = union_mask(boxes, grid.width(), grid.height());
    }

    const std::size_t k =
        std::min(config.k, grid.width() * grid.height());
    try {
      const AlResult al = attribution_localization(grid, target);
      const TkiResult tki = topk_intersection(grid, target, k);
      al_by_class[det.category_id].push_back(al.value);
      tki_by_class[det.category_id].push_back(tki.value);
      al_all.push_back(al.value);
      tki_all.push_back(tki.value);
    } catch (const NoPositiveRelevance&) {
      ++skipped_by_class[det.category_id];
      ++result.skipped_no_relevance;
    }
  }

  if (al_all.empty()) {
    throw NothingToExplain(
        "all " + std::to_string(matched) +
        " matched detections had attribution maps with no positive relevance");
  }

  for (const auto& [cls, values] : al_by_class) {
    ClassXaiSummary summary;
    summary.al = summarize(values);
    summary.tki = summarize(tki_by_class.at(cls));
    summary.evaluated = values.size();
    auto it = skipped_by_class.find(cls);
    summary.skipped_no_relevance = it == skipped_by_class.end() ? 0 : it->second;
    result.per_class.emplace(cls, std::move(summary));
  }
  result.al = summarize(al_all);
  result.tki = summarize(tki_all);
  result.evaluated = al_all.size();
  return result;
}

}  // namespace xdeval
