#include "xdeval/average_precision.hpp"

#include <algorithm>
#include <map>
#include <numeric>
#include <string>

#include "xdeval/errors.hpp"

namespace xdeval {

namespace {

// Descending score, ties by ascending input index.
std::vector<std::size_t> score_order(const std::vector<Detection>& dets) {
  std::vector<std::size_t> order(dets.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&dets](std::size_t a, std::size_t b) {
                     return dets[a].score > dets[b].score;
                   });
  return order;
}

struct RankedDetection {
  double score;
  std::size_t input_index;
  bool matched;
};

}  // namespace

std::vector<double> ApConfig::default_thresholds() {
  std::vector<double> t;
  for (int i = 50; i <= 95; i += 5) t.push_back(static_cast<double>(i) / 100.0);
  return t;
}

void ApConfig::validate() const {
  if (iou_thresholds.empty()) {
    throw ValidationError("ApConfig requires at least one IoU threshold");
  }
  double prev = 0.0;
  for (double t : iou_thresholds) {
    if (!(t > 0.0) || t > 1.0) {
      throw ValidationError("IoU thresholds must lie in (0, 1]");
    }
    if (t <= prev) {
      throw ValidationError("IoU thresholds must be strictly increasing");
    }
    prev = t;
  }
  if (recall_samples < 2) {
    throw ValidationError("recall_samples must be at least 2");
  }
  if (max_detections_per_image < 1) {
    throw ValidationError("max_detections_per_image must be at least 1");
  }
}

std::vector<std::optional<std::size_t>> greedy_match(
    const std::vector<Detection>& detections,
    const std::vector<GroundTruth>& gts, double iou_threshold) {
  if (!(iou_threshold > 0.0) || iou_threshold > 1.0) {
    throw ValidationError("iou_threshold must lie in (0, 1]");
  }
  std::vector<std::optional<std::size_t>> result(detections.size());
  std::vector<bool> taken(gts.size(), false);
  for (std::size_t d : score_order(detections)) {
    std::optional<std::size_t> best;
    double best_iou = 0.0;
    for (std::size_t g = 0; g < gts.size(); ++g) {
      if (taken[g]) continue;
      const double v = iou(detections[d].box, gts[g].box);
      // Strict > keeps the lowest-index GT on IoU ties.
      if (v >= iou_threshold && (!best || v > best_iou)) {
        best = g;
        best_iou = v;
      }
    }
    if (best) {
      taken[*best] = true;
      result[d] = best;
    }
  }
  return result;
}

double cap_at_threshold(const std::vector<Detection>& detections,
                        const std::vector<GroundTruth>& gts, int class_id,
                        double iou_threshold, const ApConfig& config) {
  config.validate();

  std::map<std::int64_t, std::vector<GroundTruth>> gts_by_image;
  std::size_t total_gt = 0;
  for (const GroundTruth& gt : gts) {
    if (gt.category_id != class_id) continue;
    gts_by_image[gt.image_id].push_back(gt);
    ++total_gt;
  }
  if (total_gt == 0) {
    throw NotEvaluable("class " + std::to_string(class_id) +
                       " has no ground truth");
  }

  std::map<std::int64_t, std::vector<std::size_t>> dets_by_image;
  for (std::size_t i = 0; i < detections.size(); ++i) {
    if (detections[i].category_id == class_id) {
      dets_by_image[detections[i].image_id].push_back(i);
    }
  }

  // Per-image greedy matching in score order, capped per image, then a global
  // ranking of the surviving detections.
  std::vector<RankedDetection> ranked;
  for (const auto& [image_id, indices] : dets_by_image) {
    std::vector<Detection> image_dets;
    image_dets.reserve(indices.size());
    for (std::size_t i : indices) image_dets.push_back(detections[i]);

    std::vector<std::size_t> order = score_order(image_dets);
    if (order.size() > config.max_detections_per_image) {
      order.resize(config.max_detections_per_image);
    }
    std::vector<Detection> kept;
    std::vector<std::size_t> kept_inputs;
    for (std::size_t o : order) {
      kept.push_back(image_dets[o]);
      kept_inputs.push_back(indices[o]);
    }

    static const std::vector<GroundTruth> kNone;
    auto it = gts_by_image.find(image_id);
    const std::vector<GroundTruth>& image_gts =
        it == gts_by_image.end() ? kNone : it->second;
    auto assignment = greedy_match(kept, image_gts, iou_threshold);
    for (std::size_t j = 0; j < kept.size(); ++j) {
      ranked.push_back({kept[j].score, kept_inputs[j],
                        assignment[j].has_value()});
    }
  }

  std::stable_sort(ranked.begin(), ranked.end(),
                   [](const RankedDetection& a, const RankedDetection& b) {
                     if (a.score != b.score) return a.score > b.score;
                     return a.input_index < b.input_index;
                   });

  // Cumulative PR points, then the running max of precision from the right so
  // p(r) = max precision at recall >= r.
  const std::size_t n = ranked.size();
  std::vector<double> recall(n), interp(n);
  std::size_t tp = 0;
  for (std::size_t i = 0; i < n; ++i) {
    if (ranked[i].matched) ++tp;
    recall[i] = static_cast<double>(tp) / static_cast<double>(total_gt);
    interp[i] = static_cast<double>(tp) / static_cast<double>(i + 1);
  }
  for (std::size_t i = n; i-- > 1;) {
    interp[i - 1] = std::max(interp[i - 1], interp[i]);
  }

  const std::size_t samples = config.recall_samples;
  double sum = 0.0;
  std::size_t j = 0;
  for (std::size_t s = 0; s < samples; ++s) {
    const double r =
        static_cast<double>(s) / static_cast<double>(samples - 1);
    while (j < n && recall[j] < r) ++j;
    if (j < n) sum += interp[j];
  }
  return sum / static_cast<double>(samples);
}

double class_ap(const std::vector<Detection>& detections,
                const std::vector<GroundTruth>& gts, int class_id,
                const ApConfig& config) {
  config.validate();
  double sum = 0.0;
  for (double t : config.iou_thresholds) {
    sum += cap_at_threshold(detections, gts, class_id, t, config);
  }
  return sum / static_cast<double>(config.iou_thresholds.size());
}

ApReport mean_ap(const std::vector<Detection>& detections,
                 const std::vector<GroundTruth>& gts, const ApConfig& config) {
  config.validate();
  if (gts.empty()) {
    throw NoGroundTruth("no ground truth provided");
  }
  std::vector<int> classes;
  for (const GroundTruth& gt : gts) classes.push_back(gt.category_id);
  std::sort(classes.begin(), classes.end());
  classes.erase(std::unique(classes.begin(), classes.end()), classes.end());

  ApReport report;
  report.class_ids = classes;
  report.classes_evaluated = classes.size();
  double total = 0.0;
  for (int c : classes) {
    std::vector<double> row;
    double row_sum = 0.0;
    for (double t : config.iou_thresholds) {
      const double cap = cap_at_threshold(detections, gts, c, t, config);
      row.push_back(cap);
      row_sum += cap;
    }
    const double ap = row_sum / static_cast<double>(config.iou_thresholds.size());
    report.cap.push_back(std::move(row));
    report.class_ap.push_back(ap);
    total += ap;
  }
  report.mean_ap = total / static_cast<double>(classes.size());
  return report;
}

}  // namespace xdeval
