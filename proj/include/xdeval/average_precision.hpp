#pragma once

#include <cstddef>
#include <optional>
#include <vector>

#include "xdeval/detection.hpp"

namespace xdeval {

struct ApConfig {
  // COCO thresholds 0.50, 0.55, ..., 0.95.
  std::vector<double> iou_thresholds = default_thresholds();
  std::size_t recall_samples = 101;
  std::size_t max_detections_per_image = 100;

  static std::vector<double> default_thresholds();
  void validate() const;
};

// Per-class AP and the full class x threshold matrix behind it.
struct ApReport {
  std::vector<int> class_ids;             // classes with >= 1 ground truth, ascending
  std::vector<std::vector<double>> cap;   // [class][threshold]
  std::vector<double> class_ap;           // mean of cap over thresholds
  double mean_ap = 0.0;                   // mean of class_ap
  std::size_t classes_evaluated = 0;
};

// Greedy assignment for one class on one image. Detections are processed in
// descending score (ties: ascending input index); each takes the unmatched
// ground truth of highest IoU when that IoU >= threshold (ties: lowest GT
// index). Returns, per detection, the matched GT index or nullopt.
std::vector<std::optional<std::size_t>> greedy_match(
    const std::vector<Detection>& detections,
    const std::vector<GroundTruth>& gts, double iou_threshold);

// Area under the interpolated precision-recall curve for one class at one
// IoU threshold. Throws NotEvaluable when the class has no ground truth.
double cap_at_threshold(const std::vector<Detection>& detections,
                        const std::vector<GroundTruth>& gts, int class_id,
                        double iou_threshold, const ApConfig& config);

// Mean of cap_at_threshold over the configured thresholds.
double class_ap(const std::vector<Detection>& detections,
                const std::vector<GroundTruth>& gts, int class_id,
                const ApConfig& config);

// Full report over every class that has ground truth. Throws NoGroundTruth
// when there is none at all.
ApReport mean_ap(const std::vector<Detection>& detections,
                 const std::vector<GroundTruth>& gts, const ApConfig& config);

}  // namespace xdeval
