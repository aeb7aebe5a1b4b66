#pragma once

#include <cstddef>
#include <map>
#include <vector>

#include "xdeval/detection.hpp"
#include "xdeval/grid.hpp"
#include "xdeval/mask.hpp"
#include "xdeval/summary.hpp"

namespace xdeval {

// Share of total positive relevance falling inside the target mask.
struct AlResult {
  double r_box = 0.0;
  double r_tot = 0.0;
  double value = 0.0;
};

// Share of the k highest-relevance pixels lying inside the target mask.
struct TkiResult {
  std::size_t k = 0;
  std::size_t intersection_count = 0;
  double value = 0.0;
};

enum class TargetMode {
  kMatchedBox,         // rasterized box of the matched ground truth
  kUnionOfClassBoxes,  // union of the class's ground-truth boxes in the image
};

struct XaiEvalConfig {
  double match_iou = 0.5;
  double score_threshold = 0.5;
  std::size_t k = 1000;  // clamped to the grid size at evaluation time
  TargetMode target_mode = TargetMode::kMatchedBox;

  void validate() const;
};

// A detection together with the attribution map explaining it, at image
// resolution.
struct ExplainedDetection {
  Detection detection;
  Grid grid;
};

struct ClassXaiSummary {
  MetricSummary al;
  MetricSummary tki;
  std::size_t evaluated = 0;
  std::size_t skipped_no_relevance = 0;
};

struct XaiEvalResult {
  std::map<int, ClassXaiSummary> per_class;
  MetricSummary al;   // pooled over all evaluated detections
  MetricSummary tki;
  std::size_t matched = 0;
  std::size_t evaluated = 0;
  std::size_t skipped_no_relevance = 0;
};

// Positive-relevance ratio inside the mask. Zero and negative values carry
// no relevance. Throws NoPositiveRelevance when the map has none at all.
AlResult attribution_localization(const Grid& grid, const BinaryMask& mask);

// Mask of the k largest grid values; ties broken by smaller row-major index.
BinaryMask topk_mask(const Grid& grid, std::size_t k);

TkiResult topk_intersection(const Grid& grid, const BinaryMask& target,
                            std::size_t k);

// Match detections to same-class ground truth, then score each matched
// detection's attribution map against its target mask. Detections whose maps
// have no positive relevance are counted and skipped.
XaiEvalResult evaluate_explanations(
    const std::vector<ExplainedDetection>& detections,
    const std::vector<GroundTruth>& gts, const XaiEvalConfig& config);

}  // namespace xdeval
