#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "xdeval/detection.hpp"
#include "xdeval/geometry.hpp"

namespace xdeval {

struct ImageRecord {
  std::int64_t id = 0;
  std::size_t width = 0;
  std::size_t height = 0;
  std::string file_name;
};

struct AnnotationRecord {
  std::int64_t id = 0;
  std::int64_t image_id = 0;
  int category_id = 0;
  Box bbox = Box(0.0, 0.0, 1.0, 1.0);
};

struct CategoryRecord {
  int id = 0;
  std::string name;
};

// COCO-subset annotation container: images, annotations, categories.
// Referential integrity (ids unique, references resolve) is enforced on
// every read and before every write.
struct AnnotationSet {
  std::vector<ImageRecord> images;
  std::vector<AnnotationRecord> annotations;
  std::vector<CategoryRecord> categories;

  void validate() const;

  // Flattens annotations into the matcher's ground-truth records.
  std::vector<GroundTruth> ground_truths() const;
};

AnnotationSet read_annotations(const std::string& path);
void write_annotations(const AnnotationSet& set, const std::string& path);

// COCO results-format array of {image_id, category_id, bbox, score};
// order is preserved exactly.
std::vector<Detection> read_detections(const std::string& path);
void write_detections(const std::vector<Detection>& detections,
                      const std::string& path);

}  // namespace xdeval
