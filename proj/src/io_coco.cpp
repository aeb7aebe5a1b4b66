#include "xdeval/io_coco.hpp"

#include <cmath>
#include <set>

#include "json_util.hpp"
#include "xdeval/errors.hpp"

namespace xdeval {

namespace {

using jsonio::dump_to_file;
using jsonio::ordered_json;
using jsonio::parse_file;

double require_number(const ordered_json& j, const char* field,
                      const std::string& context) {
  if (!j.contains(field) || !j[field].is_number()) {
    throw IntegrityError(context + ": missing or non-numeric field '" +
                         std::string(field) + "'");
  }
  return j[field].get<double>();
}

Box parse_bbox(const ordered_json& j, const std::string& context) {
  if (!j.contains("bbox") || !j["bbox"].is_array() || j["bbox"].size() != 4) {
    throw IntegrityError(context + ": bbox must be a 4-element array");
  }
  double v[4];
  for (std::size_t i = 0; i < 4; ++i) {
    if (!j["bbox"][i].is_number()) {
      throw IntegrityError(context + ": bbox entries must be numbers");
    }
    v[i] = j["bbox"][i].get<double>();
    if (!std::isfinite(v[i])) {
      throw IntegrityError(context + ": bbox entries must be finite");
    }
  }
  if (!(v[2] > 0.0) || !(v[3] > 0.0)) {
    throw IntegrityError(context + ": bbox width and height must be positive");
  }
  return Box(v[0], v[1], v[2], v[3]);
}

ordered_json bbox_json(const Box& box) {
  return ordered_json::array(
      {box.x_min(), box.y_min(), box.width(), box.height()});
}

}  // namespace

void AnnotationSet::validate() const {
  std::set<std::int64_t> image_ids;
  for (const ImageRecord& img : images) {
    if (!image_ids.insert(img.id).second) {
      throw IntegrityError("duplicate image id " + std::to_string(img.id));
    }
    if (img.width == 0 || img.height == 0) {
      throw IntegrityError("image " + std::to_string(img.id) +
                           " has zero dimensions");
    }
  }
  std::set<int> category_ids;
  for (const CategoryRecord& cat : categories) {
    if (!category_ids.insert(cat.id).second) {
      throw IntegrityError("duplicate category id " + std::to_string(cat.id));
    }
  }
  std::set<std::int64_t> annotation_ids;
  for (const AnnotationRecord& ann : annotations) {
    if (!annotation_ids.insert(ann.id).second) {
      throw IntegrityError("duplicate annotation id " +
                           std::to_string(ann.id));
    }
    if (image_ids.count(ann.image_id) == 0) {
      throw IntegrityError("annotation " + std::to_string(ann.id) +
                           " references missing image id " +
                           std::to_string(ann.image_id));
    }
    if (category_ids.count(ann.category_id) == 0) {
      throw IntegrityError("annotation " + std::to_string(ann.id) +
                           " references missing category id " +
                           std::to_string(ann.category_id));
    }
  }
}

std::vector<GroundTruth> AnnotationSet::ground_truths() const {
  std::vector<GroundTruth> gts;
  gts.reserve(annotations.size());
  for (const AnnotationRecord& ann : annotations) {
    gts.push_back(GroundTruth{ann.image_id, ann.category_id, ann.bbox});
  }
  return gts;
}

AnnotationSet read_annotations(const std::string& path) {
  const ordered_json root = parse_file(path);
  if (!root.is_object()) {
    throw IntegrityError(path + ": top level must be an object");
  }

  AnnotationSet set;
  for (const ordered_json& j : root.value("images", ordered_json::array())) {
    ImageRecord img;
    img.id = static_cast<std::int64_t>(require_number(j, "id", path));
    img.width =
        static_cast<std::size_t>(require_number(j, "width", path));
    img.height =
        static_cast<std::size_t>(require_number(j, "height", path));
    img.file_name = j.value("file_name", std::string());
    set.images.push_back(std::move(img));
  }
  for (const ordered_json& j :
       root.value("annotations", ordered_json::array())) {
    AnnotationRecord ann;
    ann.id = static_cast<std::int64_t>(require_number(j, "id", path));
    ann.image_id =
        static_cast<std::int64_t>(require_number(j, "image_id", path));
    ann.category_id =
        static_cast<int>(require_number(j, "category_id", path));
    ann.bbox = parse_bbox(j, path + ": annotation " + std::to_string(ann.id));
    set.annotations.push_back(std::move(ann));
  }
  for (const ordered_json& j :
       root.value("categories", ordered_json::array())) {
    CategoryRecord cat;
    cat.id = static_cast<int>(require_number(j, "id", path));
    cat.name = j.value("name", std::string());
    set.categories.push_back(std::move(cat));
  }
  set.validate();
  return set;
}

void write_annotations(const AnnotationSet& set, const std::string& path) {
  set.validate();
  ordered_json root;
  root["images"] = ordered_json::array();
  for (const ImageRecord& img : set.images) {
    ordered_json j;
    j["id"] = img.id;
    j["width"] = img.width;
    j["height"] = img.height;
    j["file_name"] = img.file_name;
    root["images"].push_back(std::move(j));
  }
  root["annotations"] = ordered_json::array();
  for (const AnnotationRecord& ann : set.annotations) {
    ordered_json j;
    j["id"] = ann.id;
    j["image_id"] = ann.image_id;
    j["category_id"] = ann.category_id;
    j["bbox"] = bbox_json(ann.bbox);
    root["annotations"].push_back(std::move(j));
  }
  root["categories"] = ordered_json::array();
  for (const CategoryRecord& cat : set.categories) {
    ordered_json j;
    j["id"] = cat.id;
    j["name"] = cat.name;
    root["categories"].push_back(std::move(j));
  }
  dump_to_file(root, path);
}

std::vector<Detection> read_detections(const std::string& path) {
  const ordered_json root = parse_file(path);
  if (!root.is_array()) {
    throw IntegrityError(path + ": detections file must be a JSON array");
  }
  std::vector<Detection> detections;
  detections.reserve(root.size());
  for (std::size_t i = 0; i < root.size(); ++i) {
    const ordered_json& j = root[i];
    const std::string context = path + ": detection " + std::to_string(i);
    const auto image_id =
        static_cast<std::int64_t>(require_number(j, "image_id", context));
    const int category_id =
        static_cast<int>(require_number(j, "category_id", context));
    const double score = require_number(j, "score", context);
    if (!std::isfinite(score)) {
      throw IntegrityError(context + ": score must be finite");
    }
    detections.push_back(
        Detection{image_id, category_id, parse_bbox(j, context), score});
  }
  return detections;
}

void write_detections(const std::vector<Detection>& detections,
                      const std::string& path) {
  ordered_json root = ordered_json::array();
  for (const Detection& det : detections) {
    ordered_json j;
    j["image_id"] = det.image_id;
    j["category_id"] = det.category_id;
    j["bbox"] = bbox_json(det.box);
    j["score"] = det.score;
    root.push_back(std::move(j));
  }
  dump_to_file(root, path);
}

}  // namespace xdeval
