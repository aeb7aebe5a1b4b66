#include "xdeval/io_bundle.hpp"

#include <filesystem>
#include <iomanip>
#include <map>
#include <set>
#include <sstream>

#include "domain_json.hpp"
#include "json_util.hpp"
#include "xdeval/errors.hpp"
#include "xdeval/io_coco.hpp"
#include "xdeval/io_netpbm.hpp"
#include "xdeval/version.hpp"

namespace xdeval {

namespace {

namespace fs = std::filesystem;
using jsonio::dump_to_file;
using jsonio::ordered_json;
using jsonio::parse_file;

std::string image_file_name(std::int64_t image_id) {
  std::ostringstream name;
  name << "images/img_" << std::setfill('0') << std::setw(6) << image_id
       << ".ppm";
  return name.str();
}

AnnotationSet bundle_annotations(const DatasetBundle& bundle) {
  AnnotationSet set;
  for (std::size_t i = 0; i < bundle.size(); ++i) {
    const GroundTruth& gt = bundle.ground_truths[i];
    set.images.push_back(ImageRecord{gt.image_id, bundle.images[i].shape[2],
                                     bundle.images[i].shape[1],
                                     image_file_name(gt.image_id)});
    set.annotations.push_back(AnnotationRecord{
        static_cast<std::int64_t>(i) + 1, gt.image_id, gt.category_id,
        gt.box});
  }
  for (std::size_t c = 0; c < kClassNames.size(); ++c) {
    set.categories.push_back(
        CategoryRecord{static_cast<int>(c) + 1, kClassNames[c]});
  }
  return set;
}

}  // namespace

void write_bundle(const DatasetBundle& bundle, const std::string& dir) {
  if (bundle.size() == 0) {
    throw EmptySample("cannot write an empty bundle");
  }
  fs::create_directories(fs::path(dir) / "images");

  for (std::size_t i = 0; i < bundle.size(); ++i) {
    const fs::path path =
        fs::path(dir) / image_file_name(bundle.ground_truths[i].image_id);
    write_ppm(bundle.images[i], path.string());
  }
  write_annotations(bundle_annotations(bundle),
                    (fs::path(dir) / "annotations.json").string());

  ordered_json manifest;
  manifest["domain"] = jsonio::domain_to_json(bundle.domain);
  manifest["seed"] = bundle.seed;
  manifest["count"] = bundle.size();
  manifest["toolkit_version"] = kVersion;
  dump_to_file(manifest, (fs::path(dir) / "manifest.json").string());
}

DatasetBundle read_bundle(const std::string& dir) {
  const std::string manifest_path = (fs::path(dir) / "manifest.json").string();
  const ordered_json manifest = parse_file(manifest_path);
  if (!manifest.is_object() || !manifest.contains("domain")) {
    throw IntegrityError(manifest_path + ": missing domain section");
  }

  DatasetBundle bundle;
  bundle.domain = jsonio::domain_from_json(manifest["domain"], manifest_path);
  bundle.seed = manifest.value("seed", 0ull);

  const AnnotationSet set =
      read_annotations((fs::path(dir) / "annotations.json").string());
  std::map<std::int64_t, const AnnotationRecord*> by_image;
  for (const AnnotationRecord& ann : set.annotations) {
    if (!by_image.emplace(ann.image_id, &ann).second) {
      throw IntegrityError(dir + ": image " + std::to_string(ann.image_id) +
                           " has more than one annotation");
    }
  }

  for (const ImageRecord& img : set.images) {
    const auto it = by_image.find(img.id);
    if (it == by_image.end()) {
      throw IntegrityError(dir + ": image " + std::to_string(img.id) +
                           " has no annotation");
    }
    const fs::path path = fs::path(dir) / img.file_name;
    Tensor image = read_ppm(path.string());
    if (image.shape[1] != img.height || image.shape[2] != img.width) {
      throw IntegrityError(path.string() +
                           ": pixel dimensions disagree with annotations");
    }
    bundle.images.push_back(std::move(image));
    bundle.ground_truths.push_back(GroundTruth{
        img.id, it->second->category_id, it->second->bbox});
  }
  return bundle;
}

void AttributionManifest::validate() const {
  std::set<std::size_t> indices;
  for (const AttributionEntry& entry : entries) {
    if (!indices.insert(entry.detection_index).second) {
      throw IntegrityError("duplicate detection_index " +
                           std::to_string(entry.detection_index) +
                           " in attribution manifest");
    }
  }
}

AttributionManifest read_attribution_manifest(const std::string& path) {
  const ordered_json root = parse_file(path);
  if (!root.is_object() || !root.contains("entries") ||
      !root["entries"].is_array()) {
    throw IntegrityError(path + ": expected an object with an entries array");
  }
  AttributionManifest manifest;
  for (const ordered_json& j : root["entries"]) {
    AttributionEntry entry;
    if (!j.contains("detection_index") || !j["detection_index"].is_number() ||
        !j.contains("image_id") || !j["image_id"].is_number() ||
        !j.contains("category_id") || !j["category_id"].is_number() ||
        !j.contains("grid_path") || !j["grid_path"].is_string()) {
      throw IntegrityError(path + ": malformed attribution entry");
    }
    entry.detection_index = j["detection_index"].get<std::size_t>();
    entry.image_id = j["image_id"].get<std::int64_t>();
    entry.category_id = j["category_id"].get<int>();
    entry.grid_path = j["grid_path"].get<std::string>();
    manifest.entries.push_back(std::move(entry));
  }
  manifest.validate();
  return manifest;
}

void write_attribution_manifest(const AttributionManifest& manifest,
                                const std::string& path) {
  manifest.validate();
  ordered_json root;
  root["entries"] = ordered_json::array();
  for (const AttributionEntry& entry : manifest.entries) {
    ordered_json j;
    j["detection_index"] = entry.detection_index;
    j["image_id"] = entry.image_id;
    j["category_id"] = entry.category_id;
    j["grid_path"] = entry.grid_path;
    root["entries"].push_back(std::move(j));
  }
  dump_to_file(root, path);
}

}  // namespace xdeval
