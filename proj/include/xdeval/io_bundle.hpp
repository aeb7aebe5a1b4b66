#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "xdeval/synth.hpp"

namespace xdeval {

// On-disk dataset layout under `dir`:
//   images/img_NNNNNN.ppm   one P6 file per image, named by image id
//   annotations.json        COCO-subset annotations for every image
//   manifest.json           domain parameters, seed, and toolkit version
void write_bundle(const DatasetBundle& bundle, const std::string& dir);
DatasetBundle read_bundle(const std::string& dir);

// Index tying exported attribution grids back to their detections.
struct AttributionEntry {
  std::size_t detection_index = 0;  // position in the detections file
  std::int64_t image_id = 0;
  int category_id = 0;
  std::string grid_path;  // relative to the manifest's directory
};

struct AttributionManifest {
  std::vector<AttributionEntry> entries;

  void validate() const;  // detection_index unique
};

AttributionManifest read_attribution_manifest(const std::string& path);
void write_attribution_manifest(const AttributionManifest& manifest,
                                const std::string& path);

}  // namespace xdeval
