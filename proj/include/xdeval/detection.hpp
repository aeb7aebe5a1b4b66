#pragma once

#include <cstdint>

#include "xdeval/geometry.hpp"

namespace xdeval {

// A scored model prediction for one image.
struct Detection {
  std::int64_t image_id;
  int category_id;  // >= 1
  Box box;
  double score;
};

// An annotated object.
struct GroundTruth {
  std::int64_t image_id;
  int category_id;  // >= 1
  Box box;
};

}  // namespace xdeval
