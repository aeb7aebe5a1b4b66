#include "xdeval/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace xdeval {

Box::Box(double x_min, double y_min, double width, double height)
    : x_min_(x_min), y_min_(y_min), width_(width), height_(height) {
  if (!std::isfinite(x_min) || !std::isfinite(y_min) ||
      !std::isfinite(width) || !std::isfinite(height)) {
    throw ValidationError("box fields must be finite");
  }
  if (!(width > 0.0) || !(height > 0.0)) {
    throw ValidationError("box width and height must be positive (got " +
                          std::to_string(width) + " x " +
                          std::to_string(height) + ")");
  }
}

double iou(const Box& a, const Box& b) {
  const double ix = std::min(a.x_max(), b.x_max()) - std::max(a.x_min(), b.x_min());
  const double iy = std::min(a.y_max(), b.y_max()) - std::max(a.y_min(), b.y_min());
  if (ix <= 0.0 || iy <= 0.0) return 0.0;
  const double inter = ix * iy;
  return inter / (a.area() + b.area() - inter);
}

}  // namespace xdeval
