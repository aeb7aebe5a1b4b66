#pragma once

#include "xdeval/errors.hpp"

namespace xdeval {

// Axis-aligned box in continuous pixel coordinates, [x_min, x_min + width) x
// [y_min, y_min + height). Width and height are strictly positive and all
// fields finite; this is checked once at construction so the metric code can
// assume validity.
class Box {
public:
  Box(double x_min, double y_min, double width, double height);

  double x_min() const { return x_min_; }
  double y_min() const { return y_min_; }
  double width() const { return width_; }
  double height() const { return height_; }
  double x_max() const { return x_min_ + width_; }
  double y_max() const { return y_min_ + height_; }
  double area() const { return width_ * height_; }

private:
  double x_min_;
  double y_min_;
  double width_;
  double height_;
};

// Intersection-over-union of two boxes; 0 when disjoint.
double iou(const Box& a, const Box& b);

}  // namespace xdeval
