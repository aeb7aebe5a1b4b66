#pragma once

#include <cmath>
#include <cstddef>
#include <string>
#include <vector>

#include "xdeval/errors.hpp"

namespace xdeval {

// Row-major real-valued attribution map. Every value is finite; checked at
// construction.
class Grid {
public:
  Grid(std::size_t width, std::size_t height, std::vector<double> values)
      : width_(width), height_(height), values_(std::move(values)) {
    if (width_ == 0 || height_ == 0) {
      throw ValidationError("grid dimensions must be positive");
    }
    if (values_.size() != width_ * height_) {
      throw ValidationError("grid value count " +
                            std::to_string(values_.size()) +
                            " does not match " + std::to_string(width_) + "x" +
                            std::to_string(height_));
    }
    for (double v : values_) {
      if (!std::isfinite(v)) {
        throw ValidationError("grid values must be finite");
      }
    }
  }

  std::size_t width() const { return width_; }
  std::size_t height() const { return height_; }
  const std::vector<double>& values() const { return values_; }

  double at(std::size_t row, std::size_t col) const {
    return values_[row * width_ + col];
  }

private:
  std::size_t width_;
  std::size_t height_;
  std::vector<double> values_;
};

}  // namespace xdeval
