#include "xdeval/mask.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

namespace xdeval {

BinaryMask::BinaryMask(std::size_t width, std::size_t height,
                       std::vector<std::uint8_t> bits)
    : width_(width), height_(height), bits_(std::move(bits)) {
  if (width_ == 0 || height_ == 0) {
    throw ValidationError("mask dimensions must be positive");
  }
  if (bits_.size() != width_ * height_) {
    throw ValidationError("mask bit count " + std::to_string(bits_.size()) +
                          " does not match " + std::to_string(width_) + "x" +
                          std::to_string(height_));
  }
  for (auto& b : bits_) b = b ? 1 : 0;
}

BinaryMask BinaryMask::zeros(std::size_t width, std::size_t height) {
  return BinaryMask(width, height,
                    std::vector<std::uint8_t>(width * height, 0));
}

std::size_t BinaryMask::popcount() const {
  return static_cast<std::size_t>(
      std::accumulate(bits_.begin(), bits_.end(), std::size_t{0}));
}

BinaryMask rasterize(const Box& box, std::size_t width, std::size_t height) {
  if (width == 0 || height == 0) {
    throw ValidationError("rasterize target dimensions must be positive");
  }
  BinaryMask mask = BinaryMask::zeros(width, height);

  // Candidate index range, then the exact center-containment test per pixel.
  const auto clip = [](double v, std::size_t n) {
    if (v < 0.0) return std::size_t{0};
    if (v >= static_cast<double>(n)) return n;
    return static_cast<std::size_t>(v);
  };
  const std::size_t c0 = clip(std::floor(box.x_min()), width);
  const std::size_t c1 = clip(std::ceil(box.x_max()) + 1.0, width);
  const std::size_t r0 = clip(std::floor(box.y_min()), height);
  const std::size_t r1 = clip(std::ceil(box.y_max()) + 1.0, height);

  for (std::size_t r = r0; r < r1; ++r) {
    const double cy = static_cast<double>(r) + 0.5;
    if (cy < box.y_min() || cy >= box.y_max()) continue;
    for (std::size_t c = c0; c < c1; ++c) {
      const double cx = static_cast<double>(c) + 0.5;
      if (cx >= box.x_min() && cx < box.x_max()) mask.set(r, c, true);
    }
  }
  return mask;
}

BinaryMask union_mask(const std::vector<Box>& boxes, std::size_t width,
                      std::size_t height) {
  if (width == 0 || height == 0) {
    throw ValidationError("union_mask target dimensions must be positive");
  }
  BinaryMask out = BinaryMask::zeros(width, height);
  for (const Box& box : boxes) {
    BinaryMask m = rasterize(box, width, height);
    for (std::size_t i = 0; i < out.bits().size(); ++i) {
      if (m.bits()[i]) out.set(i / width, i % width, true);
    }
  }
  return out;
}

}  // namespace xdeval
