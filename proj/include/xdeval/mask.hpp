#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "xdeval/errors.hpp"
#include "xdeval/geometry.hpp"

namespace xdeval {

// Row-major binary pixel mask.
class BinaryMask {
public:
  BinaryMask(std::size_t width, std::size_t height,
             std::vector<std::uint8_t> bits);

  static BinaryMask zeros(std::size_t width, std::size_t height);

  std::size_t width() const { return width_; }
  std::size_t height() const { return height_; }
  const std::vector<std::uint8_t>& bits() const { return bits_; }

  bool at(std::size_t row, std::size_t col) const {
    return bits_[row * width_ + col] != 0;
  }
  void set(std::size_t row, std::size_t col, bool value) {
    bits_[row * width_ + col] = value ? 1 : 0;
  }

  std::size_t popcount() const;

private:
  std::size_t width_;
  std::size_t height_;
  std::vector<std::uint8_t> bits_;
};

// Pixel-membership rule: pixel (row r, col c) is set iff its center
// (c + 0.5, r + 0.5) lies in the half-open box interval. Regions outside the
// image are clipped; a box entirely outside yields an all-zero mask.
BinaryMask rasterize(const Box& box, std::size_t width, std::size_t height);

// Bitwise OR of the rasterizations of all boxes.
BinaryMask union_mask(const std::vector<Box>& boxes, std::size_t width,
                      std::size_t height);

}  // namespace xdeval
