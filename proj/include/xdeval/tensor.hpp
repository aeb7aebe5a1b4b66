#pragma once

#include <cstddef>
#include <initializer_list>
#include <vector>

namespace xdeval {

// Dense row-major tensor of doubles.
struct Tensor {
  std::vector<std::size_t> shape;
  std::vector<double> data;

  Tensor() = default;
  Tensor(std::vector<std::size_t> shape_in, std::vector<double> data_in);

  static Tensor zeros(std::initializer_list<std::size_t> dims);
  static Tensor zeros(const std::vector<std::size_t>& dims);

  std::size_t size() const { return data.size(); }
  bool same_shape(const Tensor& other) const { return shape == other.shape; }

  // 3-D (c, y, x) accessors for feature maps; shape must be {C, H, W}.
  double& at3(std::size_t c, std::size_t y, std::size_t x) {
    return data[(c * shape[1] + y) * shape[2] + x];
  }
  double at3(std::size_t c, std::size_t y, std::size_t x) const {
    return data[(c * shape[1] + y) * shape[2] + x];
  }

  void fill(double value);
  bool all_finite() const;
};

std::size_t shape_product(const std::vector<std::size_t>& dims);

}  // namespace xdeval
