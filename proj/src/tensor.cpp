#include "xdeval/tensor.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "xdeval/errors.hpp"

namespace xdeval {

std::size_t shape_product(const std::vector<std::size_t>& dims) {
  std::size_t n = 1;
  for (std::size_t d : dims) n *= d;
  return n;
}

Tensor::Tensor(std::vector<std::size_t> shape_in, std::vector<double> data_in)
    : shape(std::move(shape_in)), data(std::move(data_in)) {
  if (shape_product(shape) != data.size()) {
    throw ShapeMismatch("tensor data length " + std::to_string(data.size()) +
                        " does not match its shape");
  }
}

Tensor Tensor::zeros(std::initializer_list<std::size_t> dims) {
  return zeros(std::vector<std::size_t>(dims));
}

Tensor Tensor::zeros(const std::vector<std::size_t>& dims) {
  Tensor t;
  t.shape = dims;
  t.data.assign(shape_product(dims), 0.0);
  return t;
}

void Tensor::fill(double value) {
  std::fill(data.begin(), data.end(), value);
}

bool Tensor::all_finite() const {
  return std::all_of(data.begin(), data.end(),
                     [](double v) { return std::isfinite(v); });
}

}  // namespace xdeval
