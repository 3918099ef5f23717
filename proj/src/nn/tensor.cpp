// SPDX-License-Identifier: Apache-2.0
#include "kombo/nn/tensor.hpp"

#include <algorithm>
#include <cmath>

#include "kombo/error.hpp"

namespace kombo::nn {

std::string shape_string(const Shape& shape) {
  std::string out = "(";
  for (std::size_t i = 0; i < shape.size(); ++i) {
    if (i) out += ", ";
    out += std::to_string(shape[i]);
  }
  return out + ")";
}

std::size_t shape_size(const Shape& shape) {
  std::size_t n = 1;
  for (auto d : shape) n *= d;
  return n;
}

namespace {
void check_rank(const Shape& shape) {
  if (shape.empty() || shape.size() > 3) {
    throw Error(ErrorKind::ShapeError, "tensor rank must be 1..3, got " + shape_string(shape));
  }
}
}  // namespace

template <typename T>
Tensor<T>::Tensor(Shape shape, T fill) : shape_(std::move(shape)) {
  check_rank(shape_);
  data_.assign(shape_size(shape_), fill);
}

template <typename T>
Tensor<T>::Tensor(Shape shape, std::vector<T> values) : shape_(std::move(shape)), data_(std::move(values)) {
  check_rank(shape_);
  if (data_.size() != shape_size(shape_)) {
    throw Error(ErrorKind::ShapeError, std::to_string(data_.size()) + " values for shape " + shape_string(shape_));
  }
}

template <typename T>
void Tensor<T>::fill(T value) {
  std::fill(data_.begin(), data_.end(), value);
}

template <typename T>
void Tensor<T>::reshape(Shape shape) {
  check_rank(shape);
  if (shape_size(shape) != data_.size()) {
    throw Error(ErrorKind::ShapeError, "cannot reshape " + shape_string(shape_) + " to " + shape_string(shape));
  }
  shape_ = std::move(shape);
}

template <typename T>
bool Tensor<T>::all_finite() const {
  return std::all_of(data_.begin(), data_.end(), [](T v) { return std::isfinite(v); });
}

template class Tensor<float>;
template class Tensor<double>;

}  // namespace kombo::nn
