#include "tqr/tensor.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>

namespace tqr {

std::int64_t shape_product(const std::vector<int>& shape) {
  std::int64_t p = 1;
  for (int d : shape) {
    if (d <= 0) throw std::invalid_argument("tensor dimensions must be positive");
    p *= d;
  }
  return p;
}

Tensor::Tensor(std::vector<int> shape) : shape_(std::move(shape)) {
  data_.assign(std::size_t(shape_product(shape_)), 0.0);
}

Tensor::Tensor(std::vector<int> shape, std::vector<double> data)
    : shape_(std::move(shape)), data_(std::move(data)) {
  if (shape_product(shape_) != std::int64_t(data_.size()))
    throw std::invalid_argument("tensor shape/data size mismatch");
  check_finite("tensor construction");
}

Tensor Tensor::scalar(double v) { return Tensor({}, {v}); }

Tensor Tensor::zeros_like(const Tensor& t) { return Tensor(t.shape_); }

Tensor Tensor::full(std::vector<int> shape, double v) {
  Tensor t(std::move(shape));
  for (std::int64_t i = 0; i < t.size(); ++i) t[i] = v;
  return t;
}

double Tensor::item() const {
  if (data_.size() != 1) throw std::runtime_error("item() on tensor of size " + std::to_string(data_.size()));
  return data_[0];
}

Tensor Tensor::reshaped(std::vector<int> shape) const {
  if (shape_product(shape) != size())
    throw std::invalid_argument("reshape to incompatible size: " + shape_str());
  Tensor t;
  t.shape_ = std::move(shape);
  t.data_ = data_;
  return t;
}

std::string Tensor::shape_str() const {
  std::ostringstream os;
  os << '(';
  for (std::size_t i = 0; i < shape_.size(); ++i) os << (i ? "," : "") << shape_[i];
  os << ')';
  return os.str();
}

void Tensor::check_finite(const std::string& what) const {
  for (double v : data_)
    if (!std::isfinite(v)) throw std::runtime_error("non-finite value in " + what);
}

} // namespace tqr
