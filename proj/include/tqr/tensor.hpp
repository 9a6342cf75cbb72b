#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace tqr {

// Dense row-major f64 tensor. Rank 0 (empty shape) is a scalar holding one
// value. Construction with data rejects NaN/Inf; everything downstream may
// assume finite contents.
class Tensor {
 public:
  Tensor() = default;
  explicit Tensor(std::vector<int> shape);
  Tensor(std::vector<int> shape, std::vector<double> data);

  static Tensor scalar(double v);
  static Tensor zeros_like(const Tensor& t);
  static Tensor full(std::vector<int> shape, double v);

  const std::vector<int>& shape() const { return shape_; }
  int ndim() const { return int(shape_.size()); }
  int dim(int i) const { return shape_[std::size_t(i)]; }
  std::int64_t size() const { return std::int64_t(data_.size()); }

  double* data() { return data_.data(); }
  const double* data() const { return data_.data(); }
  double& operator[](std::int64_t i) { return data_[std::size_t(i)]; }
  double operator[](std::int64_t i) const { return data_[std::size_t(i)]; }

  // value of a one-element tensor
  double item() const;

  // same data, new shape (element counts must agree)
  Tensor reshaped(std::vector<int> shape) const;

  bool same_shape(const Tensor& o) const { return shape_ == o.shape_; }
  std::string shape_str() const;

  // throws std::runtime_error naming `what` if any element is NaN/Inf
  void check_finite(const std::string& what) const;

 private:
  std::vector<int> shape_;
  std::vector<double> data_;
};

std::int64_t shape_product(const std::vector<int>& shape);

} // namespace tqr
