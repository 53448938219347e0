#pragma once

#include <cstdint>
#include <initializer_list>
#include <span>
#include <string>
#include <vector>

namespace tfn {

/// Dense row-major array of 64-bit reals with a dynamic shape.
///
/// This is the single value type the autodiff tape, the SO(3) tables and the
/// layers all exchange.  It is deliberately small: shape bookkeeping, strides,
/// broadcasting helpers, and nothing clever.
class NdArray {
 public:
  NdArray() = default;
  explicit NdArray(std::vector<int64_t> shape);
  NdArray(std::vector<int64_t> shape, std::vector<double> data);

  static NdArray zeros(std::vector<int64_t> shape) { return NdArray(std::move(shape)); }
  static NdArray full(std::vector<int64_t> shape, double value);
  static NdArray scalar(double value);
  /// 1-D array from an explicit list of values.
  static NdArray vector(std::vector<double> values);

  const std::vector<int64_t>& shape() const { return shape_; }
  int64_t rank() const { return static_cast<int64_t>(shape_.size()); }
  int64_t extent(int64_t axis) const { return shape_[static_cast<size_t>(axis)]; }
  int64_t size() const { return static_cast<int64_t>(data_.size()); }

  std::span<double> data() { return data_; }
  std::span<const double> data() const { return data_; }

  double& operator[](int64_t flat) { return data_[static_cast<size_t>(flat)]; }
  double operator[](int64_t flat) const { return data_[static_cast<size_t>(flat)]; }

  double& at(std::initializer_list<int64_t> idx) { return data_[static_cast<size_t>(flat_index(idx))]; }
  double at(std::initializer_list<int64_t> idx) const { return data_[static_cast<size_t>(flat_index(idx))]; }

  /// Row-major strides (in elements).
  std::vector<int64_t> strides() const;

  bool same_shape(const NdArray& other) const { return shape_ == other.shape_; }

  /// Reinterprets the data with a new shape of identical element count.
  NdArray reshaped(std::vector<int64_t> new_shape) const;

  double max_abs() const;
  double sum() const;

  /// "[2, 3, 5]" - used in error messages and the checkpoint format.
  static std::string shape_to_string(const std::vector<int64_t>& shape);

 private:
  int64_t flat_index(std::initializer_list<int64_t> idx) const;

  std::vector<int64_t> shape_;
  std::vector<double> data_;
};

int64_t shape_numel(const std::vector<int64_t>& shape);

/// NumPy-style broadcast of two shapes; throws std::invalid_argument with both
/// shapes in the message when they are incompatible.
std::vector<int64_t> broadcast_shapes(const std::vector<int64_t>& a, const std::vector<int64_t>& b);

/// Sums `value` over the axes that were broadcast to reach `value.shape()`
/// from `target_shape` (the adjoint of broadcasting).
NdArray reduce_to_shape(const NdArray& value, const std::vector<int64_t>& target_shape);

}  // namespace tfn
