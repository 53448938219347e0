#include "tfn/nd_array.hpp"

#include <cmath>
#include <numeric>
#include <sstream>
#include <stdexcept>

namespace tfn {

int64_t shape_numel(const std::vector<int64_t>& shape) {
  int64_t n = 1;
  for (int64_t e : shape) n *= e;
  return n;
}

NdArray::NdArray(std::vector<int64_t> shape)
    : shape_(std::move(shape)), data_(static_cast<size_t>(shape_numel(shape_)), 0.0) {}

NdArray::NdArray(std::vector<int64_t> shape, std::vector<double> data)
    : shape_(std::move(shape)), data_(std::move(data)) {
  if (static_cast<int64_t>(data_.size()) != shape_numel(shape_)) {
    throw std::invalid_argument("NdArray: data length " + std::to_string(data_.size()) +
                                " does not match shape " + shape_to_string(shape_));
  }
}

NdArray NdArray::full(std::vector<int64_t> shape, double value) {
  NdArray out(std::move(shape));
  for (double& x : out.data_) x = value;
  return out;
}

NdArray NdArray::scalar(double value) { return NdArray({}, {value}); }

NdArray NdArray::vector(std::vector<double> values) {
  const int64_t n = static_cast<int64_t>(values.size());
  return NdArray({n}, std::move(values));
}

std::vector<int64_t> NdArray::strides() const {
  std::vector<int64_t> s(shape_.size(), 1);
  for (int64_t i = static_cast<int64_t>(shape_.size()) - 2; i >= 0; --i) {
    s[static_cast<size_t>(i)] = s[static_cast<size_t>(i + 1)] * shape_[static_cast<size_t>(i + 1)];
  }
  return s;
}

NdArray NdArray::reshaped(std::vector<int64_t> new_shape) const {
  if (shape_numel(new_shape) != size()) {
    throw std::invalid_argument("NdArray::reshaped: cannot reshape " + shape_to_string(shape_) +
                                " to " + shape_to_string(new_shape));
  }
  return NdArray(std::move(new_shape), std::vector<double>(data_.begin(), data_.end()));
}

double NdArray::max_abs() const {
  double m = 0.0;
  for (double x : data_) m = std::max(m, std::abs(x));
  return m;
}

double NdArray::sum() const { return std::accumulate(data_.begin(), data_.end(), 0.0); }

std::string NdArray::shape_to_string(const std::vector<int64_t>& shape) {
  std::ostringstream os;
  os << '[';
  for (size_t i = 0; i < shape.size(); ++i) {
    if (i) os << ", ";
    os << shape[i];
  }
  os << ']';
  return os.str();
}

int64_t NdArray::flat_index(std::initializer_list<int64_t> idx) const {
  if (idx.size() != shape_.size()) {
    throw std::invalid_argument("NdArray: index rank " + std::to_string(idx.size()) +
                                " does not match shape " + shape_to_string(shape_));
  }
  int64_t flat = 0;
  size_t axis = 0;
  for (int64_t i : idx) {
    flat = flat * shape_[axis] + i;
    ++axis;
  }
  return flat;
}

std::vector<int64_t> broadcast_shapes(const std::vector<int64_t>& a, const std::vector<int64_t>& b) {
  const size_t rank = std::max(a.size(), b.size());
  std::vector<int64_t> out(rank, 1);
  for (size_t i = 0; i < rank; ++i) {
    const int64_t ea = i < rank - a.size() ? 1 : a[i - (rank - a.size())];
    const int64_t eb = i < rank - b.size() ? 1 : b[i - (rank - b.size())];
    if (ea != eb && ea != 1 && eb != 1) {
      throw std::invalid_argument("broadcast: incompatible shapes " + NdArray::shape_to_string(a) +
                                  " and " + NdArray::shape_to_string(b));
    }
    out[i] = std::max(ea, eb);
  }
  return out;
}

NdArray reduce_to_shape(const NdArray& value, const std::vector<int64_t>& target_shape) {
  if (value.shape() == target_shape) return value;
  NdArray out(target_shape);
  const auto& vshape = value.shape();
  const size_t vrank = vshape.size();
  const size_t trank = target_shape.size();
  const auto tstrides = out.strides();

  std::vector<int64_t> idx(vrank, 0);
  const auto vdata = value.data();
  for (int64_t flat = 0; flat < value.size(); ++flat) {
    // map the value index onto the (right-aligned) target index, collapsing
    // axes where the target extent is 1
    int64_t tflat = 0;
    for (size_t t = 0; t < trank; ++t) {
      const size_t v = t + (vrank - trank);
      const int64_t i = target_shape[t] == 1 ? 0 : idx[v];
      tflat += i * tstrides[t];
    }
    out[tflat] += vdata[static_cast<size_t>(flat)];
    for (int64_t axis = static_cast<int64_t>(vrank) - 1; axis >= 0; --axis) {
      if (++idx[static_cast<size_t>(axis)] < vshape[static_cast<size_t>(axis)]) break;
      idx[static_cast<size_t>(axis)] = 0;
    }
  }
  return out;
}

}  // namespace tfn
