#include "tfn/point_cloud.hpp"

#include <cmath>
#include <stdexcept>

namespace tfn {

void PointCloud::validate() const {
  if (positions.rank() != 2 || positions.extent(1) != 3 || positions.extent(0) < 1) {
    throw std::invalid_argument("PointCloud: positions must be [n>=1, 3], got " +
                                NdArray::shape_to_string(positions.shape()));
  }
  for (const double x : positions.data()) {
    if (!std::isfinite(x)) throw std::invalid_argument("PointCloud: non-finite position");
  }
  const auto n = static_cast<size_t>(num_points());
  if (!masses.empty() && masses.size() != n) {
    throw std::invalid_argument("PointCloud: " + std::to_string(masses.size()) + " masses for " +
                                std::to_string(n) + " points");
  }
  if (!types.empty() && types.size() != n) {
    throw std::invalid_argument("PointCloud: " + std::to_string(types.size()) + " types for " +
                                std::to_string(n) + " points");
  }
  if (query_index >= static_cast<int64_t>(n)) {
    throw std::invalid_argument("PointCloud: query_index out of range");
  }
}

}  // namespace tfn
