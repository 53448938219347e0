#pragma once

#include <cstdint>
#include <vector>

#include "tfn/nd_array.hpp"

namespace tfn {

/// Point positions plus optional per-point attributes.
///
/// masses/types are either empty or sized num_points.  query_index marks a
/// designated evaluation point (the moment-of-inertia tasks); -1 means none.
struct PointCloud {
  NdArray positions;  // [n, 3]
  std::vector<double> masses;
  std::vector<int> types;
  int64_t query_index = -1;

  int64_t num_points() const { return positions.rank() == 2 ? positions.extent(0) : 0; }

  /// Throws std::invalid_argument unless positions are a finite [n>=1, 3]
  /// array and attribute sizes match.
  void validate() const;
};

}  // namespace tfn
