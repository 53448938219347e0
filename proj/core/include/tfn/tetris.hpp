#pragma once

#include <array>
#include <string>
#include <vector>

#include "tfn/point_cloud.hpp"

namespace tfn::tasks {

/// One of the eight canonical 3D Tetris shapes: four unit-cube-corner points
/// on the integer lattice.
struct TetrisShape {
  std::string name;
  int label = 0;
  std::array<std::array<int, 3>, 4> blocks{};
};

/// The canonical shapes, fixed order; indices 2 and 3 are the chiral pair
/// (identical pairwise distances, opposite handedness).
const std::vector<TetrisShape>& tetris_shapes();

PointCloud tetris_cloud(const TetrisShape& shape);

}  // namespace tfn::tasks
