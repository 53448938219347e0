#include "tfn/tetris.hpp"

namespace tfn::tasks {

const std::vector<TetrisShape>& tetris_shapes() {
  static const std::vector<TetrisShape> shapes = {
      {"square", 0, {{{0, 0, 0}, {1, 0, 0}, {0, 1, 0}, {1, 1, 0}}}},
      {"line", 1, {{{0, 0, 0}, {0, 0, 1}, {0, 0, 2}, {0, 0, 3}}}},
      {"chiral_l", 2, {{{0, 0, 0}, {0, 0, 1}, {1, 0, 0}, {1, 1, 0}}}},
      {"chiral_r", 3, {{{0, 0, 0}, {0, 0, 1}, {1, 0, 0}, {1, -1, 0}}}},
      {"corner", 4, {{{0, 0, 0}, {0, 0, 1}, {0, 1, 0}, {1, 0, 0}}}},
      {"lshape", 5, {{{0, 0, 0}, {0, 0, 1}, {0, 0, 2}, {0, 1, 0}}}},
      {"tshape", 6, {{{0, 0, 0}, {0, 0, 1}, {0, 0, 2}, {0, 1, 1}}}},
      {"zigzag", 7, {{{0, 0, 0}, {1, 0, 0}, {1, 1, 0}, {2, 1, 0}}}},
  };
  return shapes;
}

PointCloud tetris_cloud(const TetrisShape& shape) {
  PointCloud cloud;
  cloud.positions = NdArray({4, 3});
  for (int64_t a = 0; a < 4; ++a) {
    for (int64_t k = 0; k < 3; ++k) {
      cloud.positions.at({a, k}) = shape.blocks[static_cast<size_t>(a)][static_cast<size_t>(k)];
    }
  }
  return cloud;
}

}  // namespace tfn::tasks
