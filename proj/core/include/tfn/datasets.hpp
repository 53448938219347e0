#pragma once

#include <array>
#include <string>
#include <vector>

#include "tfn/nd_array.hpp"
#include "tfn/point_cloud.hpp"
#include "tfn/random.hpp"
#include "tfn/tetris.hpp"

namespace tfn::tasks {

/// One training/evaluation record; which target field applies depends on task.
struct LabeledSample {
  std::string task;  // tetris | gravity | inertia | missing_point
  PointCloud cloud;
  uint64_t seed = 0;

  int label = -1;                               // tetris class
  NdArray vectors;                              // gravity: [n, 3] accelerations
  NdArray matrix;                               // inertia: [3, 3] tensor about the query point
  std::array<double, 3> missing_position{};     // missing point: removed block
  int missing_type = -1;                        // missing point: coordination class (0-based)
};

/// The 8 shapes, optionally each under a fresh random rotation/translation.
std::vector<LabeledSample> gen_tetris(bool rotate, bool translate, uint64_t seed);

/// count records cycling through the shapes (test sets of rotated instances).
std::vector<LabeledSample> gen_tetris_n(int count, bool rotate, bool translate, uint64_t seed);

/// 2..10 points in a side-4 cube, masses U[0.5, 2], min pairwise distance 0.5
/// by rejection; target a_p = -sum_{n != p} m_n rhat_np / r_np^2 (G = 1).
LabeledSample gen_gravity(uint64_t seed);

/// 2..10 points in a side-1 cube plus a designated query point (appended with
/// mass 0); target I_ij = sum_p m_p [(d.d) delta_ij - d_i d_j], d = r_p - q.
LabeledSample gen_inertia(uint64_t seed);

std::vector<LabeledSample> gen_gravity_set(int count, uint64_t seed);
std::vector<LabeledSample> gen_inertia_set(int count, uint64_t seed);

/// The (shape, removed block) pairs used by the missing-point toy: exactly
/// those whose completion is geometrically determined by the three remaining
/// blocks (a 3-point context cannot carry chirality or break its own
/// symmetries, which rules the other pairs out).
struct MissingPointCase {
  int shape = 0;
  int removed = 0;
};
const std::vector<MissingPointCase>& missing_point_cases();

/// Coordination classes for the removed block (neighbours at unit distance
/// within the full shape), 0-based: class k = k+1 neighbours.
int missing_point_num_types();

std::vector<LabeledSample> gen_missing_point(int count, bool rotate, bool translate, uint64_t seed);

/// JSON-lines persistence; first line is a schema/config-hash header.
void save_jsonl(const std::string& path, const std::vector<LabeledSample>& samples,
                const std::string& config_hash);
std::vector<LabeledSample> load_jsonl(const std::string& path);

}  // namespace tfn::tasks
