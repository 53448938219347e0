#pragma once

#include <functional>
#include <string>
#include <vector>

#include "tfn/clebsch_gordan.hpp"
#include "tfn/feature_map.hpp"
#include "tfn/point_cloud.hpp"
#include "tfn/rotation.hpp"

namespace tfn::equiv {

/// A model as the harness exercises it: pure numeric function of a cloud and
/// per-point input features.  Whole networks that derive their own input
/// features may ignore the second argument.
using FeatureModel =
    std::function<layers::FeatureValues(const PointCloud&, const layers::FeatureValues&)>;

/// Position-valued model (the vote head): returns a Cartesian 3-vector.
using PositionModel = std::function<so3::Vec3(const PointCloud&, const layers::FeatureValues&)>;

struct TrialResidual {
  int trial = 0;
  int order = 0;  // -1 for position outputs
  double residual = 0.0;
};

struct EquivarianceReport {
  std::string transform;  // rotation | translation | permutation | composition
  std::string subject;    // free-form label for tables/JSON
  double tolerance = 0.0;
  std::vector<TrialResidual> residuals;
  double max_residual = 0.0;
  double mean_residual = 0.0;
  bool pass = false;

  void finalize();
  std::string to_json() const;
  std::string to_table() const;
};

/// Transform helpers (shared with tests and the CLI).
PointCloud rotate_cloud(const PointCloud& cloud, const so3::Rotation& g);
PointCloud translate_cloud(const PointCloud& cloud, const so3::Vec3& t);
PointCloud permute_cloud(const PointCloud& cloud, const std::vector<int64_t>& perm);
layers::FeatureValues rotate_features(const layers::FeatureValues& features, const so3::Rotation& g,
                                      const so3::CGTable& cg);
layers::FeatureValues permute_features(const layers::FeatureValues& features,
                                       const std::vector<int64_t>& perm);

/// Inputs are normalized to unit RMS before checking; outputs with a leading
/// extent of 1 (pooled results) are compared without unshuffling under
/// permutations.  Missing/extra orders between the two runs are an error.
EquivarianceReport check_rotation(const FeatureModel& model, const PointCloud& cloud,
                                  const layers::FeatureValues& features, const so3::CGTable& cg,
                                  int trials, double tol, uint64_t seed);
EquivarianceReport check_translation(const FeatureModel& model, const PointCloud& cloud,
                                     const layers::FeatureValues& features, int trials, double tol,
                                     uint64_t seed);
EquivarianceReport check_permutation(const FeatureModel& model, const PointCloud& cloud,
                                     const layers::FeatureValues& features, int trials, double tol,
                                     uint64_t seed);

/// Layer stack: per-layer residuals at the actual intermediate features plus
/// the end-to-end residual; passes when the end-to-end residual stays under
/// tol and under the summed per-layer residuals (+tol).
EquivarianceReport check_composition(const std::vector<FeatureModel>& stack, const PointCloud& cloud,
                                     const layers::FeatureValues& features, const so3::CGTable& cg,
                                     int trials, double tol, uint64_t seed);

EquivarianceReport check_rotation_position(const PositionModel& model, const PointCloud& cloud,
                                           const layers::FeatureValues& features, const so3::CGTable& cg,
                                           int trials, double tol, uint64_t seed);
EquivarianceReport check_translation_position(const PositionModel& model, const PointCloud& cloud,
                                              const layers::FeatureValues& features, int trials,
                                              double tol, uint64_t seed);
EquivarianceReport check_permutation_position(const PositionModel& model, const PointCloud& cloud,
                                              const layers::FeatureValues& features, int trials,
                                              double tol, uint64_t seed);

}  // namespace tfn::equiv
