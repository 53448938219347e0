#pragma once

#include <map>

#include "tfn/autodiff.hpp"
#include "tfn/nd_array.hpp"

namespace tfn::layers {

/// Per-point features keyed by rotation order: l -> [num_points, channels, 2l+1].
using FeatureMap = std::map<int, ad::Var>;

/// Numeric twin of FeatureMap, used at model boundaries (datasets, the
/// equivariance harness) where no tape is in play.
using FeatureValues = std::map<int, NdArray>;

/// Common num_points across orders; throws on an empty map, inconsistent
/// point counts, wrong ranks, or a channel count of zero.
int64_t feature_num_points(const FeatureValues& features);
int64_t feature_num_points(const ad::Tape& tape, const FeatureMap& features);

FeatureValues feature_values(const ad::Tape& tape, const FeatureMap& features);
FeatureMap feature_constants(ad::Tape& tape, const FeatureValues& values);

}  // namespace tfn::layers
