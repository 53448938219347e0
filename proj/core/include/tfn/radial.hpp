#pragma once

#include <map>
#include <string>
#include <vector>

#include "tfn/autodiff.hpp"
#include "tfn/nd_array.hpp"

namespace tfn::layers {

/// Gaussian radial basis + two dense layers, following the SchNet recipe the
/// demonstrations use: centers evenly spaced on [r_min, r_max], variance half
/// the center spacing, hidden activation shifted softplus.
struct RadialConfig {
  int n_basis = 30;
  double r_min = 0.0;
  double r_max = 2.0;
  int hidden = 16;

  double spacing() const { return (r_max - r_min) / (n_basis - 1); }
  double variance() const { return 0.5 * spacing(); }
};

/// One learned radial function bundle R^(l_f, l_i)_c: outputs `channels`
/// values per distance.
struct RadialNet {
  RadialConfig config;
  int channels = 1;
};

/// Fixed (non-learned) basis expansion: [P] distances -> [P, n_basis].
NdArray radial_basis(const RadialConfig& config, const NdArray& distances);

/// Tape bindings of the four parameter tensors.
/// Shapes: w1 [n_basis, hidden], b1 [hidden], w2 [hidden, channels], b2 [channels].
struct RadialParams {
  ad::Var w1, b1, w2, b2;
};

std::map<std::string, std::vector<int64_t>> radial_param_shapes(const RadialNet& net);

/// Differentiable forward over a batch of distances [P] -> [P, channels].
ad::Var radial_forward(ad::Tape& tape, const RadialNet& net, const RadialParams& params,
                       const NdArray& distances);

/// Convenience single-distance evaluation (throws on r < 0); params keyed
/// "w1", "b1", "w2", "b2".
std::vector<double> radial_eval(const RadialNet& net, const std::map<std::string, NdArray>& params,
                                double r);

}  // namespace tfn::layers
