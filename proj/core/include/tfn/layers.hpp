#pragma once

#include <map>
#include <optional>
#include <vector>

#include "tfn/autodiff.hpp"
#include "tfn/clebsch_gordan.hpp"
#include "tfn/feature_map.hpp"
#include "tfn/point_cloud.hpp"
#include "tfn/radial.hpp"
#include "tfn/rotation.hpp"

namespace tfn::layers {

/// One convolution path: order of the input features, of the filter
/// harmonic, and of the produced output.  channels is the (shared, depthwise)
/// channel count.
struct FilterSpec {
  int l_i = 0;
  int l_f = 0;
  int l_o = 0;
  int channels = 1;

  /// Throws unless |l_i - l_f| <= l_o <= l_i + l_f and channels >= 1.
  void validate() const;
};

/// Pairwise geometry of one cloud, precomputed once per forward pass:
/// distances r_ab = |r_a - r_b| and spherical harmonics of the unit
/// displacements, for every filter order a model needs.
///
/// The diagonal (b = a) has no direction; harmonics rows there are zeroed for
/// l > 0 and kept at the constant 1/sqrt(4pi) for l = 0, which realizes the
/// r = 0 filter convention (only rotation-invariant content survives at the
/// self-pair).  A positive cutoff zeroes every harmonic row with r_ab beyond
/// it (off by default).
struct PairGeometry {
  int64_t n = 0;
  NdArray distances;          // [n*n], row-major over (a, b)
  std::map<int, NdArray> sh;  // l -> [n, n, 2l+1]

  static PairGeometry from_cloud(const PointCloud& cloud, const std::vector<int>& filter_orders,
                                 double cutoff = 0.0);
};

/// Numeric filter value F^(l_f)_cm(rvec) = R_c(r) Y^(l_f)_m(rhat) for one
/// displacement; [channels, 2l_f+1].  At rvec = 0 this is zero for l_f > 0
/// and R(0) Y^(0) for l_f = 0.
NdArray filter_eval(const FilterSpec& spec, const RadialNet& net,
                    const std::map<std::string, NdArray>& radial_params, const so3::Vec3& displacement);

/// Pointwise convolution at one output order:
/// L^(l_o)_acm = sum_{m_f m_i} C sum_b F(r_ab) V_b, depthwise in channels.
/// input must be [n, channels, 2 l_i + 1].
ad::Var point_convolution(ad::Tape& tape, const FilterSpec& spec, const RadialNet& net,
                          const RadialParams& radial, const PairGeometry& geom,
                          const so3::CGTable& cg, ad::Var input);

/// Per-order channel mix with m-independent weights [c_out, c_in]; biases are
/// only admissible at l = 0.
ad::Var self_interaction(ad::Tape& tape, int l, ad::Var weights, std::optional<ad::Var> bias,
                         ad::Var input);

enum class Eta { ShiftedSoftplus, Identity };

/// l = 0: eta(V + b).  l > 0: eta(|V| + b) V, with |V| the per-channel norm
/// over m.  bias is [channels].
ad::Var norm_nonlinearity(ad::Tape& tape, int l, Eta eta, ad::Var bias, ad::Var input);

/// Channel-axis concatenation per order; orders present in only one input
/// pass through.  All inputs must share num_points.
FeatureMap concat_features(const std::vector<FeatureMap>& inputs);

/// Sum over the point axis: l -> [channels, 2l+1].
std::map<int, ad::Var> global_pool(const FeatureMap& input);

/// softmax(logits)-weighted average of (r_a + delta_a); logits [n],
/// displacements [n, 3] Cartesian.  Returns a 3-vector.
ad::Var vote_aggregate(ad::Tape& tape, ad::Var logits, ad::Var displacements, const PointCloud& cloud);

ad::Var apply_eta(Eta eta, ad::Var x);

}  // namespace tfn::layers
