#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "tfn/clebsch_gordan.hpp"
#include "tfn/layers.hpp"
#include "tfn/point_cloud.hpp"

namespace tfn::model {

/// One record of the architecture description.  Which fields matter depends
/// on `kind`; see the README for the documented JSON schema.
struct LayerRecord {
  std::string kind;  // input | conv | self_interaction | norm_nonlinearity |
                     // pool | dense | vote | inertia_readout

  // input
  std::string feature = "ones";  // ones | mass

  // conv
  std::vector<std::array<int, 3>> paths;  // {l_i, l_f, l_o}
  layers::RadialConfig radial;
  double cutoff = 0.0;  // hard pair cutoff, 0 disables

  // self_interaction: output channels per order (input channels are derived)
  std::map<int, int> channels;
  bool bias = true;  // l = 0 bias

  // norm_nonlinearity
  std::string eta = "shifted_softplus";
  std::map<int, std::string> eta_per_l;

  // dense (applies to pooled l = 0 features)
  int out = 0;

  // vote
  int types = 1;
};

struct ModelSpec {
  std::string task;  // tetris | gravity | inertia | missing_point
  std::vector<LayerRecord> layers;

  int max_order() const;
};

std::string model_spec_to_json(const ModelSpec& spec);
ModelSpec model_spec_from_json(const std::string& text);

/// Parameter-name prefix of one conv path, e.g. "layer1.conv.li0_lf1_lo1".
std::string conv_param_prefix(size_t layer_index, const std::array<int, 3>& path);

using ParamStore = std::map<std::string, NdArray>;

/// Network = architecture + parameters + the SO(3) tables they need.
///
/// forward() stages a fresh computation on the caller's tape: parameters are
/// copied in as leaves (per the tape's no-sharing rule) and their Vars are
/// handed back so the training loop can fetch gradients by name.
class Network {
 public:
  explicit Network(ModelSpec spec);

  const ModelSpec& spec() const { return spec_; }
  const so3::CGTable& cg() const { return cg_; }

  /// Declared parameter shapes, derived by walking the records.
  const std::map<std::string, std::vector<int64_t>>& param_shapes() const { return param_shapes_; }

  /// Xavier-uniform weights, zero biases; deterministic in seed.
  void init_params(uint64_t seed);

  ParamStore& params() { return params_; }
  const ParamStore& params() const { return params_; }
  /// Validates names and shapes; throws with both shapes on mismatch.
  void set_params(ParamStore params);

  struct Output {
    layers::FeatureMap features;           // last per-point feature map
    std::map<int, ad::Var> pooled;         // set by pool
    std::optional<ad::Var> logits;         // dense head, [out]
    std::optional<ad::Var> vote_position;  // vote head, [3] Cartesian
    std::optional<ad::Var> vote_type_logits;  // vote head, [types]
    std::optional<ad::Var> inertia;        // inertia head, [3, 3]
  };

  struct Bound {
    std::map<std::string, ad::Var> param_vars;
    Output out;
  };

  Bound forward(ad::Tape& tape, const PointCloud& cloud) const;

  /// Numeric per-point features from a throwaway tape (harness-facing).
  layers::FeatureValues eval_features(const PointCloud& cloud) const;

 private:
  ModelSpec spec_;
  so3::CGTable cg_;
  std::map<std::string, std::vector<int64_t>> param_shapes_;
  ParamStore params_;
};

/// softmax(confidence)-weighted vote readout pieces; shared by forward() and
/// the tasks module.
struct VoteReadout {
  ad::Var position;     // [3]
  ad::Var type_logits;  // [types]
};

}  // namespace tfn::model
