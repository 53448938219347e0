#pragma once

#include <functional>
#include <map>
#include <string>
#include <vector>

#include "tfn/datasets.hpp"
#include "tfn/network.hpp"
#include "tfn/optimizer.hpp"

namespace tfn::tasks {

/// Run hyperparameters; defaults follow the demonstrations (batch size is
/// fixed at 1 throughout).
struct TrainConfig {
  std::string task = "tetris";
  uint64_t seed = 0;
  int epochs = 20;
  int max_steps = 0;     // 0: epochs decide
  int train_count = 1000;  // generated samples for gravity/inertia
  int channels = 4;        // per-order width of the shape networks
  layers::RadialConfig radial;
  ad::AdamConfig adam;
  double early_stop_loss = 0.0;  // stop when the epoch mean loss drops below
};

/// Task defaults: radial range 0..2 for the physics tasks, 0..3 (the largest
/// pairwise distance in a shape) for tetris/missing-point, lr 1e-3.
TrainConfig default_config(const std::string& task);

model::ModelSpec build_tetris_net(const TrainConfig& config);
model::ModelSpec build_gravity_net(const TrainConfig& config);
model::ModelSpec build_inertia_net(const TrainConfig& config);
model::ModelSpec build_missing_point_net(const TrainConfig& config);
model::ModelSpec build_net(const TrainConfig& config);

/// Generates the task's training set from the config seed.
std::vector<LabeledSample> default_train_set(const TrainConfig& config);

/// Scalar cross entropy -log softmax(logits)[label].
ad::Var cross_entropy(ad::Tape& tape, ad::Var logits, int64_t label);

/// Differentiable per-sample loss: cross-entropy for tetris, MSE on vectors /
/// matrix entries for the physics tasks, squared vote distance plus type
/// cross-entropy for the missing-point toy.
ad::Var sample_loss(ad::Tape& tape, const model::Network::Output& out, const LabeledSample& sample);

struct MetricRow {
  int epoch = 0;
  double loss = 0.0;
  std::map<std::string, double> metrics;
};

struct TrainResult {
  std::vector<MetricRow> history;
  int steps = 0;
};

/// Adam loop, batch size 1, deterministic in config.seed.  Throws
/// std::runtime_error with a diagnostic if the loss goes non-finite.
TrainResult train(model::Network& net, const std::vector<LabeledSample>& data, const TrainConfig& config);

/// Task metric on a dataset: accuracy (tetris), component MAE + target RMS
/// (gravity/inertia, plus the symmetry residual for inertia), hit rate at
/// 0.5 spacing + distance stats (missing point).
std::map<std::string, double> evaluate(const model::Network& net, const std::vector<LabeledSample>& data);

/// Radial-net parameter prefixes of every conv path in the model, record order.
std::vector<std::string> radial_prefixes(const model::ModelSpec& spec);

/// Learned radial curve of one conv path at the given radii (single channel
/// paths return one value per radius).
std::vector<double> radial_curve(const model::Network& net, const std::string& prefix,
                                 const std::vector<double>& radii);

/// Analytic radial oracle for a conv-path prefix under this task, if the task
/// defines one (gravity: -1/r^2; inertia: (2/3) r^2 for the l_f=0 path and
/// -r^2 for l_f=2).  Returns nullptr otherwise.
std::function<double(double)> analytic_radial(const std::string& task, const std::string& prefix);

/// Least-squares global scale fit of learned against analytic samples and the
/// mean relative error after the fit.
struct RadialFit {
  double scale = 0.0;
  double mean_rel_err = 0.0;
};
RadialFit fit_radial(const std::vector<double>& learned, const std::vector<double>& analytic);

}  // namespace tfn::tasks
