#include "tfn/train.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace tfn::tasks {

TrainConfig default_config(const std::string& task) {
  TrainConfig config;
  config.task = task;
  if (task == "tetris") {
    config.channels = 4;
    config.radial = {30, 0.0, 3.0, 16};
    config.adam.lr = 5e-3;
    config.epochs = 400;
    config.max_steps = 2000;
    config.early_stop_loss = 1e-5;
  } else if (task == "gravity") {
    config.radial = {30, 0.0, 2.0, 16};
    config.adam.lr = 1e-3;
    config.epochs = 20;
    config.train_count = 1000;
  } else if (task == "inertia") {
    config.radial = {30, 0.0, 2.0, 16};
    config.adam.lr = 1e-3;
    config.epochs = 20;
    config.train_count = 1000;
  } else if (task == "missing_point") {
    config.channels = 6;
    config.radial = {30, 0.0, 3.0, 16};
    config.adam.lr = 5e-3;
    config.epochs = 1500;
    config.max_steps = 9000;
    config.early_stop_loss = 1e-6;
  } else {
    throw std::invalid_argument("default_config: unknown task '" + task + "'");
  }
  return config;
}

namespace {

model::LayerRecord conv_record(const std::vector<std::array<int, 3>>& paths,
                               const layers::RadialConfig& radial) {
  model::LayerRecord rec;
  rec.kind = "conv";
  rec.paths = paths;
  rec.radial = radial;
  return rec;
}

model::LayerRecord si_record(const std::map<int, int>& channels) {
  model::LayerRecord rec;
  rec.kind = "self_interaction";
  rec.channels = channels;
  return rec;
}

model::LayerRecord nl_record() {
  model::LayerRecord rec;
  rec.kind = "norm_nonlinearity";
  return rec;
}

void append_shape_modules(model::ModelSpec& spec, const TrainConfig& config) {
  const int c = config.channels;
  // module 1 sees l=0 only; modules 2 and 3 run every l<=1 path
  spec.layers.push_back(conv_record({{0, 0, 0}, {0, 1, 1}}, config.radial));
  spec.layers.push_back(si_record({{0, c}, {1, c}}));
  spec.layers.push_back(nl_record());
  for (int module = 1; module < 3; ++module) {
    spec.layers.push_back(
        conv_record({{0, 0, 0}, {0, 1, 1}, {1, 0, 1}, {1, 1, 0}, {1, 1, 1}}, config.radial));
    spec.layers.push_back(si_record({{0, c}, {1, c}}));
    spec.layers.push_back(nl_record());
  }
}

}  // namespace

model::ModelSpec build_tetris_net(const TrainConfig& config) {
  model::ModelSpec spec;
  spec.task = "tetris";
  model::LayerRecord input;
  input.kind = "input";
  input.feature = "ones";
  spec.layers.push_back(input);
  append_shape_modules(spec, config);
  model::LayerRecord pool;
  pool.kind = "pool";
  spec.layers.push_back(pool);
  model::LayerRecord dense;
  dense.kind = "dense";
  dense.out = 8;
  spec.layers.push_back(dense);
  return spec;
}

model::ModelSpec build_gravity_net(const TrainConfig& config) {
  model::ModelSpec spec;
  spec.task = "gravity";
  model::LayerRecord input;
  input.kind = "input";
  input.feature = "mass";
  spec.layers.push_back(input);
  spec.layers.push_back(conv_record({{0, 1, 1}}, config.radial));
  return spec;
}

model::ModelSpec build_inertia_net(const TrainConfig& config) {
  model::ModelSpec spec;
  spec.task = "inertia";
  model::LayerRecord input;
  input.kind = "input";
  input.feature = "mass";
  spec.layers.push_back(input);
  spec.layers.push_back(conv_record({{0, 0, 0}, {0, 2, 2}}, config.radial));
  model::LayerRecord readout;
  readout.kind = "inertia_readout";
  spec.layers.push_back(readout);
  return spec;
}

model::ModelSpec build_missing_point_net(const TrainConfig& config) {
  model::ModelSpec spec;
  spec.task = "missing_point";
  model::LayerRecord input;
  input.kind = "input";
  input.feature = "ones";
  spec.layers.push_back(input);
  append_shape_modules(spec, config);
  spec.layers.push_back(si_record({{0, missing_point_num_types() + 1}, {1, 1}}));
  model::LayerRecord vote;
  vote.kind = "vote";
  vote.types = missing_point_num_types();
  spec.layers.push_back(vote);
  return spec;
}

model::ModelSpec build_net(const TrainConfig& config) {
  if (config.task == "tetris") return build_tetris_net(config);
  if (config.task == "gravity") return build_gravity_net(config);
  if (config.task == "inertia") return build_inertia_net(config);
  if (config.task == "missing_point") return build_missing_point_net(config);
  throw std::invalid_argument("build_net: unknown task '" + config.task + "'");
}

std::vector<LabeledSample> default_train_set(const TrainConfig& config) {
  // tetris and the missing-point toy train on canonical orientations only;
  // orientation generalization is what the equivariance buys
  if (config.task == "tetris") return gen_tetris(false, false, config.seed);
  if (config.task == "gravity") return gen_gravity_set(config.train_count, config.seed);
  if (config.task == "inertia") return gen_inertia_set(config.train_count, config.seed);
  if (config.task == "missing_point") {
    return gen_missing_point(static_cast<int>(missing_point_cases().size()), false, false, config.seed);
  }
  throw std::invalid_argument("default_train_set: unknown task '" + config.task + "'");
}

ad::Var cross_entropy(ad::Tape& tape, ad::Var logits, int64_t label) {
  const NdArray& lv = tape.value(logits);
  if (lv.rank() != 1) {
    throw std::invalid_argument("cross_entropy: logits must be rank 1, got " +
                                NdArray::shape_to_string(lv.shape()));
  }
  if (label < 0 || label >= lv.extent(0)) throw std::invalid_argument("cross_entropy: label out of range");
  // detached max keeps the exp sum stable; its gradient contribution cancels
  const double m = *std::max_element(lv.data().begin(), lv.data().end());
  ad::Var shifted = ad::add_scalar(logits, -m);
  ad::Var log_z = ad::log(ad::sum_all(ad::exp(shifted)));
  ad::Var picked = ad::reshape(ad::gather(shifted, 0, {label}), {});
  return ad::sub(log_z, picked);
}

namespace {

NdArray vectors_to_sh_order(const NdArray& cart) {
  // Cartesian (x, y, z) -> l=1 component order (y, z, x)
  const int64_t n = cart.extent(0);
  NdArray out({n, 3});
  for (int64_t a = 0; a < n; ++a) {
    out.at({a, 0}) = cart.at({a, 1});
    out.at({a, 1}) = cart.at({a, 2});
    out.at({a, 2}) = cart.at({a, 0});
  }
  return out;
}

}  // namespace

ad::Var sample_loss(ad::Tape& tape, const model::Network::Output& out, const LabeledSample& sample) {
  if (sample.task == "tetris") {
    if (!out.logits) throw std::invalid_argument("sample_loss: network has no logits head");
    return cross_entropy(tape, *out.logits, sample.label);
  }
  if (sample.task == "gravity") {
    const ad::Var pred = out.features.at(1);  // [n, 1, 3]
    const int64_t n = tape.value(pred).extent(0);
    ad::Var flat = ad::reshape(pred, {n, 3});
    ad::Var target = tape.constant(vectors_to_sh_order(sample.vectors));
    return ad::scale(ad::sum_all(ad::square(ad::sub(flat, target))), 1.0 / (3.0 * static_cast<double>(n)));
  }
  if (sample.task == "inertia") {
    if (!out.inertia) throw std::invalid_argument("sample_loss: network has no inertia head");
    ad::Var target = tape.constant(sample.matrix);
    return ad::scale(ad::sum_all(ad::square(ad::sub(*out.inertia, target))), 1.0 / 9.0);
  }
  if (sample.task == "missing_point") {
    if (!out.vote_position || !out.vote_type_logits) {
      throw std::invalid_argument("sample_loss: network has no vote head");
    }
    ad::Var target = tape.constant(NdArray(
        {3}, {sample.missing_position[0], sample.missing_position[1], sample.missing_position[2]}));
    ad::Var dist2 = ad::sum_all(ad::square(ad::sub(*out.vote_position, target)));
    ad::Var ce = cross_entropy(tape, *out.vote_type_logits, sample.missing_type);
    return ad::add(dist2, ce);
  }
  throw std::invalid_argument("sample_loss: unknown task '" + sample.task + "'");
}

TrainResult train(model::Network& net, const std::vector<LabeledSample>& data, const TrainConfig& config) {
  if (data.empty()) throw std::invalid_argument("train: empty dataset");
  for (const LabeledSample& s : data) {
    if (s.task != config.task) {
      throw std::invalid_argument("train: dataset task '" + s.task + "' does not match config task '" +
                                  config.task + "'");
    }
  }
  if (net.spec().task != config.task) {
    throw std::invalid_argument("train: model task '" + net.spec().task + "' does not match config task '" +
                                config.task + "'");
  }

  ad::AdamState state;
  TrainResult result;
  RandomEngine shuffle_rng(config.seed ^ 0x9e3779b97f4a7c15ULL);

  std::vector<size_t> order(data.size());
  std::iota(order.begin(), order.end(), 0);

  bool stop = false;
  for (int epoch = 0; epoch < config.epochs && !stop; ++epoch) {
    for (size_t i = order.size(); i > 1; --i) {
      std::swap(order[i - 1], order[static_cast<size_t>(shuffle_rng.uniform_int(static_cast<int64_t>(i)))]);
    }

    double loss_sum = 0.0;
    int seen = 0;
    for (const size_t idx : order) {
      ad::Tape tape;
      model::Network::Bound bound = net.forward(tape, data[idx].cloud);
      ad::Var loss = sample_loss(tape, bound.out, data[idx]);
      const double loss_value = tape.value(loss)[0];
      if (!std::isfinite(loss_value)) {
        throw std::runtime_error("train: non-finite loss at step " + std::to_string(result.steps) +
                                 " (task " + config.task + ", epoch " + std::to_string(epoch) +
                                 ", sample seed " + std::to_string(data[idx].seed) + ")");
      }
      loss_sum += loss_value;
      ++seen;

      tape.backward(loss);
      std::map<std::string, NdArray> grads;
      for (const auto& [name, var] : bound.param_vars) grads.emplace(name, tape.grad(var));
      ad::adam_step(net.params(), grads, state, config.adam);

      ++result.steps;
      if (config.max_steps > 0 && result.steps >= config.max_steps) {
        stop = true;
        break;
      }
    }

    MetricRow row;
    row.epoch = epoch;
    row.loss = loss_sum / std::max(seen, 1);
    row.metrics = evaluate(net, data);
    result.history.push_back(std::move(row));
    if (config.early_stop_loss > 0.0 && result.history.back().loss < config.early_stop_loss) break;
  }
  return result;
}

std::map<std::string, double> evaluate(const model::Network& net, const std::vector<LabeledSample>& data) {
  if (data.empty()) throw std::invalid_argument("evaluate: empty dataset");
  const std::string& task = data.front().task;
  if (net.spec().task != task) {
    throw std::invalid_argument("evaluate: model task '" + net.spec().task +
                                "' does not match dataset task '" + task + "'");
  }

  if (task == "tetris") {
    int correct = 0;
    for (const LabeledSample& s : data) {
      ad::Tape tape;
      const auto bound = net.forward(tape, s.cloud);
      if (!bound.out.logits) throw std::invalid_argument("evaluate: network has no logits head");
      const NdArray& logits = tape.value(*bound.out.logits);
      int64_t best = 0;
      for (int64_t k = 1; k < logits.size(); ++k) {
        if (logits[k] > logits[best]) best = k;
      }
      if (best == s.label) ++correct;
    }
    return {{"accuracy", static_cast<double>(correct) / static_cast<double>(data.size())}};
  }

  if (task == "gravity") {
    double abs_sum = 0.0, sq_sum = 0.0;
    int64_t count = 0;
    for (const LabeledSample& s : data) {
      ad::Tape tape;
      const auto bound = net.forward(tape, s.cloud);
      const NdArray pred = tape.value(bound.out.features.at(1));  // [n,1,3] in (y,z,x) order
      const int64_t n = pred.extent(0);
      for (int64_t a = 0; a < n; ++a) {
        const double px = pred.at({a, 0, 2}), py = pred.at({a, 0, 0}), pz = pred.at({a, 0, 1});
        const double tx = s.vectors.at({a, 0}), ty = s.vectors.at({a, 1}), tz = s.vectors.at({a, 2});
        abs_sum += std::abs(px - tx) + std::abs(py - ty) + std::abs(pz - tz);
        sq_sum += tx * tx + ty * ty + tz * tz;
        count += 3;
      }
    }
    const double mae = abs_sum / static_cast<double>(count);
    const double rms = std::sqrt(sq_sum / static_cast<double>(count));
    return {{"mae", mae}, {"target_rms", rms}, {"mae_over_rms", mae / rms}};
  }

  if (task == "inertia") {
    double abs_sum = 0.0, sq_sum = 0.0, sym = 0.0;
    int64_t count = 0;
    for (const LabeledSample& s : data) {
      ad::Tape tape;
      const auto bound = net.forward(tape, s.cloud);
      if (!bound.out.inertia) throw std::invalid_argument("evaluate: network has no inertia head");
      const NdArray pred = tape.value(*bound.out.inertia);
      for (int64_t i = 0; i < 3; ++i)
        for (int64_t j = 0; j < 3; ++j) {
          abs_sum += std::abs(pred.at({i, j}) - s.matrix.at({i, j}));
          sq_sum += s.matrix.at({i, j}) * s.matrix.at({i, j});
          sym = std::max(sym, std::abs(pred.at({i, j}) - pred.at({j, i})));
          ++count;
        }
    }
    const double mae = abs_sum / static_cast<double>(count);
    const double rms = std::sqrt(sq_sum / static_cast<double>(count));
    return {{"mae", mae}, {"target_rms", rms}, {"mae_over_rms", mae / rms}, {"symmetry_residual", sym}};
  }

  if (task == "missing_point") {
    int hits = 0, type_hits = 0;
    double dist_sum = 0.0;
    for (const LabeledSample& s : data) {
      ad::Tape tape;
      const auto bound = net.forward(tape, s.cloud);
      if (!bound.out.vote_position || !bound.out.vote_type_logits) {
        throw std::invalid_argument("evaluate: network has no vote head");
      }
      const NdArray u = tape.value(*bound.out.vote_position);
      double sq = 0.0;
      for (int64_t k = 0; k < 3; ++k) {
        const double d = u[k] - s.missing_position[static_cast<size_t>(k)];
        sq += d * d;
      }
      const double dist = std::sqrt(sq);
      dist_sum += dist;
      if (dist <= 0.5) ++hits;
      const NdArray tl = tape.value(*bound.out.vote_type_logits);
      int64_t best = 0;
      for (int64_t k = 1; k < tl.size(); ++k) {
        if (tl[k] > tl[best]) best = k;
      }
      if (best == s.missing_type) ++type_hits;
    }
    const double n = static_cast<double>(data.size());
    return {{"hit_rate", hits / n}, {"mean_distance", dist_sum / n}, {"type_accuracy", type_hits / n}};
  }

  throw std::invalid_argument("evaluate: unknown task '" + task + "'");
}

std::vector<std::string> radial_prefixes(const model::ModelSpec& spec) {
  std::vector<std::string> out;
  for (size_t i = 0; i < spec.layers.size(); ++i) {
    if (spec.layers[i].kind != "conv") continue;
    for (const auto& p : spec.layers[i].paths) out.push_back(model::conv_param_prefix(i, p));
  }
  return out;
}

std::vector<double> radial_curve(const model::Network& net, const std::string& prefix,
                                 const std::vector<double>& radii) {
  // recover the path's radial config from the owning conv record
  const auto layer_pos = prefix.find("layer");
  const auto dot = prefix.find('.');
  if (layer_pos != 0 || dot == std::string::npos) {
    throw std::invalid_argument("radial_curve: bad prefix '" + prefix + "'");
  }
  const size_t layer_index = static_cast<size_t>(std::stoi(prefix.substr(5, dot - 5)));
  if (layer_index >= net.spec().layers.size() || net.spec().layers[layer_index].kind != "conv") {
    throw std::invalid_argument("radial_curve: prefix '" + prefix + "' is not a conv layer");
  }
  const auto& params = net.params();
  const NdArray& w2 = params.at(prefix + ".w2");
  layers::RadialNet rnet{net.spec().layers[layer_index].radial, static_cast<int>(w2.extent(1))};
  std::map<std::string, NdArray> bound{{"w1", params.at(prefix + ".w1")},
                                       {"b1", params.at(prefix + ".b1")},
                                       {"w2", w2},
                                       {"b2", params.at(prefix + ".b2")}};
  std::vector<double> out;
  out.reserve(radii.size());
  for (const double r : radii) out.push_back(layers::radial_eval(rnet, bound, r)[0]);
  return out;
}

std::function<double(double)> analytic_radial(const std::string& task, const std::string& prefix) {
  const auto lf_pos = prefix.find("_lf");
  if (lf_pos == std::string::npos) return nullptr;
  const int lf = std::stoi(prefix.substr(lf_pos + 3, 1));
  if (task == "gravity" && lf == 1) {
    return [](double r) { return -1.0 / (r * r); };
  }
  if (task == "inertia" && lf == 0) {
    return [](double r) { return (2.0 / 3.0) * r * r; };
  }
  if (task == "inertia" && lf == 2) {
    return [](double r) { return -r * r; };
  }
  return nullptr;
}

RadialFit fit_radial(const std::vector<double>& learned, const std::vector<double>& analytic) {
  if (learned.size() != analytic.size() || learned.empty()) {
    throw std::invalid_argument("fit_radial: size mismatch");
  }
  double num = 0.0, den = 0.0;
  for (size_t i = 0; i < learned.size(); ++i) {
    num += learned[i] * analytic[i];
    den += analytic[i] * analytic[i];
  }
  RadialFit fit;
  fit.scale = den > 0.0 ? num / den : 0.0;
  double rel_sum = 0.0;
  int count = 0;
  for (size_t i = 0; i < learned.size(); ++i) {
    const double ref = fit.scale * analytic[i];
    if (ref == 0.0) continue;
    rel_sum += std::abs(learned[i] - ref) / std::abs(ref);
    ++count;
  }
  fit.mean_rel_err = count > 0 ? rel_sum / count : 0.0;
  return fit;
}

}  // namespace tfn::tasks
