#include "tfn/network.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

#include <nlohmann/json.hpp>

#include "tfn/random.hpp"

namespace tfn::model {

using json = nlohmann::ordered_json;

namespace {

layers::Eta parse_eta(const std::string& name) {
  if (name == "shifted_softplus") return layers::Eta::ShiftedSoftplus;
  if (name == "identity") return layers::Eta::Identity;
  throw std::invalid_argument("ModelSpec: unknown eta '" + name + "'");
}

std::string path_tag(const std::array<int, 3>& p) {
  return "li" + std::to_string(p[0]) + "_lf" + std::to_string(p[1]) + "_lo" + std::to_string(p[2]);
}

}  // namespace

std::string conv_param_prefix(size_t layer_index, const std::array<int, 3>& path) {
  return "layer" + std::to_string(layer_index) + ".conv." + path_tag(path);
}

namespace {

/// Channel bookkeeping while walking the records; mirrors what forward() does
/// but only tracks shapes.
struct WalkState {
  std::map<int, int> channels;  // per order, -1 ranks are absent
  bool pooled = false;
  int dense_out = -1;
};

/// Row-major flattened symmetric basis matrices used by the inertia readout:
/// the isotropic direction delta/sqrt(3) plus the five Frobenius-orthonormal
/// traceless symmetric matrices N^m aligned with the l=2 real harmonics
/// (m = -2..2), such that rr^T - delta/3 = sqrt(8pi/15) * sum_m Y2_m N^m.
NdArray isotropic_basis() {
  const double d = 1.0 / std::sqrt(3.0);
  return NdArray({9}, {d, 0, 0, 0, d, 0, 0, 0, d});
}

NdArray traceless_basis() {
  const double s = 1.0 / std::numbers::sqrt2;
  const double a = 1.0 / std::sqrt(6.0);
  // rows: m = -2 (xy), -1 (yz), 0 (2zz-xx-yy), 1 (xz), 2 (xx-yy)
  return NdArray({5, 9}, {
                             0, s, 0, s, 0, 0, 0, 0, 0,        // (e_x e_y + e_y e_x)/sqrt2
                             0, 0, 0, 0, 0, s, 0, s, 0,        // (e_y e_z + e_z e_y)/sqrt2
                             -a, 0, 0, 0, -a, 0, 0, 0, 2 * a,  // diag(-1,-1,2)/sqrt6
                             0, 0, s, 0, 0, 0, s, 0, 0,        // (e_x e_z + e_z e_x)/sqrt2
                             s, 0, 0, 0, -s, 0, 0, 0, 0,       // diag(1,-1,0)/sqrt2
                         });
}

}  // namespace

int ModelSpec::max_order() const {
  int m = 0;
  for (const auto& rec : layers) {
    for (const auto& p : rec.paths) m = std::max({m, p[0], p[1], p[2]});
    if (rec.kind == "inertia_readout") m = std::max(m, 2);
  }
  return m;
}

Network::Network(ModelSpec spec) : spec_(std::move(spec)), cg_(std::max(spec_.max_order(), 1)) {
  // shape walk doubles as architecture validation
  WalkState st;
  bool have_input = false;
  for (size_t i = 0; i < spec_.layers.size(); ++i) {
    const LayerRecord& rec = spec_.layers[i];
    const std::string prefix = "layer" + std::to_string(i);
    if (rec.kind == "input") {
      if (have_input) throw std::invalid_argument("ModelSpec: duplicate input record");
      have_input = true;
      st.channels = {{0, 1}};
      continue;
    }
    if (!have_input) throw std::invalid_argument("ModelSpec: first record must be 'input'");
    if (rec.kind == "conv") {
      if (st.pooled) throw std::invalid_argument("ModelSpec: conv after pool");
      if (rec.paths.empty()) throw std::invalid_argument("ModelSpec: conv with no paths");
      std::map<int, int> out;
      for (const auto& p : rec.paths) {
        const auto it = st.channels.find(p[0]);
        if (it == st.channels.end()) {
          throw std::invalid_argument("ModelSpec: conv path needs input order " + std::to_string(p[0]) +
                                      " which is absent at layer " + std::to_string(i));
        }
        layers::FilterSpec fs{p[0], p[1], p[2], it->second};
        fs.validate();
        const std::string rp = conv_param_prefix(i, p);
        layers::RadialNet net{rec.radial, it->second};
        for (const auto& [pname, pshape] : layers::radial_param_shapes(net)) {
          param_shapes_[rp + "." + pname] = pshape;
        }
        out[p[2]] += it->second;
      }
      st.channels = out;
    } else if (rec.kind == "self_interaction") {
      if (st.pooled) throw std::invalid_argument("ModelSpec: self_interaction after pool");
      for (const auto& [l, c_out] : rec.channels) {
        const auto it = st.channels.find(l);
        if (it == st.channels.end()) {
          throw std::invalid_argument("ModelSpec: self_interaction at absent order " + std::to_string(l));
        }
        param_shapes_[prefix + ".si.l" + std::to_string(l) + ".w"] = {c_out, it->second};
        if (rec.bias && l == 0) param_shapes_[prefix + ".si.l0.b"] = {c_out};
        it->second = c_out;
      }
    } else if (rec.kind == "norm_nonlinearity") {
      if (st.pooled) throw std::invalid_argument("ModelSpec: norm_nonlinearity after pool");
      for (const auto& [l, c] : st.channels) {
        param_shapes_[prefix + ".nl.l" + std::to_string(l) + ".b"] = {c};
        parse_eta(rec.eta_per_l.count(l) ? rec.eta_per_l.at(l) : rec.eta);
      }
    } else if (rec.kind == "pool") {
      st.pooled = true;
    } else if (rec.kind == "dense") {
      if (!st.pooled) throw std::invalid_argument("ModelSpec: dense requires pooled features");
      if (rec.out < 1) throw std::invalid_argument("ModelSpec: dense needs out >= 1");
      const auto it = st.channels.find(0);
      if (it == st.channels.end()) throw std::invalid_argument("ModelSpec: dense needs l=0 features");
      param_shapes_[prefix + ".dense.w"] = {it->second, rec.out};
      param_shapes_[prefix + ".dense.b"] = {rec.out};
      it->second = rec.out;
      st.dense_out = rec.out;
    } else if (rec.kind == "vote") {
      if (st.pooled) throw std::invalid_argument("ModelSpec: vote reads per-point features");
      if (rec.types < 1) throw std::invalid_argument("ModelSpec: vote needs types >= 1");
      if (!st.channels.count(0) || st.channels.at(0) != rec.types + 1 || !st.channels.count(1) ||
          st.channels.at(1) != 1) {
        throw std::invalid_argument("ModelSpec: vote expects l=0 channels = types+1 and one l=1 channel");
      }
    } else if (rec.kind == "inertia_readout") {
      if (st.pooled) throw std::invalid_argument("ModelSpec: inertia_readout reads per-point features");
      if (!st.channels.count(0) || st.channels.at(0) != 1 || !st.channels.count(2) ||
          st.channels.at(2) != 1) {
        throw std::invalid_argument("ModelSpec: inertia_readout expects one l=0 and one l=2 channel");
      }
    } else {
      throw std::invalid_argument("ModelSpec: unknown layer kind '" + rec.kind + "'");
    }
  }
}

void Network::init_params(uint64_t seed) {
  RandomEngine rng(seed);
  params_.clear();
  for (const auto& [name, shape] : param_shapes_) {
    NdArray value(shape);
    const bool is_bias = shape.size() == 1;
    if (!is_bias) {
      const double bound = std::sqrt(6.0 / static_cast<double>(shape[0] + shape[1]));
      for (int64_t i = 0; i < value.size(); ++i) value[i] = rng.uniform(-bound, bound);
    }
    params_.emplace(name, std::move(value));
  }
}

void Network::set_params(ParamStore params) {
  for (const auto& [name, shape] : param_shapes_) {
    const auto it = params.find(name);
    if (it == params.end()) throw std::invalid_argument("Network: missing parameter '" + name + "'");
    if (it->second.shape() != shape) {
      throw std::invalid_argument("Network: parameter '" + name + "' has shape " +
                                  NdArray::shape_to_string(it->second.shape()) + ", expected " +
                                  NdArray::shape_to_string(shape));
    }
  }
  for (const auto& [name, value] : params) {
    if (!param_shapes_.count(name)) throw std::invalid_argument("Network: unknown parameter '" + name + "'");
  }
  params_ = std::move(params);
}

Network::Bound Network::forward(ad::Tape& tape, const PointCloud& cloud) const {
  cloud.validate();
  if (params_.empty()) throw std::logic_error("Network: parameters not initialized");
  const int64_t n = cloud.num_points();

  Bound bound;
  auto param = [&](const std::string& name) -> ad::Var {
    auto it = bound.param_vars.find(name);
    if (it != bound.param_vars.end()) return it->second;
    const auto pit = params_.find(name);
    if (pit == params_.end()) throw std::logic_error("Network: parameter '" + name + "' not declared");
    ad::Var v = tape.leaf(pit->second);
    bound.param_vars.emplace(name, v);
    return v;
  };

  layers::FeatureMap features;
  std::map<int, ad::Var> pooled;
  bool is_pooled = false;

  for (size_t i = 0; i < spec_.layers.size(); ++i) {
    const LayerRecord& rec = spec_.layers[i];
    const std::string prefix = "layer" + std::to_string(i);

    if (rec.kind == "input") {
      NdArray feat({n, 1, 1});
      if (rec.feature == "ones") {
        for (int64_t a = 0; a < n; ++a) feat[a] = 1.0;
      } else if (rec.feature == "mass") {
        if (cloud.masses.size() != static_cast<size_t>(n)) {
          throw std::invalid_argument("Network: input feature 'mass' needs per-point masses");
        }
        for (int64_t a = 0; a < n; ++a) feat[a] = cloud.masses[static_cast<size_t>(a)];
      } else {
        throw std::invalid_argument("Network: unknown input feature '" + rec.feature + "'");
      }
      features = {{0, tape.constant(feat)}};
    } else if (rec.kind == "conv") {
      std::vector<int> filter_orders;
      for (const auto& p : rec.paths) filter_orders.push_back(p[1]);
      const layers::PairGeometry geom = layers::PairGeometry::from_cloud(cloud, filter_orders, rec.cutoff);

      std::map<int, std::vector<ad::Var>> by_order;
      for (const auto& p : rec.paths) {
        const int c_in = static_cast<int>(tape.value(features.at(p[0])).extent(1));
        layers::FilterSpec fs{p[0], p[1], p[2], c_in};
        layers::RadialNet net{rec.radial, c_in};
        const std::string rp = conv_param_prefix(i, p);
        layers::RadialParams radial{param(rp + ".w1"), param(rp + ".b1"), param(rp + ".w2"),
                                    param(rp + ".b2")};
        by_order[p[2]].push_back(
            layers::point_convolution(tape, fs, net, radial, geom, cg_, features.at(p[0])));
      }
      layers::FeatureMap out;
      for (auto& [l, vars] : by_order) out[l] = vars.size() == 1 ? vars.front() : ad::concat(vars, 1);
      features = std::move(out);
    } else if (rec.kind == "self_interaction") {
      for (const auto& [l, c_out] : rec.channels) {
        const std::string base = prefix + ".si.l" + std::to_string(l);
        std::optional<ad::Var> bias;
        if (rec.bias && l == 0) bias = param(base + ".b");
        features[l] = layers::self_interaction(tape, l, param(base + ".w"), bias, features.at(l));
      }
    } else if (rec.kind == "norm_nonlinearity") {
      for (auto& [l, var] : features) {
        const layers::Eta eta = parse_eta(rec.eta_per_l.count(l) ? rec.eta_per_l.at(l) : rec.eta);
        var = layers::norm_nonlinearity(tape, l, eta, param(prefix + ".nl.l" + std::to_string(l) + ".b"),
                                        var);
      }
    } else if (rec.kind == "pool") {
      pooled = layers::global_pool(features);
      is_pooled = true;
    } else if (rec.kind == "dense") {
      const ad::Var x0 = pooled.at(0);  // [c, 1]
      const int64_t c = tape.value(x0).extent(0);
      ad::Var flat = ad::reshape(x0, {1, c});
      ad::Var out = ad::add(ad::matmul(flat, param(prefix + ".dense.w")),
                            ad::reshape(param(prefix + ".dense.b"), {1, rec.out}));
      bound.out.logits = ad::reshape(out, {rec.out});
      pooled[0] = ad::reshape(out, {static_cast<int64_t>(rec.out), 1});
    } else if (rec.kind == "vote") {
      const ad::Var l0 = features.at(0);  // [n, types+1, 1]
      const ad::Var l1 = features.at(1);  // [n, 1, 3]
      std::vector<int64_t> type_idx(static_cast<size_t>(rec.types));
      for (int t = 0; t < rec.types; ++t) type_idx[static_cast<size_t>(t)] = t;
      ad::Var type_logits = ad::reshape(ad::gather(l0, 1, type_idx), {n, rec.types});
      ad::Var confidence = ad::reshape(ad::gather(l0, 1, {rec.types}), {n});
      // l=1 components are ordered (y, z, x); reorder to Cartesian (x, y, z)
      ad::Var delta = ad::gather(ad::reshape(l1, {n, 3}), 1, {2, 0, 1});
      bound.out.vote_position = layers::vote_aggregate(tape, confidence, delta, cloud);
      ad::Var p = ad::softmax(confidence, 0);
      bound.out.vote_type_logits = ad::contract("a,at->t", p, type_logits);
    } else if (rec.kind == "inertia_readout") {
      if (cloud.query_index < 0) {
        throw std::invalid_argument("Network: inertia_readout needs a cloud query point");
      }
      const int64_t q = cloud.query_index;
      ad::Var s = ad::reshape(ad::gather(features.at(0), 0, {q}), {1});
      ad::Var t2 = ad::reshape(ad::gather(features.at(2), 0, {q}), {5});
      ad::Var iso = ad::mul(s, tape.constant(isotropic_basis()));            // [9]
      ad::Var dev = ad::contract("m,mk->k", t2, tape.constant(traceless_basis()));  // [9]
      bound.out.inertia = ad::reshape(ad::add(iso, dev), {3, 3});
    }
  }

  bound.out.features = features;
  if (is_pooled) bound.out.pooled = pooled;
  return bound;
}

layers::FeatureValues Network::eval_features(const PointCloud& cloud) const {
  ad::Tape tape;
  const Bound bound = forward(tape, cloud);
  return layers::feature_values(tape, bound.out.features);
}

// --- JSON round trip ---------------------------------------------------------

std::string model_spec_to_json(const ModelSpec& spec) {
  json j;
  j["schema"] = "tfn.model.v1";
  j["task"] = spec.task;
  json layers = json::array();
  for (const auto& rec : spec.layers) {
    json r;
    r["kind"] = rec.kind;
    if (rec.kind == "input") {
      r["feature"] = rec.feature;
    } else if (rec.kind == "conv") {
      json paths = json::array();
      for (const auto& p : rec.paths) paths.push_back({{"l_i", p[0]}, {"l_f", p[1]}, {"l_o", p[2]}});
      r["paths"] = paths;
      r["radial"] = {{"n_basis", rec.radial.n_basis},
                     {"r_min", rec.radial.r_min},
                     {"r_max", rec.radial.r_max},
                     {"hidden", rec.radial.hidden}};
      if (rec.cutoff > 0.0) r["cutoff"] = rec.cutoff;
    } else if (rec.kind == "self_interaction") {
      json ch;
      for (const auto& [l, c] : rec.channels) ch[std::to_string(l)] = c;
      r["channels"] = ch;
      r["bias"] = rec.bias;
    } else if (rec.kind == "norm_nonlinearity") {
      r["eta"] = rec.eta;
      if (!rec.eta_per_l.empty()) {
        json per;
        for (const auto& [l, name] : rec.eta_per_l) per[std::to_string(l)] = name;
        r["eta_per_l"] = per;
      }
    } else if (rec.kind == "dense") {
      r["out"] = rec.out;
    } else if (rec.kind == "vote") {
      r["types"] = rec.types;
    }
    layers.push_back(r);
  }
  j["layers"] = layers;
  return j.dump(2);
}

ModelSpec model_spec_from_json(const std::string& text) {
  const json j = json::parse(text);
  if (j.value("schema", "") != "tfn.model.v1") {
    throw std::invalid_argument("model_spec_from_json: unsupported schema '" + j.value("schema", "") + "'");
  }
  ModelSpec spec;
  spec.task = j.at("task").get<std::string>();
  for (const auto& r : j.at("layers")) {
    LayerRecord rec;
    rec.kind = r.at("kind").get<std::string>();
    if (rec.kind == "input") {
      rec.feature = r.value("feature", "ones");
    } else if (rec.kind == "conv") {
      for (const auto& p : r.at("paths")) {
        rec.paths.push_back({p.at("l_i").get<int>(), p.at("l_f").get<int>(), p.at("l_o").get<int>()});
      }
      const auto& rad = r.at("radial");
      rec.radial.n_basis = rad.at("n_basis").get<int>();
      rec.radial.r_min = rad.at("r_min").get<double>();
      rec.radial.r_max = rad.at("r_max").get<double>();
      rec.radial.hidden = rad.at("hidden").get<int>();
      rec.cutoff = r.value("cutoff", 0.0);
    } else if (rec.kind == "self_interaction") {
      for (const auto& [key, c] : r.at("channels").items()) rec.channels[std::stoi(key)] = c.get<int>();
      rec.bias = r.value("bias", true);
    } else if (rec.kind == "norm_nonlinearity") {
      rec.eta = r.value("eta", "shifted_softplus");
      if (r.contains("eta_per_l")) {
        for (const auto& [key, name] : r.at("eta_per_l").items()) {
          rec.eta_per_l[std::stoi(key)] = name.get<std::string>();
        }
      }
    } else if (rec.kind == "dense") {
      rec.out = r.at("out").get<int>();
    } else if (rec.kind == "vote") {
      rec.types = r.at("types").get<int>();
    }
    spec.layers.push_back(std::move(rec));
  }
  return spec;
}

}  // namespace tfn::model
