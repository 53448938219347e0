#include "tfn/layers.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

#include "tfn/spherical_harmonics.hpp"

namespace tfn::layers {

namespace {
// keeps sqrt differentiable when a feature vanishes; far below every
// tolerance in play
constexpr double kNormEps = 1e-24;
}  // namespace

void FilterSpec::validate() const {
  if (l_i < 0 || l_f < 0 || l_o < 0 || channels < 1 || l_o < std::abs(l_i - l_f) || l_o > l_i + l_f) {
    throw std::invalid_argument("FilterSpec: inadmissible path (l_i=" + std::to_string(l_i) +
                                ", l_f=" + std::to_string(l_f) + ", l_o=" + std::to_string(l_o) +
                                ", channels=" + std::to_string(channels) + ")");
  }
}

PairGeometry PairGeometry::from_cloud(const PointCloud& cloud, const std::vector<int>& filter_orders,
                                      double cutoff) {
  cloud.validate();
  const int64_t n = cloud.num_points();
  PairGeometry geom;
  geom.n = n;
  geom.distances = NdArray({n * n});

  std::vector<so3::Vec3> diff(static_cast<size_t>(n * n));
  for (int64_t a = 0; a < n; ++a) {
    for (int64_t b = 0; b < n; ++b) {
      so3::Vec3 d{cloud.positions.at({a, 0}) - cloud.positions.at({b, 0}),
                  cloud.positions.at({a, 1}) - cloud.positions.at({b, 1}),
                  cloud.positions.at({a, 2}) - cloud.positions.at({b, 2})};
      diff[static_cast<size_t>(a * n + b)] = d;
      geom.distances[a * n + b] = so3::norm(d);
    }
  }

  const double y0 = 1.0 / std::sqrt(4.0 * std::numbers::pi);
  for (int l : filter_orders) {
    if (geom.sh.count(l)) continue;
    NdArray y({n, n, 2 * l + 1});
    for (int64_t a = 0; a < n; ++a) {
      for (int64_t b = 0; b < n; ++b) {
        const double r = geom.distances[a * n + b];
        const bool beyond_cutoff = cutoff > 0.0 && r > cutoff;
        if (l == 0) {
          y.at({a, b, 0}) = beyond_cutoff ? 0.0 : y0;
          continue;
        }
        if (a == b || r == 0.0 || beyond_cutoff) continue;  // row stays zero
        const auto vals = so3::real_spherical_harmonics(l, diff[static_cast<size_t>(a * n + b)]);
        for (int m = 0; m < 2 * l + 1; ++m) y.at({a, b, m}) = vals[static_cast<size_t>(m)];
      }
    }
    geom.sh.emplace(l, std::move(y));
  }
  return geom;
}

NdArray filter_eval(const FilterSpec& spec, const RadialNet& net,
                    const std::map<std::string, NdArray>& radial_params, const so3::Vec3& displacement) {
  spec.validate();
  const double r = so3::norm(displacement);
  const std::vector<double> radial = radial_eval(net, radial_params, r);
  const int nm = 2 * spec.l_f + 1;
  NdArray out({spec.channels, nm});
  if (r == 0.0 && spec.l_f > 0) return out;  // no direction, no anisotropic filter

  std::vector<double> y;
  if (spec.l_f == 0) {
    y = {1.0 / std::sqrt(4.0 * std::numbers::pi)};
  } else {
    y = so3::real_spherical_harmonics(spec.l_f, displacement);
  }
  for (int c = 0; c < spec.channels; ++c)
    for (int m = 0; m < nm; ++m) out.at({c, m}) = radial[static_cast<size_t>(c)] * y[static_cast<size_t>(m)];
  return out;
}

ad::Var point_convolution(ad::Tape& tape, const FilterSpec& spec, const RadialNet& net,
                          const RadialParams& radial, const PairGeometry& geom,
                          const so3::CGTable& cg, ad::Var input) {
  spec.validate();
  const NdArray& v = tape.value(input);
  const int64_t n = geom.n;
  if (v.rank() != 3 || v.extent(0) != n || v.extent(1) != spec.channels ||
      v.extent(2) != 2 * spec.l_i + 1) {
    throw std::invalid_argument("point_convolution: input shape " + NdArray::shape_to_string(v.shape()) +
                                " does not match n=" + std::to_string(n) + ", channels=" +
                                std::to_string(spec.channels) + ", l_i=" + std::to_string(spec.l_i));
  }
  if (net.channels != spec.channels) {
    throw std::invalid_argument("point_convolution: radial net channels " + std::to_string(net.channels) +
                                " != path channels " + std::to_string(spec.channels));
  }

  // F_abcm = R_c(r_ab) Y^(l_f)_m(rhat_ab)
  ad::Var r_vals = radial_forward(tape, net, radial, geom.distances);             // [n*n, C]
  ad::Var r4 = ad::reshape(r_vals, {n, n, spec.channels, 1});
  ad::Var y4 = tape.constant(geom.sh.at(spec.l_f).reshaped({n, n, 1, 2 * spec.l_f + 1}));
  ad::Var filter = ad::mul(r4, y4);                                               // [n, n, C, 2lf+1]

  // sum over neighbours, depthwise in c
  ad::Var t = ad::contract("abcf,bci->acfi", filter, input);                      // [n, C, 2lf+1, 2li+1]
  ad::Var cg_block = tape.constant(cg.block(spec.l_o, spec.l_f, spec.l_i));       // [2lo+1, 2lf+1, 2li+1]
  return ad::contract("ofi,acfi->aco", cg_block, t);                              // [n, C, 2lo+1]
}

ad::Var self_interaction(ad::Tape& tape, int l, ad::Var weights, std::optional<ad::Var> bias,
                         ad::Var input) {
  const NdArray& v = tape.value(input);
  const NdArray& w = tape.value(weights);
  if (v.rank() != 3 || w.rank() != 2 || w.extent(1) != v.extent(1) || v.extent(2) != 2 * l + 1) {
    throw std::invalid_argument("self_interaction: weights " + NdArray::shape_to_string(w.shape()) +
                                " incompatible with input " + NdArray::shape_to_string(v.shape()) +
                                " at l=" + std::to_string(l));
  }
  if (bias && l != 0) throw std::invalid_argument("self_interaction: biases are only valid at l=0");
  const int64_t c_out = w.extent(0);

  ad::Var out = ad::contract("dc,acm->adm", weights, input);  // [n, c_out, 2l+1]
  if (bias) {
    if (tape.value(*bias).size() != c_out) {
      throw std::invalid_argument("self_interaction: bias shape " +
                                  NdArray::shape_to_string(tape.value(*bias).shape()) +
                                  " does not match c_out=" + std::to_string(c_out));
    }
    out = ad::add(out, ad::reshape(*bias, {1, c_out, 1}));
  }
  return out;
}

ad::Var apply_eta(Eta eta, ad::Var x) {
  switch (eta) {
    case Eta::ShiftedSoftplus:
      return ad::shifted_softplus(x);
    case Eta::Identity:
      return x;
  }
  throw std::logic_error("apply_eta: unknown eta");
}

ad::Var norm_nonlinearity(ad::Tape& tape, int l, Eta eta, ad::Var bias, ad::Var input) {
  const NdArray& v = tape.value(input);
  if (v.rank() != 3 || v.extent(2) != 2 * l + 1) {
    throw std::invalid_argument("norm_nonlinearity: input shape " + NdArray::shape_to_string(v.shape()) +
                                " does not match l=" + std::to_string(l));
  }
  const int64_t n = v.extent(0);
  const int64_t c = v.extent(1);
  if (tape.value(bias).size() != c) {
    throw std::invalid_argument("norm_nonlinearity: bias shape " +
                                NdArray::shape_to_string(tape.value(bias).shape()) +
                                " does not match channels=" + std::to_string(c));
  }
  if (l == 0) {
    return apply_eta(eta, ad::add(input, ad::reshape(bias, {1, c, 1})));
  }
  ad::Var norm = ad::sqrt(ad::add_scalar(ad::sum_axis(ad::square(input), 2), kNormEps));  // [n, c]
  ad::Var gain = apply_eta(eta, ad::add(norm, ad::reshape(bias, {1, c})));
  return ad::mul(ad::reshape(gain, {n, c, 1}), input);
}

FeatureMap concat_features(const std::vector<FeatureMap>& inputs) {
  if (inputs.empty()) throw std::invalid_argument("concat_features: no inputs");

  int64_t n = -1;
  for (const FeatureMap& fm : inputs) {
    for (const auto& [l, var] : fm) {
      const int64_t points = var.tape->value(var).extent(0);
      if (n < 0) n = points;
      if (points != n) {
        throw std::invalid_argument("concat_features: point counts differ (" + std::to_string(n) +
                                    " vs " + std::to_string(points) + ")");
      }
    }
  }

  FeatureMap out;
  std::map<int, std::vector<ad::Var>> gathered;
  for (const FeatureMap& fm : inputs)
    for (const auto& [l, var] : fm) gathered[l].push_back(var);
  for (auto& [l, vars] : gathered) {
    out[l] = vars.size() == 1 ? vars.front() : ad::concat(vars, 1);
  }
  return out;
}

std::map<int, ad::Var> global_pool(const FeatureMap& input) {
  std::map<int, ad::Var> out;
  for (const auto& [l, var] : input) out[l] = ad::sum_axis(var, 0);
  return out;
}

ad::Var vote_aggregate(ad::Tape& tape, ad::Var logits, ad::Var displacements, const PointCloud& cloud) {
  const NdArray& lv = tape.value(logits);
  const NdArray& dv = tape.value(displacements);
  const int64_t n = cloud.num_points();
  if (lv.rank() != 1 || lv.extent(0) != n || dv.rank() != 2 || dv.extent(0) != n || dv.extent(1) != 3) {
    throw std::invalid_argument("vote_aggregate: logits " + NdArray::shape_to_string(lv.shape()) +
                                " / displacements " + NdArray::shape_to_string(dv.shape()) +
                                " do not match " + std::to_string(n) + " points");
  }
  ad::Var p = ad::softmax(logits, 0);
  ad::Var votes = ad::add(tape.constant(cloud.positions), displacements);  // [n, 3]
  return ad::contract("a,ad->d", p, votes);
}

}  // namespace tfn::layers
