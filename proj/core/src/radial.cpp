#include "tfn/radial.hpp"

#include <cmath>
#include <stdexcept>

namespace tfn::layers {

NdArray radial_basis(const RadialConfig& config, const NdArray& distances) {
  if (config.n_basis < 2) throw std::invalid_argument("radial_basis: need at least 2 basis functions");
  const int64_t p = distances.size();
  NdArray out({p, config.n_basis});
  const double var = config.variance();
  for (int64_t i = 0; i < p; ++i) {
    const double r = distances[i];
    for (int k = 0; k < config.n_basis; ++k) {
      const double center = config.r_min + config.spacing() * k;
      const double d = r - center;
      out[i * config.n_basis + k] = std::exp(-d * d / (2.0 * var));
    }
  }
  return out;
}

std::map<std::string, std::vector<int64_t>> radial_param_shapes(const RadialNet& net) {
  return {
      {"w1", {net.config.n_basis, net.config.hidden}},
      {"b1", {net.config.hidden}},
      {"w2", {net.config.hidden, net.channels}},
      {"b2", {net.channels}},
  };
}

ad::Var radial_forward(ad::Tape& tape, const RadialNet& net, const RadialParams& params,
                       const NdArray& distances) {
  const NdArray basis = radial_basis(net.config, distances);
  ad::Var g = tape.constant(basis);  // [P, n_basis]
  ad::Var h = ad::shifted_softplus(ad::add(ad::matmul(g, params.w1), params.b1));
  return ad::add(ad::matmul(h, params.w2), params.b2);  // [P, channels]
}

std::vector<double> radial_eval(const RadialNet& net, const std::map<std::string, NdArray>& params,
                                double r) {
  if (r < 0.0) throw std::invalid_argument("radial_eval: negative distance");
  ad::Tape tape;
  RadialParams bound{
      tape.constant(params.at("w1")),
      tape.constant(params.at("b1")),
      tape.constant(params.at("w2")),
      tape.constant(params.at("b2")),
  };
  const ad::Var out = radial_forward(tape, net, bound, NdArray({1}, {r}));
  const NdArray& v = tape.value(out);
  return std::vector<double>(v.data().begin(), v.data().end());
}

}  // namespace tfn::layers
