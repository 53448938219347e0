#include "tfn/optimizer.hpp"

#include <cmath>
#include <stdexcept>

namespace tfn::ad {

void adam_step(std::map<std::string, NdArray>& params,
               const std::map<std::string, NdArray>& grads,
               AdamState& state, const AdamConfig& config) {
  state.step += 1;
  const double bc1 = 1.0 - std::pow(config.beta1, static_cast<double>(state.step));
  const double bc2 = 1.0 - std::pow(config.beta2, static_cast<double>(state.step));
  for (auto& [name, p] : params) {
    const auto git = grads.find(name);
    if (git == grads.end()) continue;
    const NdArray& g = git->second;
    if (!g.same_shape(p)) {
      throw std::invalid_argument("adam_step: gradient shape " + NdArray::shape_to_string(g.shape()) +
                                  " does not match parameter '" + name + "' shape " +
                                  NdArray::shape_to_string(p.shape()));
    }
    NdArray& m = state.m.try_emplace(name, NdArray(p.shape())).first->second;
    NdArray& v = state.v.try_emplace(name, NdArray(p.shape())).first->second;
    for (int64_t i = 0; i < p.size(); ++i) {
      m[i] = config.beta1 * m[i] + (1.0 - config.beta1) * g[i];
      v[i] = config.beta2 * v[i] + (1.0 - config.beta2) * g[i] * g[i];
      const double mhat = m[i] / bc1;
      const double vhat = v[i] / bc2;
      p[i] -= config.lr * mhat / (std::sqrt(vhat) + config.eps);
    }
  }
}

}  // namespace tfn::ad
