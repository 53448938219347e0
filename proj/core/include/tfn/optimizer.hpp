#pragma once

#include <cstdint>
#include <map>
#include <string>

#include "tfn/nd_array.hpp"

namespace tfn::ad {

struct AdamConfig {
  double lr = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

/// First/second moment accumulators per parameter plus the shared step count.
struct AdamState {
  std::map<std::string, NdArray> m;
  std::map<std::string, NdArray> v;
  int64_t step = 0;
};

/// One Adam update over a named parameter set, in place.
/// Parameters without a matching gradient are left untouched.
void adam_step(std::map<std::string, NdArray>& params,
               const std::map<std::string, NdArray>& grads,
               AdamState& state, const AdamConfig& config);

}  // namespace tfn::ad
