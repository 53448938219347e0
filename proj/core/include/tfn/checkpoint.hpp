#pragma once

#include <string>

#include "tfn/network.hpp"

namespace tfn::model {

/// Checkpoint = architecture + flat (name, shape, row-major values) parameter
/// list, one JSON document.  config_hash ties artifacts of one run together.
struct Checkpoint {
  ModelSpec spec;
  ParamStore params;
  std::string config_hash;
};

void save_checkpoint(const std::string& path, const ModelSpec& spec, const ParamStore& params,
                     const std::string& config_hash);

Checkpoint load_checkpoint(const std::string& path);

}  // namespace tfn::model
