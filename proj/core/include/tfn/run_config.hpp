#pragma once

#include <string>

#include "tfn/train.hpp"

namespace tfn::io {

/// One run's validated configuration, parsed from a flat key=value file
/// ('#' starts a comment).  Unknown keys are rejected; every field is range
/// checked before any work starts.
struct RunConfig {
  std::string task;
  uint64_t seed = 0;
  int l_max = 2;
  int epochs = 0;
  int max_steps = 0;
  int train_count = 0;
  int channels = 0;
  int batch_size = 1;
  layers::RadialConfig radial;
  ad::AdamConfig adam;
  double early_stop_loss = 0.0;
  std::string out_dir = ".";
  std::string data;  // optional dataset path; generated from seed when empty

  tasks::TrainConfig to_train_config() const;
};

RunConfig parse_run_config_text(const std::string& text);
RunConfig parse_run_config_file(const std::string& path);

/// Canonical key=value rendering; the config hash is FNV-1a 64 over this.
std::string canonical_config_text(const RunConfig& config);
std::string config_hash(const RunConfig& config);

/// FNV-1a 64 as 16 hex chars (shared by artifact headers).
std::string fnv1a_hex(const std::string& text);

}  // namespace tfn::io
