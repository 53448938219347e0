#include "tfn/feature_map.hpp"

#include <stdexcept>

namespace tfn::layers {

namespace {

int64_t check_order_block(int l, const NdArray& block, int64_t expected_points) {
  if (block.rank() != 3 || block.extent(2) != 2 * l + 1 || block.extent(1) < 1) {
    throw std::invalid_argument("FeatureMap: order " + std::to_string(l) + " block has shape " +
                                NdArray::shape_to_string(block.shape()));
  }
  if (expected_points >= 0 && block.extent(0) != expected_points) {
    throw std::invalid_argument("FeatureMap: point counts differ across orders (" +
                                std::to_string(expected_points) + " vs " +
                                std::to_string(block.extent(0)) + ")");
  }
  return block.extent(0);
}

}  // namespace

int64_t feature_num_points(const FeatureValues& features) {
  if (features.empty()) throw std::invalid_argument("FeatureMap: empty");
  int64_t n = -1;
  for (const auto& [l, block] : features) n = check_order_block(l, block, n);
  return n;
}

int64_t feature_num_points(const ad::Tape& tape, const FeatureMap& features) {
  if (features.empty()) throw std::invalid_argument("FeatureMap: empty");
  int64_t n = -1;
  for (const auto& [l, var] : features) n = check_order_block(l, tape.value(var), n);
  return n;
}

FeatureValues feature_values(const ad::Tape& tape, const FeatureMap& features) {
  FeatureValues out;
  for (const auto& [l, var] : features) out[l] = tape.value(var);
  return out;
}

FeatureMap feature_constants(ad::Tape& tape, const FeatureValues& values) {
  FeatureMap out;
  for (const auto& [l, block] : values) out[l] = tape.constant(block);
  return out;
}

}  // namespace tfn::layers
