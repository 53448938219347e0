#include "tfn/equivariance.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>
#include <stdexcept>

#include <nlohmann/json.hpp>

#include "tfn/random.hpp"
#include "tfn/wigner.hpp"

namespace tfn::equiv {

namespace {

layers::FeatureValues normalize_rms(const layers::FeatureValues& features) {
  double sq = 0.0;
  int64_t count = 0;
  for (const auto& [l, block] : features) {
    for (const double x : block.data()) sq += x * x;
    count += block.size();
  }
  const double rms = count > 0 ? std::sqrt(sq / static_cast<double>(count)) : 0.0;
  if (rms == 0.0) return features;
  layers::FeatureValues out = features;
  for (auto& [l, block] : out) {
    for (int64_t i = 0; i < block.size(); ++i) block[i] /= rms;
  }
  return out;
}

double feature_diff(const layers::FeatureValues& a, const layers::FeatureValues& b, int l) {
  const NdArray& x = a.at(l);
  const NdArray& y = b.at(l);
  if (!x.same_shape(y)) {
    throw std::runtime_error("equivariance: output order " + std::to_string(l) +
                             " changed shape between runs: " + NdArray::shape_to_string(x.shape()) +
                             " vs " + NdArray::shape_to_string(y.shape()));
  }
  double worst = 0.0;
  for (int64_t i = 0; i < x.size(); ++i) worst = std::max(worst, std::abs(x[i] - y[i]));
  return worst;
}

void require_same_orders(const layers::FeatureValues& a, const layers::FeatureValues& b) {
  if (a.size() != b.size()) throw std::runtime_error("equivariance: output orders differ between runs");
  for (const auto& [l, unused] : a) {
    if (!b.count(l)) {
      throw std::runtime_error("equivariance: order " + std::to_string(l) + " undeclared in one run");
    }
  }
}

std::vector<int64_t> random_permutation(int64_t n, RandomEngine& rng) {
  std::vector<int64_t> perm(static_cast<size_t>(n));
  std::iota(perm.begin(), perm.end(), 0);
  for (int64_t i = n - 1; i > 0; --i) {
    const int64_t j = rng.uniform_int(i + 1);
    std::swap(perm[static_cast<size_t>(i)], perm[static_cast<size_t>(j)]);
  }
  return perm;
}

}  // namespace

void EquivarianceReport::finalize() {
  max_residual = 0.0;
  double total = 0.0;
  for (const auto& r : residuals) {
    max_residual = std::max(max_residual, r.residual);
    total += r.residual;
  }
  mean_residual = residuals.empty() ? 0.0 : total / static_cast<double>(residuals.size());
  pass = max_residual < tolerance;
}

std::string EquivarianceReport::to_json() const {
  nlohmann::ordered_json j;
  j["schema"] = "tfn.equivariance.v1";
  j["transform"] = transform;
  j["subject"] = subject;
  j["tolerance"] = tolerance;
  j["max_residual"] = max_residual;
  j["mean_residual"] = mean_residual;
  j["pass"] = pass;
  nlohmann::ordered_json rows = nlohmann::ordered_json::array();
  for (const auto& r : residuals) {
    rows.push_back({{"trial", r.trial}, {"order", r.order}, {"residual", r.residual}});
  }
  j["residuals"] = std::move(rows);
  return j.dump(2);
}

std::string EquivarianceReport::to_table() const {
  std::ostringstream os;
  os << transform << " " << subject << ": max " << max_residual << ", mean " << mean_residual
     << ", tol " << tolerance << " -> " << (pass ? "pass" : "FAIL");
  return os.str();
}

PointCloud rotate_cloud(const PointCloud& cloud, const so3::Rotation& g) {
  PointCloud out = cloud;
  const so3::Mat3 r = g.matrix();
  for (int64_t a = 0; a < cloud.num_points(); ++a) {
    const so3::Vec3 p{cloud.positions.at({a, 0}), cloud.positions.at({a, 1}), cloud.positions.at({a, 2})};
    const so3::Vec3 q = so3::mat_vec(r, p);
    for (int64_t k = 0; k < 3; ++k) out.positions.at({a, k}) = q[static_cast<size_t>(k)];
  }
  return out;
}

PointCloud translate_cloud(const PointCloud& cloud, const so3::Vec3& t) {
  PointCloud out = cloud;
  for (int64_t a = 0; a < cloud.num_points(); ++a) {
    for (int64_t k = 0; k < 3; ++k) out.positions.at({a, k}) += t[static_cast<size_t>(k)];
  }
  return out;
}

PointCloud permute_cloud(const PointCloud& cloud, const std::vector<int64_t>& perm) {
  PointCloud out = cloud;
  for (int64_t a = 0; a < cloud.num_points(); ++a) {
    const auto src = static_cast<size_t>(perm[static_cast<size_t>(a)]);
    for (int64_t k = 0; k < 3; ++k) {
      out.positions.at({a, k}) = cloud.positions.at({static_cast<int64_t>(src), k});
    }
    if (!cloud.masses.empty()) out.masses[static_cast<size_t>(a)] = cloud.masses[src];
    if (!cloud.types.empty()) out.types[static_cast<size_t>(a)] = cloud.types[src];
  }
  if (cloud.query_index >= 0) {
    for (size_t i = 0; i < perm.size(); ++i) {
      if (perm[i] == cloud.query_index) out.query_index = static_cast<int64_t>(i);
    }
  }
  return out;
}

layers::FeatureValues rotate_features(const layers::FeatureValues& features, const so3::Rotation& g,
                                      const so3::CGTable& cg) {
  layers::FeatureValues out;
  for (const auto& [l, block] : features) {
    const NdArray d = so3::wigner_d_matrix(l, g, cg);
    const int nm = 2 * l + 1;
    NdArray rotated(block.shape());
    const int64_t lanes = block.size() / nm;
    for (int64_t lane = 0; lane < lanes; ++lane) {
      for (int m = 0; m < nm; ++m) {
        double acc = 0.0;
        for (int mp = 0; mp < nm; ++mp) acc += d[m * nm + mp] * block[lane * nm + mp];
        rotated[lane * nm + m] = acc;
      }
    }
    out.emplace(l, std::move(rotated));
  }
  return out;
}

layers::FeatureValues permute_features(const layers::FeatureValues& features,
                                       const std::vector<int64_t>& perm) {
  layers::FeatureValues out;
  for (const auto& [l, block] : features) {
    NdArray permuted(block.shape());
    const int64_t n = block.extent(0);
    const int64_t lane = block.size() / n;
    for (int64_t a = 0; a < n; ++a) {
      const int64_t src = perm[static_cast<size_t>(a)];
      for (int64_t i = 0; i < lane; ++i) permuted[a * lane + i] = block[src * lane + i];
    }
    out.emplace(l, std::move(permuted));
  }
  return out;
}

EquivarianceReport check_rotation(const FeatureModel& model, const PointCloud& cloud,
                                  const layers::FeatureValues& features, const so3::CGTable& cg,
                                  int trials, double tol, uint64_t seed) {
  EquivarianceReport report;
  report.transform = "rotation";
  report.tolerance = tol;
  RandomEngine rng(seed);

  const layers::FeatureValues input = normalize_rms(features);
  const layers::FeatureValues base = model(cloud, input);

  for (int t = 0; t < trials; ++t) {
    const so3::Rotation g = so3::Rotation::random(rng);
    const layers::FeatureValues out_g = model(rotate_cloud(cloud, g), rotate_features(input, g, cg));
    const layers::FeatureValues expected = rotate_features(base, g, cg);
    require_same_orders(out_g, expected);
    for (const auto& [l, unused] : expected) {
      report.residuals.push_back(TrialResidual{t, l, feature_diff(out_g, expected, l)});
    }
  }
  report.finalize();
  return report;
}

EquivarianceReport check_translation(const FeatureModel& model, const PointCloud& cloud,
                                     const layers::FeatureValues& features, int trials, double tol,
                                     uint64_t seed) {
  EquivarianceReport report;
  report.transform = "translation";
  report.tolerance = tol;
  RandomEngine rng(seed);

  const layers::FeatureValues input = normalize_rms(features);
  const layers::FeatureValues base = model(cloud, input);

  for (int t = 0; t < trials; ++t) {
    const so3::Vec3 shift{rng.uniform(-5.0, 5.0), rng.uniform(-5.0, 5.0), rng.uniform(-5.0, 5.0)};
    const layers::FeatureValues out_t = model(translate_cloud(cloud, shift), input);
    require_same_orders(out_t, base);
    for (const auto& [l, unused] : base) {
      report.residuals.push_back(TrialResidual{t, l, feature_diff(out_t, base, l)});
    }
  }
  report.finalize();
  return report;
}

EquivarianceReport check_permutation(const FeatureModel& model, const PointCloud& cloud,
                                     const layers::FeatureValues& features, int trials, double tol,
                                     uint64_t seed) {
  EquivarianceReport report;
  report.transform = "permutation";
  report.tolerance = tol;
  RandomEngine rng(seed);

  const layers::FeatureValues input = normalize_rms(features);
  const layers::FeatureValues base = model(cloud, input);
  const int64_t n = cloud.num_points();

  for (int t = 0; t < trials; ++t) {
    const std::vector<int64_t> perm = random_permutation(n, rng);
    const layers::FeatureValues out_p = model(permute_cloud(cloud, perm), permute_features(input, perm));
    require_same_orders(out_p, base);
    for (const auto& [l, block] : base) {
      // per-point outputs are compared after unshuffling; pooled outputs
      // (leading extent 1 while the cloud has n > 1 points) directly
      const layers::FeatureValues expected =
          (block.extent(0) == n) ? permute_features(base, perm) : base;
      report.residuals.push_back(TrialResidual{t, l, feature_diff(out_p, expected, l)});
    }
  }
  report.finalize();
  return report;
}

EquivarianceReport check_composition(const std::vector<FeatureModel>& stack, const PointCloud& cloud,
                                     const layers::FeatureValues& features, const so3::CGTable& cg,
                                     int trials, double tol, uint64_t seed) {
  if (stack.size() < 2) throw std::invalid_argument("check_composition: need at least two layers");
  EquivarianceReport report;
  report.transform = "composition";
  report.tolerance = tol;
  RandomEngine rng(seed);

  const layers::FeatureValues input = normalize_rms(features);

  // baseline intermediates x0 -> x1 -> ... -> xK
  std::vector<layers::FeatureValues> inter{input};
  for (const FeatureModel& layer : stack) inter.push_back(layer(cloud, inter.back()));

  for (int t = 0; t < trials; ++t) {
    const so3::Rotation g = so3::Rotation::random(rng);
    const PointCloud cloud_g = rotate_cloud(cloud, g);

    double per_layer_sum = 0.0;
    for (size_t k = 0; k < stack.size(); ++k) {
      const layers::FeatureValues out_k = stack[k](cloud_g, rotate_features(inter[k], g, cg));
      const layers::FeatureValues expected_k = rotate_features(inter[k + 1], g, cg);
      require_same_orders(out_k, expected_k);
      double worst = 0.0;
      for (const auto& [l, unused] : expected_k) worst = std::max(worst, feature_diff(out_k, expected_k, l));
      per_layer_sum += worst;
    }

    layers::FeatureValues chained = rotate_features(input, g, cg);
    for (const FeatureModel& layer : stack) chained = layer(cloud_g, chained);
    const layers::FeatureValues expected = rotate_features(inter.back(), g, cg);
    require_same_orders(chained, expected);
    double end_to_end = 0.0;
    for (const auto& [l, unused] : expected) {
      const double d = feature_diff(chained, expected, l);
      end_to_end = std::max(end_to_end, d);
      report.residuals.push_back(TrialResidual{t, l, d});
    }
    if (end_to_end > per_layer_sum + tol) {
      report.residuals.push_back(TrialResidual{t, -1, end_to_end});  // flags the sanity bound
    }
  }
  report.finalize();
  return report;
}

EquivarianceReport check_rotation_position(const PositionModel& model, const PointCloud& cloud,
                                           const layers::FeatureValues& features, const so3::CGTable& cg,
                                           int trials, double tol, uint64_t seed) {
  EquivarianceReport report;
  report.transform = "rotation";
  report.subject = "position";
  report.tolerance = tol;
  RandomEngine rng(seed);

  const layers::FeatureValues input = normalize_rms(features);
  const so3::Vec3 base = model(cloud, input);

  for (int t = 0; t < trials; ++t) {
    const so3::Rotation g = so3::Rotation::random(rng);
    const so3::Vec3 got = model(rotate_cloud(cloud, g), rotate_features(input, g, cg));
    const so3::Vec3 expected = g(base);
    double worst = 0.0;
    for (size_t k = 0; k < 3; ++k) worst = std::max(worst, std::abs(got[k] - expected[k]));
    report.residuals.push_back(TrialResidual{t, -1, worst});
  }
  report.finalize();
  return report;
}

EquivarianceReport check_translation_position(const PositionModel& model, const PointCloud& cloud,
                                              const layers::FeatureValues& features, int trials,
                                              double tol, uint64_t seed) {
  EquivarianceReport report;
  report.transform = "translation";
  report.subject = "position";
  report.tolerance = tol;
  RandomEngine rng(seed);

  const layers::FeatureValues input = normalize_rms(features);
  const so3::Vec3 base = model(cloud, input);

  for (int t = 0; t < trials; ++t) {
    const so3::Vec3 shift{rng.uniform(-5.0, 5.0), rng.uniform(-5.0, 5.0), rng.uniform(-5.0, 5.0)};
    const so3::Vec3 got = model(translate_cloud(cloud, shift), input);
    double worst = 0.0;
    for (size_t k = 0; k < 3; ++k) worst = std::max(worst, std::abs(got[k] - (base[k] + shift[k])));
    report.residuals.push_back(TrialResidual{t, -1, worst});
  }
  report.finalize();
  return report;
}

EquivarianceReport check_permutation_position(const PositionModel& model, const PointCloud& cloud,
                                              const layers::FeatureValues& features, int trials,
                                              double tol, uint64_t seed) {
  EquivarianceReport report;
  report.transform = "permutation";
  report.subject = "position";
  report.tolerance = tol;
  RandomEngine rng(seed);

  const layers::FeatureValues input = normalize_rms(features);
  const so3::Vec3 base = model(cloud, input);

  for (int t = 0; t < trials; ++t) {
    const std::vector<int64_t> perm = random_permutation(cloud.num_points(), rng);
    const so3::Vec3 got = model(permute_cloud(cloud, perm), permute_features(input, perm));
    double worst = 0.0;
    for (size_t k = 0; k < 3; ++k) worst = std::max(worst, std::abs(got[k] - base[k]));
    report.residuals.push_back(TrialResidual{t, -1, worst});
  }
  report.finalize();
  return report;
}

}  // namespace tfn::equiv
