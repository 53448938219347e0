#include <stdexcept>
#include <cmath>
#include <numbers>

#include <doctest.h>

#include "support/test_support.hpp"
#include "tfn/layers.hpp"
#include "tfn/spherical_harmonics.hpp"
#include "tfn/wigner.hpp"

using namespace tfn;
using namespace tfn::layers;

namespace {

/// Small hand-set radial net: identity first layer, selectable second layer.
struct TinyRadial {
  RadialNet net;
  std::map<std::string, NdArray> params;

  explicit TinyRadial(int channels = 1, double w2_fill = 1.0) {
    net.config = RadialConfig{8, 0.0, 2.0, 8};
    net.channels = channels;
    NdArray w1({8, 8});
    for (int i = 0; i < 8; ++i) w1.at({i, i}) = 1.0;
    NdArray w2({8, channels});
    for (int64_t i = 0; i < w2.size(); ++i) w2[i] = w2_fill;
    params = {{"w1", w1}, {"b1", NdArray({8})}, {"w2", w2}, {"b2", NdArray({channels})}};
  }

  RadialParams bind(ad::Tape& tape) const {
    return RadialParams{tape.constant(params.at("w1")), tape.constant(params.at("b1")),
                        tape.constant(params.at("w2")), tape.constant(params.at("b2"))};
  }
};

PointCloud cloud_from(const std::vector<so3::Vec3>& points) {
  PointCloud cloud;
  cloud.positions = NdArray({static_cast<int64_t>(points.size()), 3});
  for (int64_t a = 0; a < cloud.num_points(); ++a) {
    for (int64_t k = 0; k < 3; ++k) cloud.positions.at({a, k}) = points[static_cast<size_t>(a)][static_cast<size_t>(k)];
  }
  return cloud;
}

}  // namespace

TEST_SUITE_BEGIN("layers");

TEST_CASE("radial basis peaks at its center with pass-through weights") {
  TinyRadial tiny;
  // select basis function 3 alone
  tiny.params["w2"] = NdArray({8, 1});
  tiny.params["w2"].at({3, 0}) = 1.0;
  const double center = tiny.net.config.r_min + 3 * tiny.net.config.spacing();
  const double at_center = radial_eval(tiny.net, tiny.params, center)[0];
  for (int k = 0; k < 8; ++k) {
    if (k == 3) continue;
    const double elsewhere =
        radial_eval(tiny.net, tiny.params, tiny.net.config.r_min + k * tiny.net.config.spacing())[0];
    CHECK(at_center > elsewhere);
  }
}

TEST_CASE("radial_eval rejects negative distances") {
  TinyRadial tiny;
  CHECK_THROWS_AS(radial_eval(tiny.net, tiny.params, -0.1), std::invalid_argument);
}

TEST_CASE("filter with l_f=0 ignores direction") {
  TinyRadial tiny;
  const FilterSpec spec{0, 0, 0, 1};
  const NdArray a = filter_eval(spec, tiny.net, tiny.params, {0.0, 0.0, 0.7});
  const NdArray b = filter_eval(spec, tiny.net, tiny.params, {0.7 / std::numbers::sqrt2, 0.0, 0.7 / std::numbers::sqrt2});
  CHECK(a.at({0, 0}) == doctest::Approx(b.at({0, 0})).epsilon(1e-12));
}

TEST_CASE("filter separates into radial and angular factors") {
  TinyRadial tiny;
  const FilterSpec spec{0, 1, 1, 1};
  const so3::Vec3 r{0.0, 0.0, 0.6};
  const so3::Vec3 r2{0.0, 0.0, 1.2};
  const NdArray f1 = filter_eval(spec, tiny.net, tiny.params, r);
  const NdArray f2 = filter_eval(spec, tiny.net, tiny.params, r2);
  const double rad1 = radial_eval(tiny.net, tiny.params, 0.6)[0];
  const double rad2 = radial_eval(tiny.net, tiny.params, 1.2)[0];
  // same direction: the angular profile is unchanged, only the radial factor moves
  for (int m = 0; m < 3; ++m) {
    CHECK(f1.at({0, m}) * rad2 == doctest::Approx(f2.at({0, m}) * rad1).epsilon(1e-12));
  }
}

TEST_CASE("filter at the origin: zero for l_f > 0, isotropic value for l_f = 0") {
  TinyRadial tiny;
  const NdArray f1 = filter_eval(FilterSpec{0, 1, 1, 1}, tiny.net, tiny.params, {0, 0, 0});
  CHECK(f1.max_abs() == 0.0);
  const NdArray f0 = filter_eval(FilterSpec{0, 0, 0, 1}, tiny.net, tiny.params, {0, 0, 0});
  const double expected = radial_eval(tiny.net, tiny.params, 0.0)[0] / std::sqrt(4.0 * std::numbers::pi);
  CHECK(f0.at({0, 0}) == doctest::Approx(expected).epsilon(1e-12));
}

TEST_CASE("filter equivariance: F(R r) = D^(l_f)(g) F(r) within 1e-9") {
  TinyRadial tiny;
  const so3::CGTable cg(2);
  RandomEngine rng(31);
  for (int lf = 1; lf <= 2; ++lf) {
    const FilterSpec spec{0, lf, lf, 1};
    double worst = 0.0;
    for (int t = 0; t < 50; ++t) {
      const so3::Rotation g = so3::Rotation::random(rng);
      const so3::Vec3 r{rng.uniform(-1, 1), rng.uniform(-1, 1), rng.uniform(-1, 1)};
      const NdArray lhs = filter_eval(spec, tiny.net, tiny.params, g(r));
      const NdArray base = filter_eval(spec, tiny.net, tiny.params, r);
      const NdArray d = so3::wigner_d_matrix(lf, g, cg);
      const int nm = 2 * lf + 1;
      for (int m = 0; m < nm; ++m) {
        double acc = 0.0;
        for (int mp = 0; mp < nm; ++mp) acc += d.at({m, mp}) * base.at({0, mp});
        worst = std::max(worst, std::abs(lhs.at({0, m}) - acc));
      }
    }
    CHECK(worst < 1e-9);
  }
}

TEST_CASE("invalid filter paths are rejected") {
  CHECK_THROWS_AS((FilterSpec{0, 1, 2, 1}).validate(), std::invalid_argument);
  CHECK_THROWS_AS((FilterSpec{1, 1, 3, 1}).validate(), std::invalid_argument);
  CHECK_NOTHROW((FilterSpec{1, 1, 2, 1}).validate());
}

TEST_CASE("all-l_f=0 convolution reduces to distance-weighted scalar aggregation") {
  TinyRadial tiny;
  const so3::CGTable cg(1);
  const PointCloud cloud = cloud_from({{0, 0, 0}, {1.0, 0.3, -0.2}, {-0.5, 0.8, 0.4}});
  RandomEngine rng(33);
  const NdArray v = test::random_array({3, 1, 1}, rng);

  ad::Tape tape;
  const PairGeometry geom = PairGeometry::from_cloud(cloud, {0});
  const ad::Var out = point_convolution(tape, FilterSpec{0, 0, 0, 1}, tiny.net, tiny.bind(tape), geom,
                                        cg, tape.constant(v));

  const double y0 = 1.0 / std::sqrt(4.0 * std::numbers::pi);
  for (int64_t a = 0; a < 3; ++a) {
    double want = 0.0;
    for (int64_t b = 0; b < 3; ++b) {
      double sq = 0.0;
      for (int64_t k = 0; k < 3; ++k) {
        const double d = cloud.positions.at({a, k}) - cloud.positions.at({b, k});
        sq += d * d;
      }
      want += radial_eval(tiny.net, tiny.params, std::sqrt(sq))[0] * y0 * v.at({b, 0, 0});
    }
    CHECK(tape.value(out).at({a, 0, 0}) == doctest::Approx(want).epsilon(1e-12));
  }
}

TEST_CASE("point convolution matches a direct nested-loop oracle on a mixed path") {
  TinyRadial tiny(2, 0.37);
  const so3::CGTable cg(2);
  const PointCloud cloud = cloud_from({{0.2, 0, 0}, {1.1, 0.4, -0.3}, {-0.6, 0.9, 0.5}, {0.3, -0.8, 1.2}});
  RandomEngine rng(35);
  const NdArray v = test::random_array({4, 2, 3}, rng);  // l_i = 1, two channels

  const FilterSpec spec{1, 1, 2, 2};
  ad::Tape tape;
  const PairGeometry geom = PairGeometry::from_cloud(cloud, {1});
  const ad::Var out =
      point_convolution(tape, spec, tiny.net, tiny.bind(tape), geom, cg, tape.constant(v));

  for (int64_t a = 0; a < 4; ++a) {
    for (int64_t c = 0; c < 2; ++c) {
      for (int mo = -2; mo <= 2; ++mo) {
        double want = 0.0;
        for (int64_t b = 0; b < 4; ++b) {
          so3::Vec3 diff{cloud.positions.at({a, 0}) - cloud.positions.at({b, 0}),
                         cloud.positions.at({a, 1}) - cloud.positions.at({b, 1}),
                         cloud.positions.at({a, 2}) - cloud.positions.at({b, 2})};
          const double r = so3::norm(diff);
          if (b == a || r == 0.0) continue;  // l_f = 1 filter vanishes at the self-pair
          const double rad = radial_eval(tiny.net, tiny.params, r)[static_cast<size_t>(c)];
          const auto y = so3::real_spherical_harmonics(1, diff);
          for (int mf = -1; mf <= 1; ++mf)
            for (int mi = -1; mi <= 1; ++mi)
              want += cg.coefficient(2, mo, 1, mf, 1, mi) * rad * y[static_cast<size_t>(mf + 1)] *
                      v.at({b, c, mi + 1});
        }
        CHECK(tape.value(out).at({a, c, mo + 2}) == doctest::Approx(want).epsilon(1e-10));
      }
    }
  }
}

TEST_CASE("single-point cloud: only the self-pair survives and l_f>0 paths vanish") {
  TinyRadial tiny;
  const so3::CGTable cg(1);
  const PointCloud cloud = cloud_from({{0.4, -0.2, 0.9}});
  ad::Tape tape;
  const PairGeometry geom = PairGeometry::from_cloud(cloud, {0, 1});
  const NdArray v({1, 1, 1}, {2.5});

  const ad::Var scalar_path = point_convolution(tape, FilterSpec{0, 0, 0, 1}, tiny.net,
                                                tiny.bind(tape), geom, cg, tape.constant(v));
  const double expected = radial_eval(tiny.net, tiny.params, 0.0)[0] /
                          std::sqrt(4.0 * std::numbers::pi) * 2.5;
  CHECK(tape.value(scalar_path).at({0, 0, 0}) == doctest::Approx(expected).epsilon(1e-12));

  const ad::Var vector_path = point_convolution(tape, FilterSpec{0, 1, 1, 1}, tiny.net,
                                                tiny.bind(tape), geom, cg, tape.constant(v));
  CHECK(tape.value(vector_path).max_abs() == 0.0);
}

TEST_CASE("point convolution rejects order/channel mismatches") {
  TinyRadial tiny;
  const so3::CGTable cg(1);
  const PointCloud cloud = cloud_from({{0, 0, 0}, {1, 0, 0}});
  ad::Tape tape;
  const PairGeometry geom = PairGeometry::from_cloud(cloud, {0, 1});
  // wrong m extent for l_i = 1
  CHECK_THROWS_AS(point_convolution(tape, FilterSpec{1, 0, 1, 1}, tiny.net, tiny.bind(tape), geom, cg,
                                    tape.constant(NdArray({2, 1, 1}))),
                  std::invalid_argument);
  // channel mismatch
  CHECK_THROWS_AS(point_convolution(tape, FilterSpec{0, 0, 0, 2}, tiny.net, tiny.bind(tape), geom, cg,
                                    tape.constant(NdArray({2, 2, 1}))),
                  std::invalid_argument);
}

TEST_CASE("self-interaction with identity weights and zero bias is the identity") {
  ad::Tape tape;
  RandomEngine rng(41);
  const NdArray v = test::random_array({3, 2, 3}, rng);
  NdArray eye({2, 2});
  eye.at({0, 0}) = eye.at({1, 1}) = 1.0;
  const ad::Var out = self_interaction(tape, 1, tape.constant(eye), std::nullopt, tape.constant(v));
  for (int64_t i = 0; i < v.size(); ++i) CHECK(tape.value(out)[i] == v[i]);
}

TEST_CASE("self-interaction commutes with D^(1) exactly") {
  const so3::CGTable cg(1);
  RandomEngine rng(43);
  const NdArray v = test::random_array({2, 3, 3}, rng);
  const NdArray w = test::random_array({2, 3}, rng);
  const so3::Rotation g = so3::Rotation::random(rng);
  const NdArray d = so3::wigner_d_matrix(1, g, cg);

  auto apply_d = [&](const NdArray& in) {
    NdArray out(in.shape());
    for (int64_t a = 0; a < in.extent(0); ++a)
      for (int64_t c = 0; c < in.extent(1); ++c)
        for (int m = 0; m < 3; ++m) {
          double acc = 0.0;
          for (int mp = 0; mp < 3; ++mp) acc += d.at({m, mp}) * in.at({a, c, mp});
          out.at({a, c, m}) = acc;
        }
    return out;
  };
  auto run_si = [&](const NdArray& in) {
    ad::Tape tape;
    return tape.value(self_interaction(tape, 1, tape.constant(w), std::nullopt, tape.constant(in)));
  };
  const NdArray rotate_then_mix = run_si(apply_d(v));
  const NdArray mix_then_rotate = apply_d(run_si(v));
  // exact in exact arithmetic (disjoint indices); the two orders of float
  // summation differ only at machine precision
  for (int64_t i = 0; i < rotate_then_mix.size(); ++i) {
    CHECK(rotate_then_mix[i] == doctest::Approx(mix_then_rotate[i]).epsilon(1e-14));
  }
}

TEST_CASE("2->1 mix with weights [1, 1] sums the channels") {
  ad::Tape tape;
  const NdArray v({2, 2, 1}, {1.0, 10.0, 2.0, 20.0});
  const ad::Var out =
      self_interaction(tape, 0, tape.constant(NdArray({1, 2}, {1.0, 1.0})), std::nullopt, tape.constant(v));
  CHECK(tape.value(out).at({0, 0, 0}) == doctest::Approx(11.0));
  CHECK(tape.value(out).at({1, 0, 0}) == doctest::Approx(22.0));
}

TEST_CASE("self-interaction rejects bias off l=0 and bad shapes") {
  ad::Tape tape;
  const ad::Var v1 = tape.constant(NdArray({2, 2, 3}));
  const ad::Var w = tape.constant(NdArray({2, 2}));
  const ad::Var b = tape.constant(NdArray({2}));
  CHECK_THROWS_AS(self_interaction(tape, 1, w, b, v1), std::invalid_argument);
  CHECK_THROWS_AS(self_interaction(tape, 1, tape.constant(NdArray({2, 3})), std::nullopt, v1),
                  std::invalid_argument);
}

TEST_CASE("norm nonlinearity: zero l=1 feature with zero bias stays zero") {
  ad::Tape tape;
  const ad::Var out = norm_nonlinearity(tape, 1, Eta::ShiftedSoftplus, tape.constant(NdArray({2})),
                                        tape.constant(NdArray({3, 2, 3})));
  CHECK(tape.value(out).max_abs() == 0.0);
}

TEST_CASE("norm nonlinearity rotates l=1 features exactly with the input") {
  const so3::CGTable cg(1);
  RandomEngine rng(47);
  const NdArray v = test::random_array({2, 2, 3}, rng);
  const NdArray bias = test::random_array({2}, rng);
  const so3::Rotation g = so3::Rotation::random(rng);
  const NdArray d = so3::wigner_d_matrix(1, g, cg);

  auto apply_d = [&](const NdArray& in) {
    NdArray out(in.shape());
    for (int64_t a = 0; a < in.extent(0); ++a)
      for (int64_t c = 0; c < in.extent(1); ++c)
        for (int m = 0; m < 3; ++m) {
          double acc = 0.0;
          for (int mp = 0; mp < 3; ++mp) acc += d.at({m, mp}) * in.at({a, c, mp});
          out.at({a, c, m}) = acc;
        }
    return out;
  };
  auto run = [&](const NdArray& in) {
    ad::Tape tape;
    return tape.value(
        norm_nonlinearity(tape, 1, Eta::ShiftedSoftplus, tape.constant(bias), tape.constant(in)));
  };
  const NdArray lhs = run(apply_d(v));
  const NdArray rhs = apply_d(run(v));
  for (int64_t i = 0; i < lhs.size(); ++i) CHECK(lhs[i] == doctest::Approx(rhs[i]).epsilon(1e-13));
}

TEST_CASE("norm nonlinearity at l=0 is a plain biased activation") {
  ad::Tape tape;
  const NdArray v({1, 2, 1}, {0.3, -1.1});
  const NdArray b({2}, {0.5, 0.2});
  const ad::Var out = norm_nonlinearity(tape, 0, Eta::ShiftedSoftplus, tape.constant(b), tape.constant(v));
  auto ssp = [](double x) { return std::log(0.5 * std::exp(x) + 0.5); };
  CHECK(tape.value(out).at({0, 0, 0}) == doctest::Approx(ssp(0.8)).epsilon(1e-14));
  CHECK(tape.value(out).at({0, 1, 0}) == doctest::Approx(ssp(-0.9)).epsilon(1e-14));
}

TEST_CASE("concat_features merges channels and passes lone orders through") {
  ad::Tape tape;
  RandomEngine rng(49);
  FeatureMap a{{1, tape.constant(test::random_array({3, 2, 3}, rng))}};
  FeatureMap b{{0, tape.constant(test::random_array({3, 4, 1}, rng))},
               {1, tape.constant(test::random_array({3, 3, 3}, rng))}};
  const FeatureMap merged = concat_features({a, b});
  CHECK(tape.value(merged.at(1)).extent(1) == 5);
  CHECK(tape.value(merged.at(0)).extent(1) == 4);

  const FeatureMap single = concat_features({a});
  for (int64_t i = 0; i < tape.value(single.at(1)).size(); ++i) {
    CHECK(tape.value(single.at(1))[i] == tape.value(a.at(1))[i]);
  }

  FeatureMap wrong{{0, tape.constant(NdArray({2, 1, 1}))}};
  CHECK_THROWS_AS(concat_features({a, wrong}), std::invalid_argument);
}

TEST_CASE("global pool of a single point returns that point's features") {
  ad::Tape tape;
  RandomEngine rng(51);
  const NdArray v = test::random_array({1, 3, 3}, rng);
  const auto pooled = global_pool({{1, tape.constant(v)}});
  for (int64_t c = 0; c < 3; ++c)
    for (int64_t m = 0; m < 3; ++m) CHECK(tape.value(pooled.at(1)).at({c, m}) == v.at({0, c, m}));
}

TEST_CASE("global pool is invariant under point permutation") {
  RandomEngine rng(53);
  const NdArray v = test::random_array({4, 2, 3}, rng);
  NdArray shuffled(v.shape());
  const std::vector<int64_t> perm{2, 0, 3, 1};
  for (int64_t a = 0; a < 4; ++a)
    for (int64_t c = 0; c < 2; ++c)
      for (int64_t m = 0; m < 3; ++m) shuffled.at({a, c, m}) = v.at({perm[static_cast<size_t>(a)], c, m});
  auto pool = [](const NdArray& in) {
    ad::Tape tape;
    return tape.value(global_pool({{1, tape.constant(in)}}).at(1));
  };
  const NdArray p1 = pool(v), p2 = pool(shuffled);
  for (int64_t i = 0; i < p1.size(); ++i) CHECK(p1[i] == doctest::Approx(p2[i]).epsilon(1e-15));
}

TEST_CASE("vote aggregation: single point with zero displacement returns its position") {
  const PointCloud cloud = cloud_from({{0.3, -0.7, 1.1}});
  ad::Tape tape;
  const ad::Var u = vote_aggregate(tape, tape.constant(NdArray({1})), tape.constant(NdArray({1, 3})), cloud);
  for (int64_t k = 0; k < 3; ++k) CHECK(tape.value(u)[k] == doctest::Approx(cloud.positions.at({0, k})));
}

TEST_CASE("vote aggregation shifts by exactly the cloud translation") {
  RandomEngine rng(55);
  const PointCloud cloud = cloud_from({{0.2, 0.1, 0.0}, {1.0, -0.4, 0.6}, {-0.8, 0.5, 0.3}});
  const NdArray logits = test::random_array({3}, rng);
  const NdArray delta = test::random_array({3, 3}, rng);
  const so3::Vec3 t{1.7, -2.4, 0.9};

  auto run = [&](const PointCloud& c) {
    ad::Tape tape;
    return tape.value(vote_aggregate(tape, tape.constant(logits), tape.constant(delta), c));
  };
  const NdArray base = run(cloud);
  PointCloud shifted = cloud;
  for (int64_t a = 0; a < 3; ++a)
    for (int64_t k = 0; k < 3; ++k) shifted.positions.at({a, k}) += t[static_cast<size_t>(k)];
  const NdArray moved = run(shifted);
  for (int64_t k = 0; k < 3; ++k) {
    CHECK(moved[k] - base[k] == doctest::Approx(t[static_cast<size_t>(k)]).epsilon(1e-12));
  }
}

TEST_CASE("vote aggregation with uniform logits and zero displacements is the midpoint") {
  const PointCloud cloud = cloud_from({{1.0, 0.0, 2.0}, {3.0, 4.0, -2.0}});
  ad::Tape tape;
  const ad::Var u = vote_aggregate(tape, tape.constant(NdArray({2})), tape.constant(NdArray({2, 3})), cloud);
  CHECK(tape.value(u)[0] == doctest::Approx(2.0));
  CHECK(tape.value(u)[1] == doctest::Approx(2.0));
  CHECK(tape.value(u)[2] == doctest::Approx(0.0));
}

TEST_CASE("hard cutoff masks pairs beyond the radius") {
  TinyRadial tiny;
  const so3::CGTable cg(1);
  const PointCloud cloud = cloud_from({{0, 0, 0}, {0.5, 0, 0}, {5.0, 0, 0}});
  const NdArray v({3, 1, 1}, {1.0, 1.0, 1.0});

  ad::Tape tape;
  const PairGeometry cut = PairGeometry::from_cloud(cloud, {0}, 1.0);
  const ad::Var out =
      point_convolution(tape, FilterSpec{0, 0, 0, 1}, tiny.net, tiny.bind(tape), cut, cg, tape.constant(v));
  // the far point contributes nothing to point 0
  const double y0 = 1.0 / std::sqrt(4.0 * std::numbers::pi);
  const double want = (radial_eval(tiny.net, tiny.params, 0.0)[0] +
                       radial_eval(tiny.net, tiny.params, 0.5)[0]) * y0;
  CHECK(tape.value(out).at({0, 0, 0}) == doctest::Approx(want).epsilon(1e-12));
}

TEST_SUITE_END();
