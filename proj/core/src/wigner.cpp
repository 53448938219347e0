#include "tfn/wigner.hpp"

#include <cmath>
#include <stdexcept>

#include "tfn/spherical_harmonics.hpp"

namespace tfn::so3 {

namespace {

/// D^(1): rotation matrix conjugated into the (y, z, x) SH component order.
NdArray wigner_d1(const Rotation& g) {
  const Mat3 r = g.matrix();
  // P maps Cartesian (x, y, z) to SH order (y, z, x); D1 = P R P^T
  const int perm[3] = {1, 2, 0};
  NdArray d({3, 3});
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j)
      d[i * 3 + j] = r[static_cast<size_t>(perm[i])][static_cast<size_t>(perm[j])];
  return d;
}

}  // namespace

NdArray wigner_d_matrix(int l, const Rotation& g, const CGTable& cg) {
  if (l < 0) throw std::invalid_argument("wigner_d_matrix: negative order");
  if (l == 0) return NdArray({1, 1}, {1.0});
  if (l == 1) return wigner_d1(g);
  if (l > cg.l_max()) throw std::invalid_argument("wigner_d_matrix: order exceeds CG table l_max");

  NdArray d_prev = wigner_d_matrix(l - 1, g, cg);
  const NdArray d_one = wigner_d1(g);
  const NdArray& c = cg.block(l, l - 1, 1);  // [2l+1, 2l-1, 3]

  const int n = 2 * l + 1;
  const int np = 2 * l - 1;
  NdArray d({n, n});
  // D^(l)_{m m'} = sum C_{m,(m1 m2)} D^(l-1)_{m1 m1'} D^(1)_{m2 m2'} C_{m',(m1' m2')}
  for (int m = 0; m < n; ++m) {
    for (int m1 = 0; m1 < np; ++m1) {
      for (int m2 = 0; m2 < 3; ++m2) {
        const double c_left = c[(m * np + m1) * 3 + m2];
        if (c_left == 0.0) continue;
        for (int m1p = 0; m1p < np; ++m1p) {
          const double dp = d_prev[m1 * np + m1p];
          for (int m2p = 0; m2p < 3; ++m2p) {
            const double w = c_left * dp * d_one[m2 * 3 + m2p];
            if (w == 0.0) continue;
            for (int mp = 0; mp < n; ++mp) {
              const double c_right = c[(mp * np + m1p) * 3 + m2p];
              if (c_right != 0.0) d[m * n + mp] += w * c_right;
            }
          }
        }
      }
    }
  }
  return d;
}

double sh_equivariance_residual(int l, const Rotation& g, const Vec3& direction, const CGTable& cg) {
  const Vec3 rotated = g(normalized(direction));
  const std::vector<double> lhs = real_spherical_harmonics(l, rotated);
  const std::vector<double> rhs = real_spherical_harmonics(l, normalized(direction));
  const NdArray d = wigner_d_matrix(l, g, cg);
  const int n = 2 * l + 1;
  double sq = 0.0;
  for (int m = 0; m < n; ++m) {
    double acc = 0.0;
    for (int mp = 0; mp < n; ++mp) acc += d[m * n + mp] * rhs[static_cast<size_t>(mp)];
    const double diff = lhs[static_cast<size_t>(m)] - acc;
    sq += diff * diff;
  }
  return std::sqrt(sq);
}

}  // namespace tfn::so3
