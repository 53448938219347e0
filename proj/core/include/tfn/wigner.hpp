#pragma once

#include "tfn/clebsch_gordan.hpp"
#include "tfn/nd_array.hpp"
#include "tfn/rotation.hpp"

namespace tfn::so3 {

/// Representation matrix of one rotation at order l, real SH basis,
/// rows/columns ordered m = -l..l.
struct WignerD {
  int l = 0;
  NdArray matrix;  // [2l+1, 2l+1], orthogonal
};

/// D^(l)(g) in the real spherical-harmonic basis.
///
/// D^(0) = [1].  D^(1) is the 3x3 rotation matrix conjugated into the
/// (y, z, x) component ordering of the l = 1 harmonics.  Higher orders are
/// extracted from D^(l-1) (x) D^(1) with the real Clebsch-Gordan change of
/// basis, which keeps the construction consistent with the CG table by
/// definition.  `cg` must cover order l.
NdArray wigner_d_matrix(int l, const Rotation& g, const CGTable& cg);

inline WignerD wigner_d(int l, const Rotation& g, const CGTable& cg) {
  return WignerD{l, wigner_d_matrix(l, g, cg)};
}

/// || Y^(l)(R(g) r) - D^(l)(g) Y^(l)(r) ||_2 for one direction; the executable
/// form of the harmonics' transformation law.
double sh_equivariance_residual(int l, const Rotation& g, const Vec3& direction, const CGTable& cg);

}  // namespace tfn::so3
