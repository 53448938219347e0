#pragma once

#include <vector>

#include "tfn/rotation.hpp"

namespace tfn::so3 {

/// Real spherical harmonics Y^(l)_m, orthonormal over the unit sphere.
///
/// Component ordering is m = -l..l ascending, fixed project-wide.  In this
/// basis Y^(1) evaluated at a unit vector (x, y, z) is sqrt(3/4pi) * (y, z, x),
/// i.e. the l = 1 components carry the Cartesian coordinates in (y, z, x)
/// order.  No Condon-Shortley phase.
///
/// Throws std::invalid_argument for a zero direction: there is no harmonic
/// value at r = 0 and callers (the filter code) must mask that case.
std::vector<double> real_spherical_harmonics(int l, const Vec3& direction);

/// Evaluation context pinning l_max; the normalization convention is fixed
/// project-wide and carried here as a tag.
struct RealSphericalHarmonicBasis {
  int l_max = 2;
  static constexpr const char* normalization = "orthonormal";

  std::vector<double> eval(int l, const Vec3& direction) const;
};

}  // namespace tfn::so3
