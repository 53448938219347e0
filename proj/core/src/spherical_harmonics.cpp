#include "tfn/spherical_harmonics.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace tfn::so3 {

namespace {

/// Associated Legendre P_l^m(cos_theta) for m = 0..l, Ferrers convention
/// (no Condon-Shortley phase).  sin_theta >= 0 is passed separately to avoid
/// a sqrt round-trip.
std::vector<double> assoc_legendre_row(int l, double cos_theta, double sin_theta) {
  std::vector<double> out(static_cast<size_t>(l) + 1, 0.0);
  for (int m = 0; m <= l; ++m) {
    // P_m^m = (2m-1)!! sin^m
    double p_mm = 1.0;
    for (int k = 1; k <= m; ++k) p_mm *= (2.0 * k - 1.0) * sin_theta;
    if (l == m) {
      out[static_cast<size_t>(m)] = p_mm;
      continue;
    }
    double p_prev = p_mm;                                // P_m^m
    double p_cur = (2.0 * m + 1.0) * cos_theta * p_mm;   // P_{m+1}^m
    for (int ll = m + 2; ll <= l; ++ll) {
      const double p_next = ((2.0 * ll - 1.0) * cos_theta * p_cur - (ll + m - 1.0) * p_prev) / (ll - m);
      p_prev = p_cur;
      p_cur = p_next;
    }
    out[static_cast<size_t>(m)] = p_cur;
  }
  return out;
}

double factorial(int n) {
  double f = 1.0;
  for (int k = 2; k <= n; ++k) f *= k;
  return f;
}

}  // namespace

std::vector<double> real_spherical_harmonics(int l, const Vec3& direction) {
  if (l < 0) throw std::invalid_argument("real_spherical_harmonics: negative order");
  const double r = norm(direction);
  if (r == 0.0) throw std::invalid_argument("real_spherical_harmonics: zero direction");
  const double x = direction[0] / r, y = direction[1] / r, z = direction[2] / r;

  const double cos_theta = z;
  const double sin_theta = std::sqrt(std::max(0.0, 1.0 - z * z));
  // phi measured from +x in the x-y plane; for directions on the z axis any
  // phi works because sin_theta = 0 kills every m != 0 term
  double cos_phi = 1.0, sin_phi = 0.0;
  const double rho = std::hypot(x, y);
  if (rho > 0.0) {
    cos_phi = x / rho;
    sin_phi = y / rho;
  }

  const std::vector<double> p = assoc_legendre_row(l, cos_theta, sin_theta);

  std::vector<double> out(static_cast<size_t>(2 * l + 1), 0.0);
  const double inv4pi = 1.0 / (4.0 * std::numbers::pi);
  // cos(m phi), sin(m phi) by the Chebyshev-style recurrence
  double cm_prev = 1.0, sm_prev = 0.0;  // m = 0
  double cm = cos_phi, sm = sin_phi;    // m = 1
  for (int m = 0; m <= l; ++m) {
    const double nlm = std::sqrt((2.0 * l + 1.0) * inv4pi * factorial(l - m) / factorial(l + m));
    if (m == 0) {
      out[static_cast<size_t>(l)] = nlm * p[0];
      continue;
    }
    const double common = std::numbers::sqrt2 * nlm * p[static_cast<size_t>(m)];
    out[static_cast<size_t>(l + m)] = common * cm;
    out[static_cast<size_t>(l - m)] = common * sm;
    const double c_next = 2.0 * cos_phi * cm - cm_prev;
    const double s_next = 2.0 * cos_phi * sm - sm_prev;
    cm_prev = cm;
    sm_prev = sm;
    cm = c_next;
    sm = s_next;
  }
  return out;
}

std::vector<double> RealSphericalHarmonicBasis::eval(int l, const Vec3& direction) const {
  if (l > l_max) throw std::invalid_argument("RealSphericalHarmonicBasis: l exceeds l_max");
  return real_spherical_harmonics(l, direction);
}

}  // namespace tfn::so3
