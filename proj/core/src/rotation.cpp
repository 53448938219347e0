#include "tfn/rotation.hpp"

#include <cmath>
#include <stdexcept>

namespace tfn::so3 {

double norm(const Vec3& v) { return std::sqrt(v[0] * v[0] + v[1] * v[1] + v[2] * v[2]); }

Vec3 normalized(const Vec3& v) {
  const double n = norm(v);
  if (n == 0.0) throw std::invalid_argument("normalized: zero vector");
  return {v[0] / n, v[1] / n, v[2] / n};
}

Vec3 mat_vec(const Mat3& m, const Vec3& v) {
  Vec3 out{};
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) out[static_cast<size_t>(i)] += m[static_cast<size_t>(i)][static_cast<size_t>(j)] * v[static_cast<size_t>(j)];
  return out;
}

Rotation::Rotation(double w, double x, double y, double z) : w_(w), x_(x), y_(y), z_(z) { normalize(); }

void Rotation::normalize() {
  const double n = std::sqrt(w_ * w_ + x_ * x_ + y_ * y_ + z_ * z_);
  if (n == 0.0) throw std::invalid_argument("Rotation: zero quaternion");
  w_ /= n;
  x_ /= n;
  y_ /= n;
  z_ /= n;
}

Rotation Rotation::from_axis_angle(const Vec3& axis, double angle) {
  if (norm(axis) == 0.0) throw std::invalid_argument("Rotation::from_axis_angle: zero axis");
  const Vec3 a = normalized(axis);
  const double half = 0.5 * angle;
  const double s = std::sin(half);
  return Rotation(std::cos(half), s * a[0], s * a[1], s * a[2]);
}

Rotation Rotation::random(RandomEngine& rng) {
  const double w = rng.normal();
  const double x = rng.normal();
  const double y = rng.normal();
  const double z = rng.normal();
  return Rotation(w, x, y, z);
}

Rotation operator*(const Rotation& a, const Rotation& b) {
  return Rotation(a.w_ * b.w_ - a.x_ * b.x_ - a.y_ * b.y_ - a.z_ * b.z_,
                  a.w_ * b.x_ + a.x_ * b.w_ + a.y_ * b.z_ - a.z_ * b.y_,
                  a.w_ * b.y_ - a.x_ * b.z_ + a.y_ * b.w_ + a.z_ * b.x_,
                  a.w_ * b.z_ + a.x_ * b.y_ - a.y_ * b.x_ + a.z_ * b.w_);
}

Mat3 Rotation::matrix() const {
  const double w = w_, x = x_, y = y_, z = z_;
  return {{{1 - 2 * (y * y + z * z), 2 * (x * y - w * z), 2 * (x * z + w * y)},
           {2 * (x * y + w * z), 1 - 2 * (x * x + z * z), 2 * (y * z - w * x)},
           {2 * (x * z - w * y), 2 * (y * z + w * x), 1 - 2 * (x * x + y * y)}}};
}

}  // namespace tfn::so3
