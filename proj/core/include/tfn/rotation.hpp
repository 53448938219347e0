#pragma once

#include <array>

#include "tfn/random.hpp"

namespace tfn::so3 {

using Vec3 = std::array<double, 3>;
using Mat3 = std::array<std::array<double, 3>, 3>;

Vec3 normalized(const Vec3& v);
double norm(const Vec3& v);
Vec3 mat_vec(const Mat3& m, const Vec3& v);

/// Element of SO(3) stored as a unit quaternion.
///
/// The quaternion is renormalized after every construction and composition so
/// that |q| = 1 holds to 1e-12 and matrix() is orthogonal with det +1 to the
/// same tolerance.
class Rotation {
 public:
  /// Identity rotation.
  Rotation() : w_(1.0), x_(0.0), y_(0.0), z_(0.0) {}
  Rotation(double w, double x, double y, double z);

  /// Rodrigues rotation about `axis` (normalized internally) by `angle`
  /// radians.  Throws std::invalid_argument on a zero axis.
  static Rotation from_axis_angle(const Vec3& axis, double angle);

  /// Haar-uniform sample: four standard normals, normalized.
  static Rotation random(RandomEngine& rng);

  Rotation inverse() const { return Rotation(w_, -x_, -y_, -z_); }

  /// Group composition: (a * b) acts as "apply b, then a".
  friend Rotation operator*(const Rotation& a, const Rotation& b);

  Mat3 matrix() const;
  Vec3 operator()(const Vec3& v) const { return mat_vec(matrix(), v); }

  double w() const { return w_; }
  double x() const { return x_; }
  double y() const { return y_; }
  double z() const { return z_; }

 private:
  void normalize();
  double w_, x_, y_, z_;
};

}  // namespace tfn::so3
