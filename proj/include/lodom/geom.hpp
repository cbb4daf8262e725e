#pragma once

#include <Eigen/Core>
#include <Eigen/Geometry>

namespace lodom {

using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;
using Mat4 = Eigen::Matrix4d;
using Vec6 = Eigen::Matrix<double, 6, 1>;
using Mat6 = Eigen::Matrix<double, 6, 6>;

// Rigid transform x -> R x + t. Rotation is kept as a matrix; see compose()
// for how drift is handled under repeated chaining.
class Pose {
 public:
  Pose() : rotation_(Mat3::Identity()), translation_(Vec3::Zero()) {}
  Pose(const Mat3& rotation, const Vec3& translation)
      : rotation_(rotation), translation_(translation) {}

  static Pose identity() { return {}; }
  static Pose from_translation(const Vec3& t) { return {Mat3::Identity(), t}; }
  static Pose from_matrix(const Mat4& m) {
    return {m.topLeftCorner<3, 3>(), m.topRightCorner<3, 1>()};
  }

  const Mat3& rotation() const { return rotation_; }
  const Vec3& translation() const { return translation_; }

  Mat4 matrix() const {
    Mat4 m = Mat4::Identity();
    m.topLeftCorner<3, 3>() = rotation_;
    m.topRightCorner<3, 1>() = translation_;
    return m;
  }

  Vec3 operator*(const Vec3& p) const { return rotation_ * p + translation_; }

 private:
  Mat3 rotation_;
  Vec3 translation_;
};

// Tangent increment: axis-angle rotation (rad) and translation (m).
struct Twist {
  Vec3 rotation = Vec3::Zero();
  Vec3 translation = Vec3::Zero();

  static Twist from_vector(const Vec6& x) {
    return {x.head<3>(), x.tail<3>()};
  }
  Vec6 vector() const {
    Vec6 x;
    x << rotation, translation;
    return x;
  }
};

// Intrinsic Z-Y-X decomposition, degrees.
struct EulerAngles {
  double yaw = 0.0;
  double pitch = 0.0;
  double roll = 0.0;
  // Set when |pitch| is within 1e-6 degrees of 90; yaw/roll are then split
  // arbitrarily (roll is reported as 0).
  bool gimbal_lock = false;
};

// Applies b first, then a.
Pose compose(const Pose& a, const Pose& b);
inline Pose operator*(const Pose& a, const Pose& b) { return compose(a, b); }

Pose inverse(const Pose& a);

inline Vec3 transform_point(const Pose& a, const Vec3& p) { return a * p; }

Mat3 hat(const Vec3& w);

Mat3 exp_rotation(const Vec3& w);
Pose exp_twist(const Twist& x);

EulerAngles rotation_to_euler(const Mat3& r);
Mat3 euler_to_rotation(const EulerAngles& e);

Mat3 rot_x(double radians);
Mat3 rot_y(double radians);
Mat3 rot_z(double radians);

// Closest rotation in the Frobenius sense (polar factor with det +1).
Mat3 orthonormalize(const Mat3& r);

// Angle of the rotation, radians in [0, pi].
double rotation_angle(const Mat3& r);

constexpr double kPi = 3.14159265358979323846;
constexpr double deg2rad(double d) { return d * kPi / 180.0; }
constexpr double rad2deg(double r) { return r * 180.0 / kPi; }

}  // namespace lodom
