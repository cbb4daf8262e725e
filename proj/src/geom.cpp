#include "lodom/geom.hpp"

#include <Eigen/SVD>
#include <algorithm>
#include <cmath>

namespace lodom {

namespace {

constexpr double kDriftTolerance = 1e-9;

bool has_drift(const Mat3& r) {
  return ((r.transpose() * r - Mat3::Identity()).cwiseAbs().maxCoeff() >
          kDriftTolerance);
}

}  // namespace

Mat3 orthonormalize(const Mat3& r) {
  Eigen::JacobiSVD<Mat3> svd(r, Eigen::ComputeFullU | Eigen::ComputeFullV);
  Mat3 u = svd.matrixU();
  const Mat3& v = svd.matrixV();
  if ((u * v.transpose()).determinant() < 0.0) u.col(2) *= -1.0;
  return u * v.transpose();
}

Pose compose(const Pose& a, const Pose& b) {
  Mat3 r = a.rotation() * b.rotation();
  if (has_drift(r)) r = orthonormalize(r);
  return {r, a.rotation() * b.translation() + a.translation()};
}

Pose inverse(const Pose& a) {
  Mat3 rt = a.rotation().transpose();
  return {rt, -(rt * a.translation())};
}

Mat3 hat(const Vec3& w) {
  Mat3 s;
  // clang-format off
  s <<    0.0, -w.z(),  w.y(),
        w.z(),    0.0, -w.x(),
       -w.y(),  w.x(),    0.0;
  // clang-format on
  return s;
}

Mat3 exp_rotation(const Vec3& w) {
  const double theta2 = w.squaredNorm();
  const Mat3 k = hat(w);
  double a, b;
  if (theta2 < 1e-12) {
    a = 1.0 - theta2 / 6.0;
    b = 0.5 - theta2 / 24.0;
  } else {
    const double theta = std::sqrt(theta2);
    a = std::sin(theta) / theta;
    b = (1.0 - std::cos(theta)) / theta2;
  }
  return Mat3::Identity() + a * k + b * k * k;
}

Pose exp_twist(const Twist& x) {
  const Vec3& w = x.rotation;
  const double theta2 = w.squaredNorm();
  const Mat3 k = hat(w);
  double a, b, c;
  if (theta2 < 1e-12) {
    a = 1.0 - theta2 / 6.0;
    b = 0.5 - theta2 / 24.0;
    c = 1.0 / 6.0 - theta2 / 120.0;
  } else {
    const double theta = std::sqrt(theta2);
    a = std::sin(theta) / theta;
    b = (1.0 - std::cos(theta)) / theta2;
    c = (theta - std::sin(theta)) / (theta2 * theta);
  }
  const Mat3 k2 = k * k;
  const Mat3 r = Mat3::Identity() + a * k + b * k2;
  const Mat3 v = Mat3::Identity() + b * k + c * k2;
  return {r, v * x.translation};
}

Mat3 rot_x(double radians) {
  return Eigen::AngleAxisd(radians, Vec3::UnitX()).toRotationMatrix();
}
Mat3 rot_y(double radians) {
  return Eigen::AngleAxisd(radians, Vec3::UnitY()).toRotationMatrix();
}
Mat3 rot_z(double radians) {
  return Eigen::AngleAxisd(radians, Vec3::UnitZ()).toRotationMatrix();
}

EulerAngles rotation_to_euler(const Mat3& r) {
  EulerAngles e;
  const double sp = std::clamp(-r(2, 0), -1.0, 1.0);
  const double pitch = std::asin(sp);
  e.pitch = rad2deg(pitch);
  if (90.0 - std::abs(e.pitch) < 1e-6) {
    e.gimbal_lock = true;
    // R = Rz(yaw - sign*roll) composition; fold everything into yaw.
    e.yaw = rad2deg(std::atan2(-r(0, 1), r(1, 1)));
    e.roll = 0.0;
    return e;
  }
  e.yaw = rad2deg(std::atan2(r(1, 0), r(0, 0)));
  e.roll = rad2deg(std::atan2(r(2, 1), r(2, 2)));
  return e;
}

Mat3 euler_to_rotation(const EulerAngles& e) {
  return rot_z(deg2rad(e.yaw)) * rot_y(deg2rad(e.pitch)) *
         rot_x(deg2rad(e.roll));
}

double rotation_angle(const Mat3& r) {
  const double c = std::clamp((r.trace() - 1.0) * 0.5, -1.0, 1.0);
  return std::acos(c);
}

}  // namespace lodom
