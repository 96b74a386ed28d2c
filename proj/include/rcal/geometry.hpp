#pragma once

#include <Eigen/Core>

namespace rcal {

// Rigid transform in SE(3): p_out = rotation * p_in + translation.
struct PoseSE3 {
  Eigen::Matrix3d rotation = Eigen::Matrix3d::Identity();
  Eigen::Vector3d translation = Eigen::Vector3d::Zero();

  static PoseSE3 identity() { return {}; }

  Eigen::Vector3d apply(const Eigen::Vector3d& p) const {
    return rotation * p + translation;
  }

  // this ∘ other: applies `other` first, then `this`.
  PoseSE3 compose(const PoseSE3& other) const {
    return {rotation * other.rotation,
            rotation * other.translation + translation};
  }

  PoseSE3 inverse() const {
    Eigen::Matrix3d rt = rotation.transpose();
    return {rt, -(rt * translation)};
  }

  Eigen::Matrix4d matrix() const {
    Eigen::Matrix4d m = Eigen::Matrix4d::Identity();
    m.block<3, 3>(0, 0) = rotation;
    m.block<3, 1>(0, 3) = translation;
    return m;
  }
};

// [w]_x such that skew(w) * v == w.cross(v).
Eigen::Matrix3d skew(const Eigen::Vector3d& w);

// Rodrigues' formula; exact rotation for any axis-angle vector.
Eigen::Matrix3d so3_exp(const Eigen::Vector3d& w);

// Geodesic angle between two rotations, in radians.
double rotation_geodesic(const Eigen::Matrix3d& a, const Eigen::Matrix3d& b);

// Nearest rotation matrix (Frobenius) with det +1, via SVD.
Eigen::Matrix3d closest_rotation(const Eigen::Matrix3d& m);

// max |R^T R - I|, used by rigidity checks.
double orthonormality_error(const Eigen::Matrix3d& r);

}  // namespace rcal
