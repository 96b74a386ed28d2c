#pragma once

#include <Eigen/Core>

#include "rcal/geometry.hpp"

namespace rcal {

// Pinhole camera, no distortion. Pixel coordinates: u along columns (x),
// v along rows (y), origin at the top-left pixel center.
struct CameraIntrinsics {
  double fx = 0.0;
  double fy = 0.0;
  double cx = 0.0;
  double cy = 0.0;
  int width = 0;
  int height = 0;

  // Throws ParameterError if focal lengths are non-positive or the
  // principal point lies outside the image.
  void validate() const;
};

inline constexpr double kMinDepth = 1e-9;

// Projects a base-frame point through `pose` (camera-from-base) onto the
// image plane. Throws BehindCameraError if the camera-frame depth <= kMinDepth.
Eigen::Vector2d project(const CameraIntrinsics& K, const PoseSE3& pose,
                        const Eigen::Vector3d& p_base);

}  // namespace rcal
