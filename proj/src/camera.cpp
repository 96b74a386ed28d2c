#include "rcal/camera.hpp"

#include <cmath>

#include "rcal/errors.hpp"

namespace rcal {

void CameraIntrinsics::validate() const {
  if (!(fx > 0.0) || !(fy > 0.0)) {
    throw ParameterError("intrinsics: focal lengths must be positive");
  }
  if (width <= 0 || height <= 0) {
    throw ParameterError("intrinsics: image dimensions must be positive");
  }
  if (cx < 0.0 || cx > width - 1 || cy < 0.0 || cy > height - 1) {
    throw ParameterError("intrinsics: principal point outside the image");
  }
}

Eigen::Vector2d project(const CameraIntrinsics& K, const PoseSE3& pose,
                        const Eigen::Vector3d& p_base) {
  const Eigen::Vector3d pc = pose.apply(p_base);
  if (pc.z() <= kMinDepth) {
    throw BehindCameraError("project: point at or behind the camera plane");
  }
  return {K.fx * pc.x() / pc.z() + K.cx, K.fy * pc.y() / pc.z() + K.cy};
}

}  // namespace rcal
