#pragma once

#include <Eigen/Core>
#include <optional>
#include <vector>

#include "rcal/camera.hpp"
#include "rcal/errors.hpp"
#include "rcal/geometry.hpp"
#include "rcal/kinematics.hpp"

namespace rcal {

// One 2D-3D association. point3d is in the robot base frame, point2d in
// pixels. weight scales the residual; zero-weight entries are ignored.
struct Correspondence {
  int keypoint_id = 0;
  Eigen::Vector3d point3d = Eigen::Vector3d::Zero();
  Eigen::Vector2d point2d = Eigen::Vector2d::Zero();
  double weight = 1.0;
};

struct PnPConfig {
  int max_iterations = 100;
  double step_tolerance = 1e-10;
  double initial_lambda = 1e-3;  // x10 on reject, /10 on accept
};

struct PnPResult {
  PoseSE3 pose;
  double rms_reprojection = 0.0;  // weighted per-point RMS, pixels
  int inlier_count = 0;           // correspondences with positive weight
  int iterations = 0;
};

// The solver failed to make progress; carries the last iterate so callers
// can inspect how far it got.
struct NonConvergenceError : Error {
  NonConvergenceError(const std::string& msg, const PoseSE3& pose)
      : Error(msg), last_iterate(pose) {}
  PoseSE3 last_iterate;
};

// Weighted residual vector (2n) and, when `jacobian` is non-null, its
// analytic Jacobian (2n x 6) on the left-increment chart
// [omega, dt]: pose' = (exp(omega), dt) ∘ pose. Residual rows are
// sqrt(w) * (projected - observed), u then v per correspondence.
void reprojection_residuals(const std::vector<Correspondence>& corrs,
                            const CameraIntrinsics& K, const PoseSE3& pose,
                            Eigen::VectorXd* residuals,
                            Eigen::MatrixXd* jacobian = nullptr);

// Camera-from-base pose from 2D-3D correspondences. Levenberg-Marquardt on
// the 6-parameter chart above, initialized from `init` when given, else
// from a direct linear estimate (12-parameter DLT for well-spread point
// sets, homography decomposition for near-coplanar ones).
//
// Throws InsufficientCorrespondencesError (< 4 usable points),
// DegenerateConfigurationError (collinear points), NonConvergenceError.
PnPResult solve_pnp(const std::vector<Correspondence>& corrs,
                    const CameraIntrinsics& K,
                    const std::optional<PoseSE3>& init = std::nullopt,
                    const PnPConfig& config = {});

// A 2D keypoint measurement with detector confidence.
struct Detection {
  int keypoint_id = 0;
  Eigen::Vector2d point2d = Eigen::Vector2d::Zero();
  double confidence = 1.0;
};

struct FrameDetections {
  JointState q;
  std::vector<Detection> detections;
};

enum class WeightingMode { kNone, kConfidence };

struct BatchConfig {
  WeightingMode weighting = WeightingMode::kNone;
  std::optional<PoseSE3> init;
  PnPConfig pnp;
};

struct BatchResult {
  PoseSE3 pose;
  double rms_reprojection = 0.0;
  std::vector<double> per_frame_rms;  // at the pooled pose; NaN if frame empty
  int correspondence_count = 0;
};

// Pools every frame's detections into a single solve. 3D points come from
// forward kinematics at each frame's joint state; the camera and robot base
// are assumed fixed across the episode. Correspondences are sorted by
// (frame, keypoint_id) so the result is independent of caller ordering.
BatchResult batch_solve(const std::vector<FrameDetections>& frames,
                        const KinematicChain& chain,
                        const KeypointLayout& layout,
                        const CameraIntrinsics& K,
                        const BatchConfig& config = {});

}  // namespace rcal
