#include "rcal/pnp.hpp"

#include <Eigen/Cholesky>
#include <Eigen/SVD>
#include <algorithm>
#include <cmath>
#include <limits>

namespace rcal {

namespace {

// Depth guard inside the optimizer: keeps trial costs finite when a step
// momentarily pushes a point to the camera plane.
constexpr double kDepthGuard = 1e-6;

Eigen::Vector2d normalized_pixel(const CameraIntrinsics& K,
                                 const Eigen::Vector2d& px) {
  return {(px.x() - K.cx) / K.fx, (px.y() - K.cy) / K.fy};
}

int count_positive_depth(const std::vector<Correspondence>& corrs,
                         const PoseSE3& pose) {
  int n = 0;
  for (const Correspondence& c : corrs) {
    if (pose.apply(c.point3d).z() > 0.0) {
      ++n;
    }
  }
  return n;
}

// 12-parameter DLT on normalized coordinates; needs >= 6 well-spread points.
PoseSE3 dlt_initialize(const std::vector<Correspondence>& corrs,
                       const CameraIntrinsics& K) {
  const int n = static_cast<int>(corrs.size());
  Eigen::MatrixXd a = Eigen::MatrixXd::Zero(2 * n, 12);
  for (int i = 0; i < n; ++i) {
    const Eigen::Vector3d& p = corrs[static_cast<std::size_t>(i)].point3d;
    const Eigen::Vector2d xn =
        normalized_pixel(K, corrs[static_cast<std::size_t>(i)].point2d);
    const Eigen::Vector4d ph(p.x(), p.y(), p.z(), 1.0);
    a.block<1, 4>(2 * i, 0) = ph.transpose();
    a.block<1, 4>(2 * i, 8) = -xn.x() * ph.transpose();
    a.block<1, 4>(2 * i + 1, 4) = ph.transpose();
    a.block<1, 4>(2 * i + 1, 8) = -xn.y() * ph.transpose();
  }
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(a, Eigen::ComputeThinV);
  Eigen::VectorXd h = svd.matrixV().col(11);
  Eigen::Matrix<double, 3, 4> p;
  p.row(0) = h.segment<4>(0).transpose();
  p.row(1) = h.segment<4>(4).transpose();
  p.row(2) = h.segment<4>(8).transpose();
  Eigen::Matrix3d m = p.block<3, 3>(0, 0);
  if (m.determinant() < 0.0) {
    p = -p;
    m = -m;
  }
  Eigen::JacobiSVD<Eigen::Matrix3d> msvd(m);
  const double scale = msvd.singularValues().mean();
  PoseSE3 pose;
  pose.rotation = closest_rotation(m);
  pose.translation = p.col(3) / scale;
  return pose;
}

// Homography-based initialization for (near-)coplanar point sets. Also the
// fallback for point sets too small for the 12-parameter DLT; the plane fit
// is approximate then and LM does the rest.
PoseSE3 homography_initialize(const std::vector<Correspondence>& corrs,
                              const CameraIntrinsics& K,
                              const Eigen::Vector3d& centroid,
                              const Eigen::Matrix3d& axes) {
  const int n = static_cast<int>(corrs.size());
  const Eigen::Vector3d e1 = axes.col(0);
  const Eigen::Vector3d e2 = axes.col(1);

  Eigen::MatrixXd a = Eigen::MatrixXd::Zero(2 * n, 9);
  for (int i = 0; i < n; ++i) {
    const Eigen::Vector3d d =
        corrs[static_cast<std::size_t>(i)].point3d - centroid;
    const Eigen::Vector3d q(e1.dot(d), e2.dot(d), 1.0);
    const Eigen::Vector2d xn =
        normalized_pixel(K, corrs[static_cast<std::size_t>(i)].point2d);
    a.block<1, 3>(2 * i, 0) = q.transpose();
    a.block<1, 3>(2 * i, 6) = -xn.x() * q.transpose();
    a.block<1, 3>(2 * i + 1, 3) = q.transpose();
    a.block<1, 3>(2 * i + 1, 6) = -xn.y() * q.transpose();
  }
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(a, Eigen::ComputeThinV);
  const Eigen::VectorXd hv = svd.matrixV().col(8);
  Eigen::Matrix3d hmat;
  hmat << hv(0), hv(1), hv(2), hv(3), hv(4), hv(5), hv(6), hv(7), hv(8);

  const double lambda =
      2.0 / (hmat.col(0).norm() + hmat.col(1).norm() + 1e-300);

  // Camera-from-plane candidates differ by the homography's sign.
  PoseSE3 best;
  int best_front = -1;
  for (const double s : {lambda, -lambda}) {
    const Eigen::Vector3d r1 = s * hmat.col(0);
    const Eigen::Vector3d r2 = s * hmat.col(1);
    Eigen::Matrix3d r;
    r.col(0) = r1;
    r.col(1) = r2;
    r.col(2) = r1.cross(r2);
    PoseSE3 cam_from_plane;
    cam_from_plane.rotation = closest_rotation(r);
    cam_from_plane.translation = s * hmat.col(2);

    // plane-from-base: X_plane = axes^T (X - centroid)
    PoseSE3 plane_from_base;
    plane_from_base.rotation = axes.transpose();
    plane_from_base.translation = -(axes.transpose() * centroid);
    const PoseSE3 candidate = cam_from_plane.compose(plane_from_base);

    const int front = count_positive_depth(corrs, candidate);
    if (front > best_front) {
      best_front = front;
      best = candidate;
    }
  }
  return best;
}

// Picks an initialization strategy from the spread of the 3D points.
PoseSE3 initialize_pose(const std::vector<Correspondence>& corrs,
                        const CameraIntrinsics& K) {
  const int n = static_cast<int>(corrs.size());
  Eigen::Vector3d centroid = Eigen::Vector3d::Zero();
  for (const Correspondence& c : corrs) {
    centroid += c.point3d;
  }
  centroid /= n;
  Eigen::MatrixXd centered(3, n);
  for (int i = 0; i < n; ++i) {
    centered.col(i) = corrs[static_cast<std::size_t>(i)].point3d - centroid;
  }
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(centered, Eigen::ComputeFullU);
  const Eigen::Vector3d sv = svd.singularValues();
  if (!(sv(1) > 1e-9 * std::max(sv(0), 1e-12)) || sv(0) <= 0.0) {
    throw DegenerateConfigurationError(
        "3D points are collinear; pose is not observable");
  }
  Eigen::Matrix3d axes = svd.matrixU();
  if (axes.determinant() < 0.0) {
    axes.col(2) *= -1.0;
  }
  const bool coplanar = sv(2) < 1e-6 * sv(0);
  if (n >= 6 && !coplanar) {
    return dlt_initialize(corrs, K);
  }
  return homography_initialize(corrs, K, centroid, axes);
}

double cost_of(const Eigen::VectorXd& r) { return r.squaredNorm(); }

PoseSE3 apply_increment(const Eigen::Matrix<double, 6, 1>& delta,
                        const PoseSE3& pose) {
  const Eigen::Matrix3d dr = so3_exp(delta.head<3>());
  PoseSE3 out;
  out.rotation = dr * pose.rotation;
  out.translation = dr * pose.translation + delta.tail<3>();
  return out;
}

}  // namespace

void reprojection_residuals(const std::vector<Correspondence>& corrs,
                            const CameraIntrinsics& K, const PoseSE3& pose,
                            Eigen::VectorXd* residuals,
                            Eigen::MatrixXd* jacobian) {
  const int n = static_cast<int>(corrs.size());
  residuals->resize(2 * n);
  if (jacobian != nullptr) {
    jacobian->resize(2 * n, 6);
  }
  for (int i = 0; i < n; ++i) {
    const Correspondence& c = corrs[static_cast<std::size_t>(i)];
    const double sw = std::sqrt(c.weight);
    const Eigen::Vector3d pc = pose.apply(c.point3d);
    const double z = std::max(pc.z(), kDepthGuard);
    const double u = K.fx * pc.x() / z + K.cx;
    const double v = K.fy * pc.y() / z + K.cy;
    (*residuals)(2 * i) = sw * (u - c.point2d.x());
    (*residuals)(2 * i + 1) = sw * (v - c.point2d.y());
    if (jacobian != nullptr) {
      Eigen::Matrix<double, 2, 3> dproj;
      dproj << K.fx / z, 0.0, -K.fx * pc.x() / (z * z),  //
          0.0, K.fy / z, -K.fy * pc.y() / (z * z);
      Eigen::Matrix<double, 3, 6> dpc;
      dpc.block<3, 3>(0, 0) = -skew(pc);
      dpc.block<3, 3>(0, 3) = Eigen::Matrix3d::Identity();
      jacobian->block<2, 6>(2 * i, 0) = sw * dproj * dpc;
    }
  }
}

PnPResult solve_pnp(const std::vector<Correspondence>& corrs,
                    const CameraIntrinsics& K,
                    const std::optional<PoseSE3>& init,
                    const PnPConfig& config) {
  K.validate();
  std::vector<Correspondence> used;
  used.reserve(corrs.size());
  double total_weight = 0.0;
  for (const Correspondence& c : corrs) {
    if (c.weight < 0.0) {
      throw ParameterError("correspondence weight must be non-negative");
    }
    if (!c.point2d.allFinite() || !c.point3d.allFinite()) {
      throw ParameterError("correspondence holds non-finite coordinates");
    }
    if (c.weight > 0.0) {
      used.push_back(c);
      total_weight += c.weight;
    }
  }
  if (static_cast<int>(used.size()) < 4 || total_weight <= 0.0) {
    throw InsufficientCorrespondencesError(
        "need at least 4 correspondences with positive weight, have " +
        std::to_string(used.size()));
  }

  PoseSE3 pose = init.has_value() ? *init : initialize_pose(used, K);

  Eigen::VectorXd r;
  Eigen::MatrixXd j;
  reprojection_residuals(used, K, pose, &r, &j);
  double cost = cost_of(r);
  if (!std::isfinite(cost)) {
    throw NonConvergenceError("non-finite cost at initialization", pose);
  }

  double lambda = config.initial_lambda;
  int iterations = 0;
  for (; iterations < config.max_iterations; ++iterations) {
    const Eigen::Matrix<double, 6, 1> g = j.transpose() * r;
    const Eigen::Matrix<double, 6, 6> h = j.transpose() * j;
    Eigen::Matrix<double, 6, 6> damped = h;
    for (int d = 0; d < 6; ++d) {
      damped(d, d) += lambda * std::max(h(d, d), 1e-12);
    }
    const Eigen::Matrix<double, 6, 1> delta = damped.ldlt().solve(-g);
    if (!delta.allFinite()) {
      throw NonConvergenceError("singular normal equations", pose);
    }
    const PoseSE3 trial = apply_increment(delta, pose);
    Eigen::VectorXd trial_r;
    reprojection_residuals(used, K, trial, &trial_r, nullptr);
    const double trial_cost = cost_of(trial_r);
    if (std::isfinite(trial_cost) && trial_cost < cost) {
      pose = trial;
      cost = trial_cost;
      lambda = std::max(lambda / 10.0, 1e-12);
      reprojection_residuals(used, K, pose, &r, &j);
      if (delta.norm() < config.step_tolerance) {
        break;
      }
    } else {
      lambda *= 10.0;
      if (lambda > 1e14) {
        break;  // stalled at a stationary point within numerics
      }
    }
  }
  if (!std::isfinite(cost)) {
    throw NonConvergenceError("optimizer diverged", pose);
  }

  PnPResult result;
  result.pose = pose;
  result.rms_reprojection = std::sqrt(cost / total_weight);
  result.inlier_count = static_cast<int>(used.size());
  result.iterations = iterations;
  return result;
}

BatchResult batch_solve(const std::vector<FrameDetections>& frames,
                        const KinematicChain& chain,
                        const KeypointLayout& layout,
                        const CameraIntrinsics& K, const BatchConfig& config) {
  std::vector<Correspondence> pooled;
  std::vector<std::pair<int, int>> frame_spans;  // [begin, end) into pooled
  for (const FrameDetections& frame : frames) {
    const std::map<int, Eigen::Vector3d> points =
        keypoints_3d(chain, layout, frame.q);
    std::vector<Detection> sorted = frame.detections;
    std::sort(sorted.begin(), sorted.end(),
              [](const Detection& a, const Detection& b) {
                return a.keypoint_id < b.keypoint_id;
              });
    const int begin = static_cast<int>(pooled.size());
    for (const Detection& d : sorted) {
      const auto it = points.find(d.keypoint_id);
      if (it == points.end()) {
        throw LayoutError("detection references unknown keypoint id " +
                          std::to_string(d.keypoint_id));
      }
      Correspondence c;
      c.keypoint_id = d.keypoint_id;
      c.point3d = it->second;
      c.point2d = d.point2d;
      c.weight = config.weighting == WeightingMode::kConfidence
                     ? d.confidence
                     : 1.0;
      pooled.push_back(c);
    }
    frame_spans.emplace_back(begin, static_cast<int>(pooled.size()));
  }

  const PnPResult solved = solve_pnp(pooled, K, config.init, config.pnp);

  BatchResult result;
  result.pose = solved.pose;
  result.rms_reprojection = solved.rms_reprojection;
  result.correspondence_count = solved.inlier_count;
  result.per_frame_rms.reserve(frame_spans.size());
  for (const auto& [begin, end] : frame_spans) {
    double sum = 0.0;
    double weight = 0.0;
    for (int i = begin; i < end; ++i) {
      const Correspondence& c = pooled[static_cast<std::size_t>(i)];
      if (c.weight <= 0.0) {
        continue;
      }
      Eigen::VectorXd r;
      reprojection_residuals({c}, K, solved.pose, &r, nullptr);
      sum += r.squaredNorm();
      weight += c.weight;
    }
    result.per_frame_rms.push_back(
        weight > 0.0 ? std::sqrt(sum / weight)
                     : std::numeric_limits<double>::quiet_NaN());
  }
  return result;
}

}  // namespace rcal
