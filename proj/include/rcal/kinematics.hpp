#pragma once

#include <Eigen/Core>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "rcal/geometry.hpp"

namespace rcal {

// Canonical part labels used by the bundled robot spec; layouts may add
// arbitrary extra parts.
inline constexpr const char* kPartBase = "base";
inline constexpr const char* kPartEndEffector = "end_effector";

enum class JointType { kRevolute, kFixed };

// One row of a standard (distal) Denavit-Hartenberg table:
//   T(theta) = RotZ(theta) * TransZ(d) * TransX(a) * RotX(alpha)
// with theta = q + theta_offset for revolute links and theta = theta_offset
// for fixed links. Lengths in meters, angles in radians.
struct JointSpec {
  double dh_a = 0.0;
  double dh_d = 0.0;
  double dh_alpha = 0.0;
  double theta_offset = 0.0;
  JointType type = JointType::kRevolute;
  double limit_lo = -3.14159265358979323846;
  double limit_hi = 3.14159265358979323846;
};

class KinematicChain {
 public:
  // Throws ParameterError on an empty chain or inverted limits.
  explicit KinematicChain(std::vector<JointSpec> links);

  const std::vector<JointSpec>& links() const { return links_; }
  int link_count() const { return static_cast<int>(links_.size()); }
  int revolute_count() const { return revolute_count_; }

 private:
  std::vector<JointSpec> links_;
  int revolute_count_ = 0;
};

// A keypoint rigidly attached to a link frame. link_index 0 is the base
// frame itself; link_index i >= 1 is the frame after link i of the chain.
struct KeypointEntry {
  int keypoint_id = 0;
  int link_index = 0;
  Eigen::Vector3d offset = Eigen::Vector3d::Zero();
  std::string part_label;
};

class KeypointLayout {
 public:
  // Validates: ids unique and contiguous from 0, and every link carrying
  // keypoints has at least kMinKeypointsPerLink of them. Throws LayoutError.
  explicit KeypointLayout(std::vector<KeypointEntry> entries);

  static constexpr int kMinKeypointsPerLink = 4;

  const std::vector<KeypointEntry>& entries() const { return entries_; }
  int size() const { return static_cast<int>(entries_.size()); }

  // Part labels present in the layout, sorted and deduplicated.
  std::vector<std::string> parts() const;

  // Keypoint ids belonging to one part, ascending.
  std::vector<int> part_keypoints(const std::string& part_label) const;

  const KeypointEntry& entry(int keypoint_id) const;

  // Checks every link_index against the chain. Throws LayoutError.
  void validate_against(const KinematicChain& chain) const;

 private:
  std::vector<KeypointEntry> entries_;  // sorted by keypoint_id
};

struct JointState {
  std::vector<double> angles;  // one per revolute joint, chain order
  std::optional<double> timestamp;
};

// Link frames in the base frame. Returns link_count()+1 poses: index 0 is
// the base frame (identity) and index i is the cumulative transform through
// link i. Throws DimensionError if q does not match the revolute count.
std::vector<PoseSE3> forward_kinematics(const KinematicChain& chain,
                                        const JointState& q);

// Base-frame positions of all layout keypoints at configuration q.
// Throws LayoutError if the layout does not fit the chain.
std::map<int, Eigen::Vector3d> keypoints_3d(const KinematicChain& chain,
                                            const KeypointLayout& layout,
                                            const JointState& q);

// Indices of revolute joints whose angle lies outside its limits. Limit
// violations are reported, not rejected: recorded joint logs drift.
std::vector<int> joint_limit_violations(const KinematicChain& chain,
                                        const JointState& q);

}  // namespace rcal
