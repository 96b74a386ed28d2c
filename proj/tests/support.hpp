#pragma once

#include <cstdlib>
#include <filesystem>
#include <string>
#include <vector>

#include "rcal/geometry.hpp"
#include "rcal/kinematics.hpp"
#include "rcal/rng.hpp"

namespace testsupport {

inline std::filesystem::path data_dir() {
  if (const char* env = std::getenv("RCAL_DATA")) {
    return env;
  }
  return std::filesystem::path(__FILE__).parent_path().parent_path() / "data";
}

inline std::filesystem::path rcal_bin() {
  if (const char* env = std::getenv("RCAL_BIN")) {
    return env;
  }
  return {};
}

inline std::filesystem::path make_temp_dir(const std::string& tag) {
  static int counter = 0;
  const auto dir = std::filesystem::temp_directory_path() /
                   ("rcal_test_" + tag + "_" + std::to_string(::getpid()) +
                    "_" + std::to_string(counter++));
  std::filesystem::create_directories(dir);
  return dir;
}

// Random proper rotation via a random axis-angle vector.
inline Eigen::Matrix3d random_rotation(rcal::SeededRng& rng) {
  Eigen::Vector3d axis(rng.gaussian(), rng.gaussian(), rng.gaussian());
  if (axis.norm() < 1e-9) {
    axis = Eigen::Vector3d::UnitX();
  }
  axis.normalize();
  return rcal::so3_exp(rng.uniform(0.0, 3.0) * axis);
}

// Pose that keeps any point with |p|_inf <= 0.4 well in front of the camera.
inline rcal::PoseSE3 random_front_pose(rcal::SeededRng& rng) {
  rcal::PoseSE3 pose;
  pose.rotation = random_rotation(rng);
  pose.translation = {rng.uniform(-0.3, 0.3), rng.uniform(-0.3, 0.3),
                      rng.uniform(1.5, 3.0)};
  return pose;
}

inline Eigen::Vector3d random_box_point(rcal::SeededRng& rng,
                                        double half = 0.4) {
  return {rng.uniform(-half, half), rng.uniform(-half, half),
          rng.uniform(-half, half)};
}

// Two-link rig with 6 non-coplanar keypoints per link; small stand-in for a
// real arm in solver and gating tests.
inline rcal::KinematicChain two_link_chain() {
  std::vector<rcal::JointSpec> links(2);
  links[0].dh_a = 0.35;
  links[0].dh_d = 0.2;
  links[0].dh_alpha = -1.5707963267948966;
  links[1].dh_a = 0.3;
  links[1].dh_d = 0.0;
  links[1].dh_alpha = 0.0;
  return rcal::KinematicChain(links);
}

inline rcal::KeypointLayout two_link_layout() {
  std::vector<rcal::KeypointEntry> entries;
  const double offs[6][3] = {{0.06, 0.04, 0.01},  {-0.06, 0.04, 0.05},
                             {-0.06, -0.05, 0.1}, {0.06, -0.05, 0.14},
                             {0.0, 0.07, 0.12},   {0.02, 0.0, 0.18}};
  int id = 0;
  for (int link = 0; link <= 2; link += 2) {
    for (const auto& o : offs) {
      rcal::KeypointEntry e;
      e.keypoint_id = id++;
      e.link_index = link;
      e.offset = {o[0], o[1], o[2]};
      e.part_label = link == 0 ? rcal::kPartBase : rcal::kPartEndEffector;
      entries.push_back(e);
    }
  }
  return rcal::KeypointLayout(entries);
}

}  // namespace testsupport
