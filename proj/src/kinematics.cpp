#include "rcal/kinematics.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "rcal/errors.hpp"

namespace rcal {

namespace {

PoseSE3 dh_transform(const JointSpec& spec, double theta) {
  const double ct = std::cos(theta);
  const double st = std::sin(theta);
  const double ca = std::cos(spec.dh_alpha);
  const double sa = std::sin(spec.dh_alpha);
  PoseSE3 t;
  t.rotation << ct, -st * ca, st * sa,  //
      st, ct * ca, -ct * sa,            //
      0.0, sa, ca;
  t.translation << spec.dh_a * ct, spec.dh_a * st, spec.dh_d;
  return t;
}

}  // namespace

KinematicChain::KinematicChain(std::vector<JointSpec> links)
    : links_(std::move(links)) {
  if (links_.empty()) {
    throw ParameterError("chain must have at least one link");
  }
  for (std::size_t i = 0; i < links_.size(); ++i) {
    const JointSpec& l = links_[i];
    if (!(l.limit_lo <= l.limit_hi)) {
      throw ParameterError("link " + std::to_string(i) +
                           ": joint limits inverted");
    }
    if (!std::isfinite(l.dh_a) || !std::isfinite(l.dh_d) ||
        !std::isfinite(l.dh_alpha) || !std::isfinite(l.theta_offset)) {
      throw ParameterError("link " + std::to_string(i) +
                           ": non-finite DH parameter");
    }
    if (l.type == JointType::kRevolute) {
      ++revolute_count_;
    }
  }
}

KeypointLayout::KeypointLayout(std::vector<KeypointEntry> entries)
    : entries_(std::move(entries)) {
  std::sort(entries_.begin(), entries_.end(),
            [](const KeypointEntry& a, const KeypointEntry& b) {
              return a.keypoint_id < b.keypoint_id;
            });
  for (std::size_t i = 0; i < entries_.size(); ++i) {
    if (entries_[i].keypoint_id != static_cast<int>(i)) {
      throw LayoutError("keypoint ids must be unique and contiguous from 0");
    }
    if (!entries_[i].offset.allFinite()) {
      throw LayoutError("keypoint " + std::to_string(i) +
                        ": non-finite offset");
    }
  }
  std::map<int, int> per_link;
  for (const KeypointEntry& e : entries_) {
    ++per_link[e.link_index];
  }
  for (const auto& [link, count] : per_link) {
    if (count < kMinKeypointsPerLink) {
      throw LayoutError("link " + std::to_string(link) + " carries " +
                        std::to_string(count) + " keypoints; at least " +
                        std::to_string(kMinKeypointsPerLink) + " required");
    }
  }
}

std::vector<std::string> KeypointLayout::parts() const {
  std::set<std::string> s;
  for (const KeypointEntry& e : entries_) {
    s.insert(e.part_label);
  }
  return {s.begin(), s.end()};
}

std::vector<int> KeypointLayout::part_keypoints(
    const std::string& part_label) const {
  std::vector<int> ids;
  for (const KeypointEntry& e : entries_) {
    if (e.part_label == part_label) {
      ids.push_back(e.keypoint_id);
    }
  }
  return ids;
}

const KeypointEntry& KeypointLayout::entry(int keypoint_id) const {
  if (keypoint_id < 0 || keypoint_id >= size()) {
    throw LayoutError("unknown keypoint id " + std::to_string(keypoint_id));
  }
  return entries_[static_cast<std::size_t>(keypoint_id)];
}

void KeypointLayout::validate_against(const KinematicChain& chain) const {
  for (const KeypointEntry& e : entries_) {
    if (e.link_index < 0 || e.link_index > chain.link_count()) {
      throw LayoutError("keypoint " + std::to_string(e.keypoint_id) +
                        ": link_index " + std::to_string(e.link_index) +
                        " out of range for chain with " +
                        std::to_string(chain.link_count()) + " links");
    }
  }
}

std::vector<PoseSE3> forward_kinematics(const KinematicChain& chain,
                                        const JointState& q) {
  if (static_cast<int>(q.angles.size()) != chain.revolute_count()) {
    throw DimensionError(
        "joint state has " + std::to_string(q.angles.size()) +
        " angles; chain expects " + std::to_string(chain.revolute_count()));
  }
  std::vector<PoseSE3> frames;
  frames.reserve(chain.links().size() + 1);
  frames.push_back(PoseSE3::identity());
  std::size_t qi = 0;
  for (const JointSpec& link : chain.links()) {
    double theta = link.theta_offset;
    if (link.type == JointType::kRevolute) {
      theta += q.angles[qi++];
    }
    frames.push_back(frames.back().compose(dh_transform(link, theta)));
  }
  return frames;
}

std::map<int, Eigen::Vector3d> keypoints_3d(const KinematicChain& chain,
                                            const KeypointLayout& layout,
                                            const JointState& q) {
  layout.validate_against(chain);
  const std::vector<PoseSE3> frames = forward_kinematics(chain, q);
  std::map<int, Eigen::Vector3d> points;
  for (const KeypointEntry& e : layout.entries()) {
    points[e.keypoint_id] =
        frames[static_cast<std::size_t>(e.link_index)].apply(e.offset);
  }
  return points;
}

std::vector<int> joint_limit_violations(const KinematicChain& chain,
                                        const JointState& q) {
  std::vector<int> violations;
  std::size_t qi = 0;
  for (const JointSpec& link : chain.links()) {
    if (link.type != JointType::kRevolute) {
      continue;
    }
    if (qi >= q.angles.size()) {
      break;
    }
    const double angle = q.angles[qi];
    if (angle < link.limit_lo || angle > link.limit_hi) {
      violations.push_back(static_cast<int>(qi));
    }
    ++qi;
  }
  return violations;
}

}  // namespace rcal
