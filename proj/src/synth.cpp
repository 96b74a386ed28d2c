#include "rcal/synth.hpp"

#include <algorithm>
#include <cmath>

#include "rcal/errors.hpp"
#include "rcal/rng.hpp"

namespace rcal {

namespace {

constexpr double kPi = 3.14159265358979323846;

struct SineJoint {
  double mid;
  double amplitude;
  double phase;
  double cycles;
};

std::vector<JointState> sample_trajectory(const KinematicChain& chain,
                                          const ScenarioSpec& scenario,
                                          SeededRng& rng) {
  const bool wide = scenario.kind == ScenarioKind::kRobotInAndOut;
  const double amp_lo = wide ? 0.20 : 0.03;
  const double amp_hi = wide ? 0.60 : 0.15;
  std::vector<SineJoint> joints;
  for (const JointSpec& link : chain.links()) {
    if (link.type != JointType::kRevolute) {
      continue;
    }
    SineJoint j;
    j.mid = (link.limit_lo + link.limit_hi) / 2.0;
    j.amplitude =
        (link.limit_hi - link.limit_lo) / 2.0 * rng.uniform(amp_lo, amp_hi);
    j.phase = rng.uniform(0.0, 2.0 * kPi);
    j.cycles = rng.uniform(0.5, 2.0);
    joints.push_back(j);
  }
  std::vector<JointState> trajectory;
  trajectory.reserve(static_cast<std::size_t>(scenario.n_frames));
  for (int f = 0; f < scenario.n_frames; ++f) {
    JointState q;
    q.timestamp = f / 30.0;
    const double s = static_cast<double>(f) /
                     std::max(scenario.n_frames - 1, 1);
    for (const SineJoint& j : joints) {
      q.angles.push_back(j.mid + j.amplitude *
                                     std::sin(2.0 * kPi * j.cycles * s +
                                              j.phase));
    }
    trajectory.push_back(std::move(q));
  }
  return trajectory;
}

PoseSE3 sample_camera(const Eigen::Vector3d& workspace_center,
                      const ScenarioSpec& scenario, SeededRng& rng) {
  const double az = rng.uniform(0.0, 2.0 * kPi);
  const double el = rng.uniform(0.1, 0.9);
  const double dist = rng.uniform(scenario.min_distance, scenario.max_distance);
  Eigen::Vector3d target = workspace_center;
  for (int i = 0; i < 3; ++i) {
    target(i) += rng.uniform(-0.10, 0.10);
  }
  const Eigen::Vector3d dir(std::cos(el) * std::cos(az),
                            std::cos(el) * std::sin(az), std::sin(el));
  const Eigen::Vector3d eye = target + dist * dir;
  const double roll = rng.uniform(-0.3, 0.3);

  // Look-at with z forward, y down in the image (world up is +z).
  const Eigen::Vector3d forward = (target - eye).normalized();
  Eigen::Vector3d x_cam = forward.cross(Eigen::Vector3d::UnitZ());
  if (x_cam.norm() < 1e-9) {
    x_cam = Eigen::Vector3d::UnitX();  // near-vertical view
  }
  x_cam.normalize();
  const Eigen::Vector3d y_cam = forward.cross(x_cam).normalized();

  PoseSE3 pose;
  pose.rotation.row(0) = x_cam.transpose();
  pose.rotation.row(1) = y_cam.transpose();
  pose.rotation.row(2) = forward.transpose();
  pose.rotation = so3_exp(roll * Eigen::Vector3d::UnitZ()) * pose.rotation;
  pose.translation = -(pose.rotation * eye);
  return pose;
}

bool scenario_satisfied(const std::vector<VisibilityReport>& reports,
                        const KeypointLayout& layout,
                        const ScenarioSpec& scenario) {
  const std::vector<std::string> parts = layout.parts();
  if (scenario.kind == ScenarioKind::kRobotInView) {
    for (const VisibilityReport& report : reports) {
      for (const std::string& part : parts) {
        if (!report.at(part).visible) {
          return false;
        }
      }
    }
    return true;
  }

  // robot_in_and_out: the end-effector (or last part) crosses the frame
  // border while every other part stays visible throughout.
  std::string moving = parts.back();
  if (std::find(parts.begin(), parts.end(), kPartEndEffector) != parts.end()) {
    moving = kPartEndEffector;
  }
  bool seen_in = false;
  bool seen_out = false;
  for (const VisibilityReport& report : reports) {
    for (const std::string& part : parts) {
      if (part == moving) {
        (report.at(part).visible ? seen_in : seen_out) = true;
      } else if (!report.at(part).visible) {
        return false;
      }
    }
  }
  return seen_in && seen_out;
}

}  // namespace

void ScenarioSpec::validate() const {
  if (n_frames < 1) {
    throw ParameterError("scenario needs at least one frame");
  }
  if (dropout_prob < 0.0 || dropout_prob > 1.0) {
    throw ParameterError("dropout_prob must lie in [0, 1]");
  }
  if (pixel_noise_sigma < 0.0 || heatmap_noise < 0.0) {
    throw ParameterError("noise magnitudes must be non-negative");
  }
  if (!(sigma > 0.0)) {
    throw ParameterError("heatmap sigma must be positive");
  }
  if (!(min_distance > 0.0) || !(max_distance >= min_distance)) {
    throw ParameterError("camera distance range invalid");
  }
  if (max_retries < 1) {
    throw ParameterError("max_retries must be positive");
  }
}

SynthEpisode generate_episode(const KinematicChain& chain,
                              const KeypointLayout& layout,
                              const CameraIntrinsics& K,
                              const ScenarioSpec& scenario) {
  scenario.validate();
  K.validate();
  layout.validate_against(chain);
  SeededRng rng(scenario.seed);

  const std::vector<JointState> trajectory =
      sample_trajectory(chain, scenario, rng);
  std::vector<std::map<int, Eigen::Vector3d>> points_per_frame;
  points_per_frame.reserve(trajectory.size());
  Eigen::Vector3d workspace_center = Eigen::Vector3d::Zero();
  std::size_t n_points = 0;
  for (const JointState& q : trajectory) {
    points_per_frame.push_back(keypoints_3d(chain, layout, q));
    for (const auto& [id, p] : points_per_frame.back()) {
      workspace_center += p;
      ++n_points;
    }
  }
  workspace_center /= static_cast<double>(n_points);

  PoseSE3 camera;
  bool found = false;
  for (int attempt = 0; attempt < scenario.max_retries; ++attempt) {
    camera = sample_camera(workspace_center, scenario, rng);
    std::vector<VisibilityReport> reports;
    reports.reserve(trajectory.size());
    for (const JointState& q : trajectory) {
      reports.push_back(oracle_visibility(chain, layout, q, camera, K,
                                          scenario.visibility_margin_px));
    }
    if (scenario_satisfied(reports, layout, scenario)) {
      found = true;
      break;
    }
  }
  if (!found) {
    throw GenerationError(
        "no camera pose satisfies the requested visibility pattern after " +
        std::to_string(scenario.max_retries) + " draws");
  }

  SynthEpisode out;
  out.scenario = scenario;
  out.ground_truth.pose = camera;
  out.episode.intrinsics = K;
  out.episode.sigma = scenario.sigma;
  out.episode.ground_truth_pose = camera;

  const HeatmapModel model{scenario.sigma};
  const double ideal_peak = 1.0 / (2.0 * kPi * scenario.sigma * scenario.sigma);
  for (int f = 0; f < scenario.n_frames; ++f) {
    FrameObservation frame;
    frame.frame_index = f;
    frame.q = trajectory[static_cast<std::size_t>(f)];
    std::map<int, Eigen::Vector2d> truth;
    for (const auto& [id, p] :
         points_per_frame[static_cast<std::size_t>(f)]) {
      const Eigen::Vector3d pc = camera.apply(p);
      Heatmap hm(K.width, K.height);
      if (pc.z() > kMinDepth) {
        const Eigen::Vector2d px(K.fx * pc.x() / pc.z() + K.cx,
                                 K.fy * pc.y() / pc.z() + K.cy);
        truth[id] = px;
        const bool in_frame = px.x() >= 0.0 && px.x() <= K.width - 1 &&
                              px.y() >= 0.0 && px.y() <= K.height - 1;
        const bool dropped =
            scenario.dropout_prob > 0.0 && rng.uniform() < scenario.dropout_prob;
        if (in_frame && !dropped) {
          double cu = px.x();
          double cv = px.y();
          if (scenario.pixel_noise_sigma > 0.0) {
            cu += rng.gaussian(0.0, scenario.pixel_noise_sigma);
            cv += rng.gaussian(0.0, scenario.pixel_noise_sigma);
          }
          hm = encode_gaussian(cu, cv, model, K.width, K.height);
          if (scenario.heatmap_noise > 0.0) {
            for (double& v : hm.values()) {
              v += rng.uniform(0.0, scenario.heatmap_noise * ideal_peak);
            }
          }
        }
      }
      frame.heatmaps.emplace(id, std::move(hm));
    }
    out.ground_truth.true_pixels.push_back(std::move(truth));
    out.episode.frames.push_back(std::move(frame));
  }
  return out;
}

EmbeddingDataset generate_embedding_dataset(const EmbeddingSetSpec& spec) {
  if (spec.feature_dim < 2 || spec.embed_dim < 2) {
    throw ParameterError("embedding dimensions must be at least 2");
  }
  if (spec.n_train_per_class < 1 || spec.n_test_per_class < 1) {
    throw ParameterError("need at least one sample per class");
  }
  if (spec.parts.empty()) {
    throw ParameterError("need at least one part");
  }
  SeededRng rng(spec.seed);

  EmbeddingDataset ds;
  ds.feature_dim = spec.feature_dim;
  ds.embed_dim = spec.embed_dim;
  ds.backbone_w0 = Eigen::MatrixXd(spec.embed_dim, spec.feature_dim);
  const double w0_std = 0.3 / std::sqrt(static_cast<double>(spec.feature_dim));
  for (Eigen::Index r = 0; r < ds.backbone_w0.rows(); ++r) {
    for (Eigen::Index c = 0; c < ds.backbone_w0.cols(); ++c) {
      ds.backbone_w0(r, c) = rng.gaussian(0.0, w0_std);
    }
  }

  const auto random_unit = [&rng](int dim) {
    Eigen::VectorXd v(dim);
    do {
      for (int i = 0; i < dim; ++i) {
        v(i) = rng.gaussian();
      }
    } while (v.norm() < 1e-9);
    return Eigen::VectorXd(v / v.norm());
  };

  for (const std::string& part : spec.parts) {
    const Eigen::VectorXd axis = random_unit(spec.feature_dim);
    const Eigen::VectorXd center_visible =
        (spec.cluster_separation / 2.0) * axis;

    PromptPair pair;
    pair.positive = random_unit(spec.embed_dim);
    pair.negative = random_unit(spec.embed_dim);
    pair.temperature = spec.temperature;
    ds.prompts[part] = pair;

    const auto draw = [&](int count, bool visible,
                          std::vector<EmbeddingSample>& sink) {
      for (int i = 0; i < count; ++i) {
        EmbeddingSample s;
        s.part_label = part;
        s.visible = visible;
        s.features = visible ? center_visible : Eigen::VectorXd(-center_visible);
        for (int d = 0; d < spec.feature_dim; ++d) {
          s.features(d) += rng.gaussian();
        }
        sink.push_back(std::move(s));
      }
    };
    draw(spec.n_train_per_class, true, ds.train);
    draw(spec.n_train_per_class, false, ds.train);
    draw(spec.n_test_per_class, true, ds.test);
    draw(spec.n_test_per_class, false, ds.test);
  }
  return ds;
}

}  // namespace rcal
