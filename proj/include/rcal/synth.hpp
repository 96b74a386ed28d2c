#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "rcal/pipeline.hpp"
#include "rcal/visibility.hpp"

namespace rcal {

enum class ScenarioKind { kRobotInView, kRobotInAndOut };

// Full recipe for one synthetic episode; everything downstream of the seed
// is deterministic.
struct ScenarioSpec {
  ScenarioKind kind = ScenarioKind::kRobotInView;
  int n_frames = 30;
  double pixel_noise_sigma = 0.0;  // px, Gaussian on the keypoint centers
  double heatmap_noise = 0.0;      // uniform noise amplitude, fraction of peak
  double dropout_prob = 0.0;       // per-keypoint chance of a blank heatmap
  std::uint64_t seed = 0;
  double sigma = 6.0;              // heatmap bump width
  double visibility_margin_px = 8.0;
  double min_distance = 0.8;  // camera distance range, meters
  double max_distance = 2.5;
  int max_retries = 1000;

  void validate() const;  // throws ParameterError
};

struct EpisodeGroundTruth {
  PoseSE3 pose;  // camera-from-base
  // Noise-free projections per frame; keypoints behind the camera or
  // off-frame are absent.
  std::vector<std::map<int, Eigen::Vector2d>> true_pixels;
};

struct SynthEpisode {
  Episode episode;
  EpisodeGroundTruth ground_truth;
  ScenarioSpec scenario;
};

// Samples an episode-constant camera pose and a smooth in-limits joint
// trajectory, then renders noisy Gaussian heatmaps of every projected
// keypoint. Off-frame keypoints get blank heatmaps. robot_in_view keeps all
// parts visible in every frame; robot_in_and_out makes the end-effector
// cross the frame border at least once. Throws GenerationError when no
// camera pose satisfies the scenario within max_retries draws.
SynthEpisode generate_episode(const KinematicChain& chain,
                              const KeypointLayout& layout,
                              const CameraIntrinsics& K,
                              const ScenarioSpec& scenario);

// Synthetic few-shot classification data: per part, visible and hidden
// feature clusters, a frozen random backbone map, and a prompt pair.
struct EmbeddingSetSpec {
  int feature_dim = 32;   // adapter input k
  int embed_dim = 16;     // adapter output d
  int n_train_per_class = 64;
  int n_test_per_class = 100;
  double cluster_separation = 4.0;  // distance between class means, in
                                    // units of within-class stddev
  double temperature = 0.07;
  std::uint64_t seed = 0;
  std::vector<std::string> parts = {kPartBase, kPartEndEffector};
};

struct EmbeddingDataset {
  Eigen::MatrixXd backbone_w0;  // d x k
  PromptPairBank prompts;
  std::vector<EmbeddingSample> train;
  std::vector<EmbeddingSample> test;
  int feature_dim = 0;
  int embed_dim = 0;
};

EmbeddingDataset generate_embedding_dataset(const EmbeddingSetSpec& spec);

}  // namespace rcal
