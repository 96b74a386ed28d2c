#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "rcal/camera.hpp"
#include "rcal/kinematics.hpp"

namespace rcal {

// Low-rank adapted linear map: h = W0 x + scale * B (A x). W0 stays frozen;
// training touches only B and A.
struct LoRAAdapter {
  Eigen::MatrixXd W0;  // d x k, frozen
  Eigen::MatrixXd B;   // d x r
  Eigen::MatrixXd A;   // r x k
  double scale = 1.0;

  int input_dim() const { return static_cast<int>(W0.cols()); }
  int output_dim() const { return static_cast<int>(W0.rows()); }
  int rank() const { return static_cast<int>(B.cols()); }

  // r >= 1, r < min(d, k), consistent shapes. Throws ParameterError.
  void validate() const;
};

// Fresh adapter starting exactly at the frozen map: A ~ N(0, 1/r), B = 0.
LoRAAdapter make_lora_adapter(const Eigen::MatrixXd& w0, int rank, double scale,
                              std::uint64_t seed);

Eigen::VectorXd lora_forward(const LoRAAdapter& adapter,
                             const Eigen::VectorXd& x);

// Positive/negative prompt embeddings for one robot part, in the adapter's
// output space.
struct PromptPair {
  Eigen::VectorXd positive;
  Eigen::VectorXd negative;
  double temperature = 0.07;
};

using PromptPairBank = std::map<std::string, PromptPair>;

// Probability that the embedding matches the positive prompt:
// softmax over (cos(h, pos)/T, cos(h, neg)/T). Throws ParameterError on a
// zero-norm vector.
double classify_part(const Eigen::VectorXd& embedding, const PromptPair& pair);

struct PartVisibility {
  bool visible = false;
  double probability = 0.0;
};

using VisibilityReport = std::map<std::string, PartVisibility>;

inline constexpr double kVisibilityThreshold = 0.5;

// A labeled raw feature vector (adapter input space).
struct EmbeddingSample {
  Eigen::VectorXd features;
  std::string part_label;
  bool visible = false;
};

struct TrainConfig {
  int epochs = 200;
  double learning_rate = 0.05;
  std::uint64_t seed = 0;
  bool train_prompts = false;  // prompt embeddings stay fixed by default
};

struct TrainResult {
  LoRAAdapter adapter;
  PromptPairBank bank;
  std::vector<double> loss_curve;  // mean BCE per epoch, after the update
};

// Full-batch gradient descent on binary cross-entropy of
// classify_part(lora_forward(x), bank[part]). Only B and A move (and the
// prompt embeddings when train_prompts is set). Requires at least one
// visible and one hidden sample per part present in `samples`; throws
// TrainingError otherwise. Deterministic for a fixed input.
TrainResult train_few_shot(const LoRAAdapter& adapter,
                           const PromptPairBank& bank,
                           const std::vector<EmbeddingSample>& samples,
                           const TrainConfig& config);

// Ground-truth visibility for synthetic scenes: a part is visible iff at
// least KeypointLayout::kMinKeypointsPerLink of its keypoints project with
// positive depth inside the image rectangle shrunk by margin_px.
VisibilityReport oracle_visibility(const KinematicChain& chain,
                                   const KeypointLayout& layout,
                                   const JointState& q, const PoseSE3& pose,
                                   const CameraIntrinsics& K,
                                   double margin_px);

}  // namespace rcal
