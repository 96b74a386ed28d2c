#pragma once

#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "rcal/heatmap.hpp"
#include "rcal/pnp.hpp"
#include "rcal/visibility.hpp"

namespace rcal {

// Everything observed for one frame: joint state plus either raw heatmaps or
// already-decoded detections, and optionally an image embedding for the
// learned part detector.
struct FrameObservation {
  JointState q;
  std::map<int, Heatmap> heatmaps;      // keypoint_id -> heatmap
  std::vector<Detection> detections;    // alternative to heatmaps
  std::optional<Eigen::VectorXd> embedding;
  int frame_index = 0;
};

struct Episode {
  CameraIntrinsics intrinsics;
  double sigma = 6.0;  // heatmap model used when the episode was produced
  std::vector<FrameObservation> frames;
  std::optional<PoseSE3> ground_truth_pose;
};

struct SelectionConfig {
  double activation_threshold = 0.0;
  int min_correspondences = 4;
  bool use_visibility_gate = true;
  WeightingMode weighting = WeightingMode::kNone;
};

// Half the ideal Gaussian peak for the given sigma.
double default_activation_threshold(double sigma);

struct DetectionContext {
  const JointState& q;
  int frame_index = 0;
  const std::optional<Eigen::VectorXd>& embedding;
};

// Decides which robot parts are visible in a frame.
class PartDetector {
 public:
  virtual ~PartDetector() = default;
  virtual VisibilityReport detect(const DetectionContext& ctx) const = 0;
};

// Geometric ground-truth detector for synthetic episodes.
class OraclePartDetector : public PartDetector {
 public:
  OraclePartDetector(const KinematicChain& chain, const KeypointLayout& layout,
                     const CameraIntrinsics& K, const PoseSE3& gt_pose,
                     double margin_px)
      : chain_(chain), layout_(layout), intrinsics_(K), gt_pose_(gt_pose),
        margin_px_(margin_px) {}

  VisibilityReport detect(const DetectionContext& ctx) const override;

 private:
  KinematicChain chain_;
  KeypointLayout layout_;
  CameraIntrinsics intrinsics_;
  PoseSE3 gt_pose_;
  double margin_px_;
};

// Learned detector: runs the LoRA-adapted classifier on the frame embedding
// against each part's prompt pair. Frames must carry an embedding.
class LoRAPartDetector : public PartDetector {
 public:
  LoRAPartDetector(LoRAAdapter adapter, PromptPairBank bank)
      : adapter_(std::move(adapter)), bank_(std::move(bank)) {}

  VisibilityReport detect(const DetectionContext& ctx) const override;

 private:
  LoRAAdapter adapter_;
  PromptPairBank bank_;
};

// Reports every layout part visible; stands in when no gating is wanted.
class AllVisibleDetector : public PartDetector {
 public:
  explicit AllVisibleDetector(std::vector<std::string> parts)
      : parts_(std::move(parts)) {}

  VisibilityReport detect(const DetectionContext&) const override;

 private:
  std::vector<std::string> parts_;
};

enum class DecoderKind { kDark, kArgmax };

struct DecodeOptions {
  DecodeConfig config;
  DecoderKind decoder = DecoderKind::kDark;
  bool modulate = false;
  double sigma = 6.0;  // for modulation
};

struct SelectedKeypoint {
  int keypoint_id = 0;
  DecodedKeypoint decoded;
};

// Keeps keypoints whose part is visible (when gating is on), whose decode is
// valid, and whose peak activation clears the threshold. Precomputed
// detections pass through the same gate with confidence as activation.
// Result is ordered by descending activation (keypoint id breaks ties).
std::vector<SelectedKeypoint> select_keypoints(const FrameObservation& frame,
                                               const VisibilityReport& report,
                                               const KeypointLayout& layout,
                                               const SelectionConfig& cfg,
                                               const DecodeOptions& decode);

enum class FailureKind {
  kNone,
  kInsufficientCorrespondences,
  kDegenerateConfiguration,
  kNonConvergence,
  kInvalidInput,
};

const char* failure_kind_name(FailureKind kind);

struct PoseEstimate {
  PoseSE3 pose;
  double rms_px = 0.0;
  int n_correspondences = 0;
};

struct FrameDiagnostics {
  int frame_index = 0;
  int n_selected = 0;
  VisibilityReport visibility;
};

// Structured outcome: estimation failures are reported, never thrown.
struct EstimateResult {
  bool ok = false;
  FailureKind failure = FailureKind::kNone;
  std::string message;
  std::optional<PoseEstimate> estimate;
  std::vector<FrameDiagnostics> diagnostics;
  std::vector<double> per_frame_rms;
};

struct EstimateOptions {
  SelectionConfig selection;
  DecodeOptions decode;
  PnPConfig pnp;
};

// detect -> select -> FK -> PnP for a single frame.
EstimateResult estimate_frame(const FrameObservation& frame,
                              const KinematicChain& chain,
                              const KeypointLayout& layout,
                              const CameraIntrinsics& K,
                              const PartDetector& detector,
                              const EstimateOptions& options);

// Per-frame selection pooled into one batch solve over the episode.
EstimateResult estimate_episode(const std::vector<FrameObservation>& frames,
                                const KinematicChain& chain,
                                const KeypointLayout& layout,
                                const CameraIntrinsics& K,
                                const PartDetector& detector,
                                const EstimateOptions& options);

}  // namespace rcal
