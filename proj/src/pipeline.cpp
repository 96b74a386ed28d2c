#include "rcal/pipeline.hpp"

#include <algorithm>
#include <cmath>

#include "rcal/errors.hpp"

namespace rcal {

namespace {

constexpr double kPi = 3.14159265358979323846;

DecodedKeypoint from_detection(const Detection& d) {
  DecodedKeypoint k;
  k.u = d.point2d.x();
  k.v = d.point2d.y();
  k.peak_u = static_cast<int>(std::lround(d.point2d.x()));
  k.peak_v = static_cast<int>(std::lround(d.point2d.y()));
  k.peak_activation = d.confidence;
  k.valid = true;
  return k;
}

struct PooledSelection {
  std::vector<FrameDetections> frames;
  std::vector<FrameDiagnostics> diagnostics;
  int total = 0;
};

PooledSelection select_all(const std::vector<FrameObservation>& frames,
                           const KeypointLayout& layout,
                           const PartDetector& detector,
                           const EstimateOptions& options) {
  PooledSelection pooled;
  for (const FrameObservation& frame : frames) {
    const DetectionContext ctx{frame.q, frame.frame_index, frame.embedding};
    const VisibilityReport report = detector.detect(ctx);
    const std::vector<SelectedKeypoint> selected = select_keypoints(
        frame, report, layout, options.selection, options.decode);

    FrameDetections fd;
    fd.q = frame.q;
    fd.detections.reserve(selected.size());
    for (const SelectedKeypoint& s : selected) {
      fd.detections.push_back(
          {s.keypoint_id, {s.decoded.u, s.decoded.v}, s.decoded.peak_activation});
    }
    pooled.total += static_cast<int>(selected.size());
    pooled.frames.push_back(std::move(fd));
    pooled.diagnostics.push_back(
        {frame.frame_index, static_cast<int>(selected.size()), report});
  }
  return pooled;
}

EstimateResult run_pooled(PooledSelection pooled, const KinematicChain& chain,
                          const KeypointLayout& layout,
                          const CameraIntrinsics& K,
                          const EstimateOptions& options) {
  EstimateResult result;
  result.diagnostics = std::move(pooled.diagnostics);
  if (pooled.total < options.selection.min_correspondences) {
    result.failure = FailureKind::kInsufficientCorrespondences;
    result.message = "selected " + std::to_string(pooled.total) +
                     " keypoints; need at least " +
                     std::to_string(options.selection.min_correspondences);
    return result;
  }
  BatchConfig batch;
  batch.weighting = options.selection.weighting;
  batch.pnp = options.pnp;
  try {
    const BatchResult solved =
        batch_solve(pooled.frames, chain, layout, K, batch);
    result.ok = true;
    result.estimate = PoseEstimate{solved.pose, solved.rms_reprojection,
                                   solved.correspondence_count};
    result.per_frame_rms = solved.per_frame_rms;
  } catch (const InsufficientCorrespondencesError& e) {
    result.failure = FailureKind::kInsufficientCorrespondences;
    result.message = e.what();
  } catch (const DegenerateConfigurationError& e) {
    result.failure = FailureKind::kDegenerateConfiguration;
    result.message = e.what();
  } catch (const NonConvergenceError& e) {
    result.failure = FailureKind::kNonConvergence;
    result.message = e.what();
  } catch (const Error& e) {
    result.failure = FailureKind::kInvalidInput;
    result.message = e.what();
  }
  return result;
}

}  // namespace

double default_activation_threshold(double sigma) {
  return 0.5 / (2.0 * kPi * sigma * sigma);
}

VisibilityReport OraclePartDetector::detect(const DetectionContext& ctx) const {
  return oracle_visibility(chain_, layout_, ctx.q, gt_pose_, intrinsics_,
                           margin_px_);
}

VisibilityReport LoRAPartDetector::detect(const DetectionContext& ctx) const {
  if (!ctx.embedding.has_value()) {
    throw DataError("frame " + std::to_string(ctx.frame_index) +
                    " carries no embedding for the learned part detector");
  }
  const Eigen::VectorXd h = lora_forward(adapter_, *ctx.embedding);
  VisibilityReport report;
  for (const auto& [part, pair] : bank_) {
    const double p = classify_part(h, pair);
    report[part] = {p > kVisibilityThreshold, p};
  }
  return report;
}

VisibilityReport AllVisibleDetector::detect(const DetectionContext&) const {
  VisibilityReport report;
  for (const std::string& part : parts_) {
    report[part] = {true, 1.0};
  }
  return report;
}

std::vector<SelectedKeypoint> select_keypoints(const FrameObservation& frame,
                                               const VisibilityReport& report,
                                               const KeypointLayout& layout,
                                               const SelectionConfig& cfg,
                                               const DecodeOptions& decode) {
  const auto part_visible = [&](int keypoint_id) {
    if (!cfg.use_visibility_gate) {
      return true;
    }
    const auto it = report.find(layout.entry(keypoint_id).part_label);
    return it != report.end() && it->second.visible;
  };

  std::vector<SelectedKeypoint> selected;
  if (!frame.detections.empty()) {
    for (const Detection& d : frame.detections) {
      if (!part_visible(d.keypoint_id) ||
          d.confidence < cfg.activation_threshold) {
        continue;
      }
      selected.push_back({d.keypoint_id, from_detection(d)});
    }
  } else {
    for (const auto& [keypoint_id, hm] : frame.heatmaps) {
      if (!part_visible(keypoint_id)) {
        continue;
      }
      DecodedKeypoint decoded;
      try {
        std::optional<Heatmap> modulated;
        const Heatmap* input = &hm;
        if (decode.modulate) {
          modulated = modulate(hm, HeatmapModel{decode.sigma});
          input = &*modulated;
        }
        decoded = decode.decoder == DecoderKind::kDark
                      ? decode_dark(*input, decode.config)
                      : decode_argmax(*input);
      } catch (const DecodeError&) {
        continue;  // blank heatmap; the keypoint is simply absent
      }
      if (!decoded.valid || decoded.peak_activation < cfg.activation_threshold) {
        continue;
      }
      selected.push_back({keypoint_id, decoded});
    }
  }

  std::sort(selected.begin(), selected.end(),
            [](const SelectedKeypoint& a, const SelectedKeypoint& b) {
              if (a.decoded.peak_activation != b.decoded.peak_activation) {
                return a.decoded.peak_activation > b.decoded.peak_activation;
              }
              return a.keypoint_id < b.keypoint_id;
            });
  return selected;
}

const char* failure_kind_name(FailureKind kind) {
  switch (kind) {
    case FailureKind::kNone:
      return "none";
    case FailureKind::kInsufficientCorrespondences:
      return "insufficient_correspondences";
    case FailureKind::kDegenerateConfiguration:
      return "degenerate_configuration";
    case FailureKind::kNonConvergence:
      return "non_convergence";
    case FailureKind::kInvalidInput:
      return "invalid_input";
  }
  return "unknown";
}

EstimateResult estimate_frame(const FrameObservation& frame,
                              const KinematicChain& chain,
                              const KeypointLayout& layout,
                              const CameraIntrinsics& K,
                              const PartDetector& detector,
                              const EstimateOptions& options) {
  return run_pooled(select_all({frame}, layout, detector, options), chain,
                    layout, K, options);
}

EstimateResult estimate_episode(const std::vector<FrameObservation>& frames,
                                const KinematicChain& chain,
                                const KeypointLayout& layout,
                                const CameraIntrinsics& K,
                                const PartDetector& detector,
                                const EstimateOptions& options) {
  return run_pooled(select_all(frames, layout, detector, options), chain,
                    layout, K, options);
}

}  // namespace rcal
