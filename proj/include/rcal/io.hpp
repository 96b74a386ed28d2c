#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "rcal/pipeline.hpp"
#include "rcal/synth.hpp"
#include "rcal/visibility.hpp"

namespace rcal {

// Malformed inputs throw ParseError; corrupt data files throw DataError.
// All formats are JSON except heatmaps, which are flat binary: an 8-byte
// header (width then height, little-endian uint32) followed by
// width*height little-endian float32 values in row-major order.

struct RobotSpec {
  KinematicChain chain;
  KeypointLayout layout;
};

RobotSpec load_robot_spec(const std::filesystem::path& path);
void save_robot_spec(const std::filesystem::path& path, const RobotSpec& spec);

CameraIntrinsics load_intrinsics(const std::filesystem::path& path);
void save_intrinsics(const std::filesystem::path& path,
                     const CameraIntrinsics& K);

void save_heatmap(const std::filesystem::path& path, const Heatmap& hm);
Heatmap load_heatmap(const std::filesystem::path& path);

PoseSE3 load_pose(const std::filesystem::path& path);
void save_pose(const std::filesystem::path& path, const PoseSE3& pose,
               std::optional<double> rms_px = std::nullopt);

ScenarioSpec load_scenario(const std::filesystem::path& path);
void save_scenario(const std::filesystem::path& path,
                   const ScenarioSpec& scenario);

// CLI-level scenario file: generation spec plus the robot/intrinsics inputs.
struct ScenarioFile {
  ScenarioSpec spec;
  std::filesystem::path robot_spec_path;
  std::filesystem::path intrinsics_path;
};

// Referenced paths are resolved relative to the scenario file and must
// exist; missing files fail at parse time.
ScenarioFile load_scenario_file(const std::filesystem::path& path);

Eigen::VectorXd load_embedding(const std::filesystem::path& path);
void save_embedding(const std::filesystem::path& path,
                    const Eigen::VectorXd& v);

// Adapter checkpoints store B, A, scale, rank and the hash of the frozen
// W0 they were trained against; loading verifies the hash.
void save_adapter(const std::filesystem::path& path,
                  const LoRAAdapter& adapter);
LoRAAdapter load_adapter(const std::filesystem::path& path,
                         const Eigen::MatrixXd& w0);

void save_embedding_dataset(const std::filesystem::path& path,
                            const EmbeddingDataset& dataset);
EmbeddingDataset load_embedding_dataset(const std::filesystem::path& path);

EmbeddingSetSpec load_embedding_set_spec(const std::filesystem::path& path);

// Manifest metadata without the (potentially large) per-frame payload.
struct EpisodeHeader {
  CameraIntrinsics intrinsics;
  double sigma = 6.0;
  std::filesystem::path robot_spec_path;
  std::optional<PoseSE3> ground_truth_pose;
  int n_frames = 0;
};

EpisodeHeader load_episode_header(const std::filesystem::path& manifest_path);

// Writes manifest.json, robot.json (byte copy of the source robot spec),
// scenario.json, ground_truth.json and one heatmap directory per frame.
void write_episode(const std::filesystem::path& dir, const SynthEpisode& ep,
                   const std::filesystem::path& robot_spec_source);

struct LoadedEpisode {
  Episode episode;
  RobotSpec robot;
  std::filesystem::path robot_spec_path;
};

LoadedEpisode load_episode(const std::filesystem::path& manifest_path);

EpisodeGroundTruth load_ground_truth(const std::filesystem::path& path);

}  // namespace rcal
