#include <CLI11.hpp>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <json.hpp>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "rcal/eval.hpp"
#include "rcal/hash.hpp"
#include "rcal/io.hpp"
#include "rcal/pipeline.hpp"
#include "rcal/rng.hpp"
#include "rcal/synth.hpp"
#include "rcal/visibility.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitInputError = 2;
constexpr int kExitRuntimeError = 3;

json pose_to_json(const rcal::PoseSE3& pose) {
  json rot = json::array();
  for (int r = 0; r < 3; ++r) {
    for (int c = 0; c < 3; ++c) {
      rot.push_back(pose.rotation(r, c));
    }
  }
  return {{"rotation", rot},
          {"translation",
           {pose.translation.x(), pose.translation.y(), pose.translation.z()}}};
}

rcal::PoseSE3 pose_from_json(const json& j) {
  rcal::PoseSE3 pose;
  for (int r = 0; r < 3; ++r) {
    for (int c = 0; c < 3; ++c) {
      pose.rotation(r, c) =
          j.at("rotation").at(static_cast<std::size_t>(3 * r + c));
    }
  }
  for (int i = 0; i < 3; ++i) {
    pose.translation(i) = j.at("translation").at(static_cast<std::size_t>(i));
  }
  return pose;
}

json visibility_to_json(const rcal::VisibilityReport& report) {
  json j = json::object();
  for (const auto& [part, vis] : report) {
    j[part] = {{"visible", vis.visible}, {"probability", vis.probability}};
  }
  return j;
}

void write_json_file(const fs::path& path, const json& j) {
  std::ofstream out(path, std::ios::binary);
  if (!out) {
    throw rcal::DataError("cannot write " + path.string());
  }
  out << j.dump(2) << "\n";
}

void write_text_file(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) {
    throw rcal::DataError("cannot write " + path.string());
  }
  out << text;
}

json read_json_file(const fs::path& path) {
  std::ifstream in(path);
  if (!in) {
    throw rcal::ParseError("cannot open " + path.string());
  }
  try {
    return json::parse(in);
  } catch (const json::exception& e) {
    throw rcal::ParseError(path.string() + ": " + e.what());
  }
}

// ---------------------------------------------------------------- synth ----

struct SynthArgs {
  std::string scenario_path;
  std::string out_dir;
  std::optional<std::uint64_t> seed;
};

int run_synth(const SynthArgs& args) {
  rcal::ScenarioFile file = rcal::load_scenario_file(args.scenario_path);
  if (args.seed.has_value()) {
    file.spec.seed = *args.seed;
  }
  const rcal::RobotSpec robot = rcal::load_robot_spec(file.robot_spec_path);
  const rcal::CameraIntrinsics K = rcal::load_intrinsics(file.intrinsics_path);
  const rcal::SynthEpisode episode =
      rcal::generate_episode(robot.chain, robot.layout, K, file.spec);
  rcal::write_episode(args.out_dir, episode, file.robot_spec_path);
  std::printf("%s\n", (fs::path(args.out_dir) / "manifest.json").c_str());
  std::printf("frames: %d  seed: %llu\n",
              static_cast<int>(episode.episode.frames.size()),
              static_cast<unsigned long long>(file.spec.seed));
  return kExitOk;
}

// ------------------------------------------------------------- estimate ----

struct EstimateArgs {
  std::string episode_path;
  std::string out_dir;
  std::string mode = "batch";
  std::string detector = "auto";  // auto | oracle | lora | none
  std::string adapter_path;
  std::string dataset_path;
  std::string decoder = "dark";
  std::string weighting = "none";
  double threshold = -1.0;  // <0: derive from sigma
  int min_correspondences = 4;
  bool no_gate = false;
  bool use_modulate = false;
  double margin_px = 8.0;
};

json estimate_config_json(const EstimateArgs& args,
                          const rcal::EstimateOptions& options,
                          const std::string& detector) {
  return {{"mode", args.mode},
          {"detector", detector},
          {"activation_threshold", options.selection.activation_threshold},
          {"min_correspondences", options.selection.min_correspondences},
          {"visibility_gate", options.selection.use_visibility_gate},
          {"weighting",
           options.selection.weighting == rcal::WeightingMode::kConfidence
               ? "confidence"
               : "none"},
          {"decoder",
           options.decode.decoder == rcal::DecoderKind::kArgmax ? "argmax"
                                                                : "dark"},
          {"modulate", options.decode.modulate},
          {"margin_px", args.margin_px}};
}

json frame_result_json(const rcal::EstimateResult& result) {
  json j = {{"ok", result.ok},
            {"failure", rcal::failure_kind_name(result.failure)}};
  if (!result.message.empty()) {
    j["message"] = result.message;
  }
  if (result.estimate.has_value()) {
    j["pose"] = pose_to_json(result.estimate->pose);
    j["rms_px"] = result.estimate->rms_px;
    j["n_correspondences"] = result.estimate->n_correspondences;
  }
  return j;
}

int run_estimate(const EstimateArgs& args) {
  const rcal::LoadedEpisode loaded = rcal::load_episode(args.episode_path);
  const rcal::Episode& episode = loaded.episode;
  const rcal::KinematicChain& chain = loaded.robot.chain;
  const rcal::KeypointLayout& layout = loaded.robot.layout;

  std::string detector_name = args.detector;
  if (detector_name == "auto") {
    detector_name =
        episode.ground_truth_pose.has_value() ? "oracle" : "none";
  }
  std::unique_ptr<rcal::PartDetector> detector;
  if (detector_name == "oracle") {
    if (!episode.ground_truth_pose.has_value()) {
      throw rcal::ParseError(
          "oracle detector needs a ground_truth_pose in the manifest");
    }
    detector = std::make_unique<rcal::OraclePartDetector>(
        chain, layout, episode.intrinsics, *episode.ground_truth_pose,
        args.margin_px);
  } else if (detector_name == "lora") {
    if (args.adapter_path.empty() || args.dataset_path.empty()) {
      throw rcal::ParseError(
          "lora detector needs --adapter and --dataset (for W0 and prompts)");
    }
    const rcal::EmbeddingDataset ds =
        rcal::load_embedding_dataset(args.dataset_path);
    rcal::LoRAAdapter adapter =
        rcal::load_adapter(args.adapter_path, ds.backbone_w0);
    detector = std::make_unique<rcal::LoRAPartDetector>(std::move(adapter),
                                                        ds.prompts);
  } else if (detector_name == "none") {
    detector = std::make_unique<rcal::AllVisibleDetector>(layout.parts());
  } else {
    throw rcal::ParseError("unknown detector '" + detector_name + "'");
  }

  rcal::EstimateOptions options;
  options.selection.activation_threshold =
      args.threshold >= 0.0
          ? args.threshold
          : rcal::default_activation_threshold(episode.sigma);
  options.selection.min_correspondences = args.min_correspondences;
  options.selection.use_visibility_gate = !args.no_gate;
  options.selection.weighting = args.weighting == "confidence"
                                    ? rcal::WeightingMode::kConfidence
                                    : rcal::WeightingMode::kNone;
  options.decode.decoder = args.decoder == "argmax" ? rcal::DecoderKind::kArgmax
                                                    : rcal::DecoderKind::kDark;
  options.decode.modulate = args.use_modulate;
  options.decode.sigma = episode.sigma;

  fs::create_directories(args.out_dir);
  const json config = estimate_config_json(args, options, detector_name);

  if (args.mode == "batch") {
    const rcal::EstimateResult result = rcal::estimate_episode(
        episode.frames, chain, layout, episode.intrinsics, *detector, options);
    json j = frame_result_json(result);
    j["schema_version"] = 1;
    j["mode"] = "batch";
    j["config"] = config;
    json diag = json::array();
    for (const rcal::FrameDiagnostics& d : result.diagnostics) {
      diag.push_back({{"frame_index", d.frame_index},
                      {"n_selected", d.n_selected},
                      {"visibility", visibility_to_json(d.visibility)}});
    }
    j["diagnostics"] = std::move(diag);
    j["per_frame_rms"] = result.per_frame_rms;
    write_json_file(fs::path(args.out_dir) / "pose.json", j);
    if (!result.ok) {
      std::fprintf(stderr, "estimation failed: %s (%s)\n",
                   result.message.c_str(),
                   rcal::failure_kind_name(result.failure));
      return kExitRuntimeError;
    }
    std::printf("%s\n", (fs::path(args.out_dir) / "pose.json").c_str());
    return kExitOk;
  }

  if (args.mode != "single") {
    throw rcal::ParseError("mode must be single or batch");
  }
  json frames = json::array();
  int ok_count = 0;
  for (const rcal::FrameObservation& frame : episode.frames) {
    const rcal::EstimateResult result = rcal::estimate_frame(
        frame, chain, layout, episode.intrinsics, *detector, options);
    json fj = frame_result_json(result);
    fj["frame_index"] = frame.frame_index;
    if (!result.diagnostics.empty()) {
      fj["n_selected"] = result.diagnostics.front().n_selected;
      fj["visibility"] =
          visibility_to_json(result.diagnostics.front().visibility);
    }
    frames.push_back(std::move(fj));
    ok_count += result.ok ? 1 : 0;
  }
  const json j = {{"schema_version", 1},
                  {"mode", "single"},
                  {"config", config},
                  {"frames", std::move(frames)}};
  write_json_file(fs::path(args.out_dir) / "poses.json", j);
  if (ok_count == 0) {
    std::fprintf(stderr, "no frame produced a pose\n");
    return kExitRuntimeError;
  }
  std::printf("%s\n", (fs::path(args.out_dir) / "poses.json").c_str());
  return kExitOk;
}

// ----------------------------------------------------------------- eval ----

struct EvalArgs {
  std::string episode_path;
  std::vector<std::string> runs;  // label=path
  std::string out_dir;
  double threshold_max = 0.10;
  double resolution = 0.001;
};

int run_eval(const EvalArgs& args) {
  const rcal::EpisodeHeader header =
      rcal::load_episode_header(args.episode_path);
  if (!header.ground_truth_pose.has_value()) {
    throw rcal::ParseError(
        "episode manifest carries no ground_truth_pose to evaluate against");
  }
  const rcal::RobotSpec robot = rcal::load_robot_spec(header.robot_spec_path);

  rcal::JointState zero;
  zero.angles.assign(static_cast<std::size_t>(robot.chain.revolute_count()),
                     0.0);
  std::vector<Eigen::Vector3d> points;
  for (const auto& [id, p] :
       rcal::keypoints_3d(robot.chain, robot.layout, zero)) {
    points.push_back(p);
  }

  fs::create_directories(args.out_dir);
  std::vector<rcal::AddResult> results;
  for (const std::string& run : args.runs) {
    const std::size_t eq = run.find('=');
    if (eq == std::string::npos) {
      throw rcal::ParseError("--run expects label=path, got '" + run + "'");
    }
    const std::string label = run.substr(0, eq);
    const fs::path path = run.substr(eq + 1);
    const json j = read_json_file(path);
    std::vector<double> errors;
    int n_failed = 0;
    if (j.contains("frames")) {  // single-frame run
      for (const json& fj : j.at("frames")) {
        if (fj.value("ok", false)) {
          errors.push_back(rcal::add_metric(pose_from_json(fj.at("pose")),
                                            *header.ground_truth_pose,
                                            points));
        } else {
          ++n_failed;
        }
      }
    } else {
      if (j.value("ok", false)) {
        errors.push_back(rcal::add_metric(pose_from_json(j.at("pose")),
                                          *header.ground_truth_pose, points));
      } else {
        ++n_failed;
      }
    }
    if (errors.empty()) {
      throw rcal::DataError("run '" + label + "' holds no successful poses");
    }
    rcal::AddResult r = rcal::evaluate_errors(
        label, std::move(errors), args.threshold_max,
        static_cast<int>(points.size()));
    json mj = {{"schema_version", 1}, {"label", r.label},
               {"n", r.errors.size()}, {"n_failed", n_failed},
               {"mean_add_m", r.mean}, {"auc_pct", r.auc_percent},
               {"threshold_max_m", r.threshold_max}, {"errors", r.errors}};
    write_json_file(fs::path(args.out_dir) / ("metrics_" + label + ".json"),
                    mj);
    results.push_back(std::move(r));
  }

  write_text_file(fs::path(args.out_dir) / "comparison.csv",
                  rcal::compare_runs_csv(results));
  write_text_file(fs::path(args.out_dir) / "comparison.txt",
                  rcal::compare_runs_text(results));
  std::printf("%s", rcal::compare_runs_text(results).c_str());
  return kExitOk;
}

// -------------------------------------------------------- train-detector ----

struct TrainArgs {
  std::string dataset_path;
  std::string synth_spec_path;
  std::string out_dir;
  int shots = 32;
  int epochs = 200;
  double learning_rate = 0.05;
  std::uint64_t seed = 0;
  int rank = 2;
  double scale = 1.0;
};

std::vector<rcal::EmbeddingSample> pick_shots(
    const std::vector<rcal::EmbeddingSample>& train, int shots,
    std::uint64_t seed) {
  std::map<std::pair<std::string, bool>, std::vector<std::size_t>> groups;
  for (std::size_t i = 0; i < train.size(); ++i) {
    groups[{train[i].part_label, train[i].visible}].push_back(i);
  }
  rcal::SeededRng rng(seed);
  std::vector<rcal::EmbeddingSample> picked;
  for (auto& [key, indices] : groups) {
    for (std::size_t i = indices.size(); i > 1; --i) {  // Fisher-Yates
      const auto k = static_cast<std::size_t>(
          rng.uniform_int(0, static_cast<int>(i) - 1));
      std::swap(indices[i - 1], indices[k]);
    }
    const std::size_t take =
        std::min(static_cast<std::size_t>(shots), indices.size());
    for (std::size_t i = 0; i < take; ++i) {
      picked.push_back(train[indices[i]]);
    }
  }
  return picked;
}

std::map<std::string, std::pair<int, int>> per_part_accuracy(
    const rcal::LoRAAdapter& adapter, const rcal::PromptPairBank& bank,
    const std::vector<rcal::EmbeddingSample>& samples) {
  std::map<std::string, std::pair<int, int>> counts;  // correct, total
  for (const rcal::EmbeddingSample& s : samples) {
    const Eigen::VectorXd h = rcal::lora_forward(adapter, s.features);
    const double p = rcal::classify_part(h, bank.at(s.part_label));
    const bool predicted = p > rcal::kVisibilityThreshold;
    auto& [correct, total] = counts[s.part_label];
    correct += predicted == s.visible ? 1 : 0;
    total += 1;
  }
  return counts;
}

int run_train(const TrainArgs& args) {
  if (args.dataset_path.empty() == args.synth_spec_path.empty()) {
    throw rcal::ParseError(
        "give exactly one of --dataset or --synth-embeddings");
  }
  fs::create_directories(args.out_dir);

  rcal::EmbeddingDataset dataset;
  if (!args.dataset_path.empty()) {
    dataset = rcal::load_embedding_dataset(args.dataset_path);
  } else {
    const rcal::EmbeddingSetSpec spec =
        rcal::load_embedding_set_spec(args.synth_spec_path);
    dataset = rcal::generate_embedding_dataset(spec);
    rcal::save_embedding_dataset(fs::path(args.out_dir) / "dataset.json",
                                 dataset);
  }

  rcal::LoRAAdapter adapter = rcal::make_lora_adapter(
      dataset.backbone_w0, args.rank, args.scale, args.seed);
  std::vector<double> loss_curve;
  int n_train_used = 0;
  if (args.shots > 0) {
    const std::vector<rcal::EmbeddingSample> picked =
        pick_shots(dataset.train, args.shots, args.seed);
    n_train_used = static_cast<int>(picked.size());
    rcal::TrainConfig config;
    config.epochs = args.epochs;
    config.learning_rate = args.learning_rate;
    config.seed = args.seed;
    rcal::TrainResult trained =
        rcal::train_few_shot(adapter, dataset.prompts, picked, config);
    adapter = std::move(trained.adapter);
    loss_curve = std::move(trained.loss_curve);
  }

  rcal::save_adapter(fs::path(args.out_dir) / "adapter.json", adapter);

  const auto test_counts =
      per_part_accuracy(adapter, dataset.prompts, dataset.test);
  json per_part = json::object();
  int correct = 0;
  int total = 0;
  std::string csv = "shots,part,accuracy\n";
  for (const auto& [part, ct] : test_counts) {
    const double acc = static_cast<double>(ct.first) / ct.second;
    per_part[part] = acc;
    correct += ct.first;
    total += ct.second;
    csv += std::to_string(args.shots) + "," + part + "," +
           std::to_string(acc) + "\n";
  }
  const double overall = static_cast<double>(correct) / total;
  csv += std::to_string(args.shots) + ",overall," + std::to_string(overall) +
         "\n";

  json report = {{"schema_version", 1},
                 {"shots", args.shots},
                 {"epochs", args.epochs},
                 {"learning_rate", args.learning_rate},
                 {"seed", args.seed},
                 {"rank", args.rank},
                 {"scale", args.scale},
                 {"n_train_used", n_train_used},
                 {"n_test", total},
                 {"accuracy", {{"overall", overall}, {"per_part", per_part}}}};
  if (!loss_curve.empty()) {
    report["final_loss"] = loss_curve.back();
    report["loss_curve"] = loss_curve;
  }
  write_json_file(fs::path(args.out_dir) / "report.json", report);
  write_text_file(fs::path(args.out_dir) / "accuracy.csv", csv);
  std::printf("shots=%d held-out accuracy=%.4f\n", args.shots, overall);
  return kExitOk;
}

// --------------------------------------------------------------- report ----

struct ReportArgs {
  std::vector<std::string> metrics;
  std::string out_dir;
  double threshold_max = 0.10;
  double resolution = 0.001;
};

std::string svg_color(std::size_t i) {
  static const char* palette[] = {"#1f77b4", "#ff7f0e", "#2ca02c",
                                  "#d62728", "#9467bd", "#8c564b"};
  return palette[i % 6];
}

std::string curves_svg(const std::vector<rcal::AddResult>& results,
                       double threshold_max, double resolution) {
  const double width = 640.0;
  const double height = 480.0;
  const double ml = 60.0, mr = 20.0, mt = 20.0, mb = 50.0;
  const double pw = width - ml - mr;
  const double ph = height - mt - mb;
  char buf[256];
  std::string svg;
  svg += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"640\" "
         "height=\"480\" viewBox=\"0 0 640 480\">\n";
  svg += "<rect width=\"640\" height=\"480\" fill=\"white\"/>\n";
  // axes
  std::snprintf(buf, sizeof(buf),
                "<line x1=\"%.1f\" y1=\"%.1f\" x2=\"%.1f\" y2=\"%.1f\" "
                "stroke=\"black\"/>\n",
                ml, mt + ph, ml + pw, mt + ph);
  svg += buf;
  std::snprintf(buf, sizeof(buf),
                "<line x1=\"%.1f\" y1=\"%.1f\" x2=\"%.1f\" y2=\"%.1f\" "
                "stroke=\"black\"/>\n",
                ml, mt, ml, mt + ph);
  svg += buf;
  for (int i = 0; i <= 5; ++i) {
    const double fx = ml + pw * i / 5.0;
    const double tau = threshold_max * i / 5.0;
    std::snprintf(buf, sizeof(buf),
                  "<text x=\"%.1f\" y=\"%.1f\" font-size=\"12\" "
                  "text-anchor=\"middle\">%.3f</text>\n",
                  fx, mt + ph + 18.0, tau);
    svg += buf;
    const double fy = mt + ph - ph * i / 5.0;
    std::snprintf(buf, sizeof(buf),
                  "<text x=\"%.1f\" y=\"%.1f\" font-size=\"12\" "
                  "text-anchor=\"end\">%.0f%%</text>\n",
                  ml - 6.0, fy + 4.0, 100.0 * i / 5.0);
    svg += buf;
  }
  std::snprintf(buf, sizeof(buf),
                "<text x=\"%.1f\" y=\"%.1f\" font-size=\"13\" "
                "text-anchor=\"middle\">ADD threshold (m)</text>\n",
                ml + pw / 2.0, height - 10.0);
  svg += buf;
  for (std::size_t r = 0; r < results.size(); ++r) {
    const auto curve = rcal::accuracy_curve(results[r].errors, threshold_max,
                                            resolution);
    std::string pts;
    for (const auto& [tau, acc] : curve) {
      std::snprintf(buf, sizeof(buf), "%.2f,%.2f ",
                    ml + pw * tau / threshold_max, mt + ph - ph * acc);
      pts += buf;
    }
    std::snprintf(buf, sizeof(buf),
                  "<polyline points=\"%s\" fill=\"none\" stroke=\"%s\" "
                  "stroke-width=\"2\"/>\n",
                  pts.c_str(), svg_color(r).c_str());
    svg += buf;
    std::snprintf(buf, sizeof(buf),
                  "<text x=\"%.1f\" y=\"%.1f\" font-size=\"13\" "
                  "fill=\"%s\">%s</text>\n",
                  ml + 12.0, mt + 18.0 + 18.0 * r, svg_color(r).c_str(),
                  results[r].label.c_str());
    svg += buf;
  }
  svg += "</svg>\n";
  return svg;
}

int run_report(const ReportArgs& args) {
  fs::create_directories(args.out_dir);
  std::vector<rcal::AddResult> results;
  for (const std::string& path : args.metrics) {
    const json j = read_json_file(path);
    rcal::AddResult r = rcal::evaluate_errors(
        j.at("label").get<std::string>(),
        j.at("errors").get<std::vector<double>>(), args.threshold_max, 0);
    results.push_back(std::move(r));
  }

  write_text_file(fs::path(args.out_dir) / "table.csv",
                  rcal::compare_runs_csv(results));
  write_text_file(fs::path(args.out_dir) / "table.txt",
                  rcal::compare_runs_text(results));

  std::string csv = "tau_m";
  for (const rcal::AddResult& r : results) {
    csv += "," + r.label;
  }
  csv += "\n";
  std::vector<std::vector<std::pair<double, double>>> curves;
  for (const rcal::AddResult& r : results) {
    curves.push_back(
        rcal::accuracy_curve(r.errors, args.threshold_max, args.resolution));
  }
  if (!curves.empty()) {
    char buf[64];
    for (std::size_t i = 0; i < curves.front().size(); ++i) {
      std::snprintf(buf, sizeof(buf), "%.9g", curves.front()[i].first);
      csv += buf;
      for (const auto& curve : curves) {
        std::snprintf(buf, sizeof(buf), ",%.9g", curve[i].second);
        csv += buf;
      }
      csv += "\n";
    }
  }
  write_text_file(fs::path(args.out_dir) / "curves.csv", csv);
  write_text_file(fs::path(args.out_dir) / "curves.svg",
                  curves_svg(results, args.threshold_max, args.resolution));
  std::printf("%s", rcal::compare_runs_text(results).c_str());
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"camera-to-robot calibration toolkit"};
  app.require_subcommand(1);

  SynthArgs synth_args;
  CLI::App* synth = app.add_subcommand(
      "synth", "generate a synthetic ground-truthed episode");
  synth->add_option("scenario", synth_args.scenario_path,
                    "scenario JSON (references robot spec and intrinsics)")
      ->required();
  synth->add_option("--out", synth_args.out_dir, "output directory")
      ->required();
  std::uint64_t seed_override = 0;
  CLI::Option* seed_opt =
      synth->add_option("--seed", seed_override, "override the scenario seed");

  EstimateArgs est_args;
  CLI::App* estimate = app.add_subcommand(
      "estimate", "estimate the camera-to-base transform for an episode");
  estimate->add_option("episode", est_args.episode_path, "episode manifest")
      ->required();
  estimate->add_option("--out", est_args.out_dir, "output directory")
      ->required();
  estimate->add_option("--mode", est_args.mode, "single | batch")
      ->check(CLI::IsMember({"single", "batch"}));
  estimate->add_option("--detector", est_args.detector,
                       "auto | oracle | lora | none");
  estimate->add_option("--adapter", est_args.adapter_path,
                       "adapter checkpoint (lora detector)");
  estimate->add_option("--dataset", est_args.dataset_path,
                       "embedding dataset with W0 and prompts (lora detector)");
  estimate->add_option("--decoder", est_args.decoder, "dark | argmax")
      ->check(CLI::IsMember({"dark", "argmax"}));
  estimate->add_option("--weighting", est_args.weighting,
                       "none | confidence")
      ->check(CLI::IsMember({"none", "confidence"}));
  estimate->add_option("--threshold", est_args.threshold,
                       "activation threshold (default: half the ideal peak)");
  estimate->add_option("--min-corrs", est_args.min_correspondences,
                       "minimum pooled correspondences");
  estimate->add_flag("--no-gate", est_args.no_gate,
                     "disable the visibility gate");
  estimate->add_flag("--modulate", est_args.use_modulate,
                     "smooth heatmaps before decoding");
  estimate->add_option("--margin", est_args.margin_px,
                       "oracle visibility margin, pixels");

  EvalArgs eval_args;
  CLI::App* eval_cmd =
      app.add_subcommand("eval", "compute ADD/AUC against ground truth");
  eval_cmd->add_option("episode", eval_args.episode_path, "episode manifest")
      ->required();
  eval_cmd->add_option("--run", eval_args.runs,
                       "label=path to an estimate output (repeatable)")
      ->required();
  eval_cmd->add_option("--out", eval_args.out_dir, "output directory")
      ->required();
  eval_cmd->add_option("--threshold-max", eval_args.threshold_max,
                       "AUC integration range, meters");
  eval_cmd->add_option("--resolution", eval_args.resolution,
                       "accuracy curve step, meters");

  TrainArgs train_args;
  CLI::App* train = app.add_subcommand(
      "train-detector", "few-shot train the part visibility classifier");
  train->add_option("--dataset", train_args.dataset_path,
                    "embedding dataset JSON");
  train->add_option("--synth-embeddings", train_args.synth_spec_path,
                    "embedding set spec JSON; generates a synthetic dataset");
  train->add_option("--out", train_args.out_dir, "output directory")
      ->required();
  train->add_option("--shots", train_args.shots,
                    "training samples per class per part (0 = zero-shot)");
  train->add_option("--epochs", train_args.epochs, "training epochs");
  train->add_option("--lr", train_args.learning_rate, "learning rate");
  train->add_option("--seed", train_args.seed, "root seed");
  train->add_option("--rank", train_args.rank, "adapter rank");
  train->add_option("--scale", train_args.scale, "adapter update scale");

  ReportArgs report_args;
  CLI::App* report =
      app.add_subcommand("report", "tables and accuracy curves from metrics");
  report->add_option("--metrics", report_args.metrics,
                     "metrics JSON files from eval (repeatable)")
      ->required();
  report->add_option("--out", report_args.out_dir, "output directory")
      ->required();
  report->add_option("--threshold-max", report_args.threshold_max,
                     "AUC integration range, meters");
  report->add_option("--resolution", report_args.resolution,
                     "accuracy curve step, meters");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitInputError;
  }

  try {
    if (synth->parsed()) {
      if (seed_opt->count() > 0) {
        synth_args.seed = seed_override;
      }
      return run_synth(synth_args);
    }
    if (estimate->parsed()) {
      return run_estimate(est_args);
    }
    if (eval_cmd->parsed()) {
      return run_eval(eval_args);
    }
    if (train->parsed()) {
      return run_train(train_args);
    }
    if (report->parsed()) {
      return run_report(report_args);
    }
  } catch (const rcal::ParseError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitInputError;
  } catch (const rcal::ParameterError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitInputError;
  } catch (const rcal::Error& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitRuntimeError;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitRuntimeError;
  }
  return kExitInputError;
}
