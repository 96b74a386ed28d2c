#include "rcal/io.hpp"

#include <bit>
#include <cstdint>
#include <cstdio>
#include <cstring>
#include <fstream>

#include <json.hpp>

#include "rcal/errors.hpp"
#include "rcal/hash.hpp"

static_assert(std::endian::native == std::endian::little,
              "heatmap files are little-endian; big-endian hosts unsupported");

namespace rcal {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

json read_json(const fs::path& path) {
  std::ifstream in(path);
  if (!in) {
    throw ParseError("cannot open " + path.string());
  }
  try {
    return json::parse(in);
  } catch (const json::exception& e) {
    throw ParseError(path.string() + ": " + e.what());
  }
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) {
    throw DataError("cannot write " + path.string());
  }
  out << text;
}

void write_json(const fs::path& path, const json& j) {
  write_text(path, j.dump(2) + "\n");
}

void require_schema(const json& j, const fs::path& path) {
  if (!j.contains("schema_version")) {
    throw ParseError(path.string() + ": missing schema_version");
  }
  if (j.at("schema_version").get<int>() != 1) {
    throw ParseError(path.string() + ": unsupported schema_version");
  }
}

json vector_to_json(const Eigen::VectorXd& v) {
  json arr = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    arr.push_back(v(i));
  }
  return arr;
}

Eigen::VectorXd vector_from_json(const json& arr) {
  Eigen::VectorXd v(arr.size());
  for (std::size_t i = 0; i < arr.size(); ++i) {
    v(static_cast<Eigen::Index>(i)) = arr.at(i).get<double>();
  }
  return v;
}

json matrix_to_json(const Eigen::MatrixXd& m) {
  json rows = json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    json row = json::array();
    for (Eigen::Index c = 0; c < m.cols(); ++c) {
      row.push_back(m(r, c));
    }
    rows.push_back(std::move(row));
  }
  return rows;
}

Eigen::MatrixXd matrix_from_json(const json& rows) {
  if (rows.empty()) {
    throw ParseError("matrix must have at least one row");
  }
  const std::size_t cols = rows.at(0).size();
  Eigen::MatrixXd m(rows.size(), cols);
  for (std::size_t r = 0; r < rows.size(); ++r) {
    if (rows.at(r).size() != cols) {
      throw ParseError("matrix rows have inconsistent lengths");
    }
    for (std::size_t c = 0; c < cols; ++c) {
      m(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) =
          rows.at(r).at(c).get<double>();
    }
  }
  return m;
}

json pose_to_json(const PoseSE3& pose) {
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

PoseSE3 pose_from_json(const json& j) {
  const json& rot = j.at("rotation");
  const json& tr = j.at("translation");
  if (rot.size() != 9 || tr.size() != 3) {
    throw ParseError("pose needs 9 rotation values and 3 translation values");
  }
  PoseSE3 pose;
  for (int r = 0; r < 3; ++r) {
    for (int c = 0; c < 3; ++c) {
      pose.rotation(r, c) = rot.at(static_cast<std::size_t>(3 * r + c));
    }
  }
  for (int i = 0; i < 3; ++i) {
    pose.translation(i) = tr.at(static_cast<std::size_t>(i));
  }
  if (orthonormality_error(pose.rotation) > 1e-6 ||
      pose.rotation.determinant() < 0.0) {
    throw ParseError("pose rotation is not a proper rotation matrix");
  }
  return pose;
}

json prompt_bank_to_json(const PromptPairBank& bank) {
  json j = json::object();
  for (const auto& [part, pair] : bank) {
    j[part] = {{"positive", vector_to_json(pair.positive)},
               {"negative", vector_to_json(pair.negative)},
               {"temperature", pair.temperature}};
  }
  return j;
}

PromptPairBank prompt_bank_from_json(const json& j) {
  PromptPairBank bank;
  for (const auto& [part, pj] : j.items()) {
    PromptPair pair;
    pair.positive = vector_from_json(pj.at("positive"));
    pair.negative = vector_from_json(pj.at("negative"));
    pair.temperature = pj.value("temperature", 0.07);
    bank[part] = std::move(pair);
  }
  return bank;
}

json samples_to_json(const std::vector<EmbeddingSample>& samples) {
  json arr = json::array();
  for (const EmbeddingSample& s : samples) {
    arr.push_back({{"part", s.part_label},
                   {"visible", s.visible},
                   {"features", vector_to_json(s.features)}});
  }
  return arr;
}

std::vector<EmbeddingSample> samples_from_json(const json& arr) {
  std::vector<EmbeddingSample> samples;
  samples.reserve(arr.size());
  for (const json& sj : arr) {
    EmbeddingSample s;
    s.part_label = sj.at("part").get<std::string>();
    s.visible = sj.at("visible").get<bool>();
    s.features = vector_from_json(sj.at("features"));
    samples.push_back(std::move(s));
  }
  return samples;
}

const char* scenario_kind_name(ScenarioKind kind) {
  return kind == ScenarioKind::kRobotInView ? "robot_in_view"
                                            : "robot_in_and_out";
}

ScenarioKind scenario_kind_from(const std::string& name,
                                const fs::path& path) {
  if (name == "robot_in_view") {
    return ScenarioKind::kRobotInView;
  }
  if (name == "robot_in_and_out") {
    return ScenarioKind::kRobotInAndOut;
  }
  throw ParseError(path.string() + ": unknown scenario kind '" + name + "'");
}

std::string frame_dir_name(int frame_index) {
  char buf[16];
  std::snprintf(buf, sizeof(buf), "%03d", frame_index);
  return std::string(buf);
}

std::string channel_file_name(int keypoint_id) {
  char buf[24];
  std::snprintf(buf, sizeof(buf), "kp_%02d.hmap", keypoint_id);
  return std::string(buf);
}

}  // namespace

RobotSpec load_robot_spec(const fs::path& path) {
  const json j = read_json(path);
  try {
    require_schema(j, path);
    if (j.contains("convention") &&
        j.at("convention").get<std::string>() != "standard_dh") {
      throw ParseError(path.string() +
                       ": unsupported kinematic convention '" +
                       j.at("convention").get<std::string>() +
                       "' (expected standard_dh)");
    }
    std::vector<JointSpec> links;
    for (const json& lj : j.at("links")) {
      JointSpec link;
      link.dh_a = lj.value("a", 0.0);
      link.dh_d = lj.value("d", 0.0);
      link.dh_alpha = lj.value("alpha", 0.0);
      link.theta_offset = lj.value("theta_offset", 0.0);
      const std::string type = lj.value("type", "revolute");
      if (type == "revolute") {
        link.type = JointType::kRevolute;
      } else if (type == "fixed") {
        link.type = JointType::kFixed;
      } else {
        throw ParseError(path.string() + ": unknown joint type '" + type + "'");
      }
      if (lj.contains("limits")) {
        link.limit_lo = lj.at("limits").at(0).get<double>();
        link.limit_hi = lj.at("limits").at(1).get<double>();
      }
      links.push_back(link);
    }
    std::vector<KeypointEntry> entries;
    for (const json& kj : j.at("keypoints")) {
      KeypointEntry e;
      e.keypoint_id = kj.at("id").get<int>();
      e.link_index = kj.at("link").get<int>();
      const json& off = kj.at("offset");
      e.offset = {off.at(0).get<double>(), off.at(1).get<double>(),
                  off.at(2).get<double>()};
      e.part_label = kj.at("part").get<std::string>();
      entries.push_back(std::move(e));
    }
    RobotSpec spec{KinematicChain(std::move(links)),
                   KeypointLayout(std::move(entries))};
    spec.layout.validate_against(spec.chain);
    return spec;
  } catch (const json::exception& e) {
    throw ParseError(path.string() + ": " + e.what());
  }
}

void save_robot_spec(const fs::path& path, const RobotSpec& spec) {
  json links = json::array();
  for (const JointSpec& l : spec.chain.links()) {
    links.push_back(
        {{"a", l.dh_a},
         {"d", l.dh_d},
         {"alpha", l.dh_alpha},
         {"theta_offset", l.theta_offset},
         {"type", l.type == JointType::kRevolute ? "revolute" : "fixed"},
         {"limits", {l.limit_lo, l.limit_hi}}});
  }
  json keypoints = json::array();
  for (const KeypointEntry& e : spec.layout.entries()) {
    keypoints.push_back({{"id", e.keypoint_id},
                         {"link", e.link_index},
                         {"offset", {e.offset.x(), e.offset.y(), e.offset.z()}},
                         {"part", e.part_label}});
  }
  write_json(path, {{"schema_version", 1},
                    {"convention", "standard_dh"},
                    {"units", {{"length", "m"}, {"angle", "rad"}}},
                    {"links", links},
                    {"keypoints", keypoints}});
}

CameraIntrinsics load_intrinsics(const fs::path& path) {
  const json j = read_json(path);
  try {
    CameraIntrinsics K;
    K.fx = j.at("fx").get<double>();
    K.fy = j.at("fy").get<double>();
    K.cx = j.at("cx").get<double>();
    K.cy = j.at("cy").get<double>();
    K.width = j.at("width").get<int>();
    K.height = j.at("height").get<int>();
    K.validate();
    return K;
  } catch (const json::exception& e) {
    throw ParseError(path.string() + ": " + e.what());
  } catch (const ParameterError& e) {
    throw ParseError(path.string() + ": " + e.what());
  }
}

void save_intrinsics(const fs::path& path, const CameraIntrinsics& K) {
  write_json(path, {{"fx", K.fx},
                    {"fy", K.fy},
                    {"cx", K.cx},
                    {"cy", K.cy},
                    {"width", K.width},
                    {"height", K.height}});
}

void save_heatmap(const fs::path& path, const Heatmap& hm) {
  std::ofstream out(path, std::ios::binary);
  if (!out) {
    throw DataError("cannot write " + path.string());
  }
  const std::uint32_t w = static_cast<std::uint32_t>(hm.width());
  const std::uint32_t h = static_cast<std::uint32_t>(hm.height());
  out.write(reinterpret_cast<const char*>(&w), 4);
  out.write(reinterpret_cast<const char*>(&h), 4);
  std::vector<float> data(hm.values().size());
  for (std::size_t i = 0; i < data.size(); ++i) {
    data[i] = static_cast<float>(hm.values()[i]);
  }
  out.write(reinterpret_cast<const char*>(data.data()),
            static_cast<std::streamsize>(data.size() * sizeof(float)));
  if (!out) {
    throw DataError("short write to " + path.string());
  }
}

Heatmap load_heatmap(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw DataError("cannot open heatmap file " + path.string());
  }
  std::uint32_t w = 0;
  std::uint32_t h = 0;
  in.read(reinterpret_cast<char*>(&w), 4);
  in.read(reinterpret_cast<char*>(&h), 4);
  if (!in || w < 5 || h < 5 || static_cast<std::uint64_t>(w) * h > (1u << 28)) {
    throw DataError("corrupt heatmap header in " + path.string());
  }
  Heatmap hm(static_cast<int>(w), static_cast<int>(h));
  std::vector<float> data(static_cast<std::size_t>(w) * h);
  in.read(reinterpret_cast<char*>(data.data()),
          static_cast<std::streamsize>(data.size() * sizeof(float)));
  if (in.gcount() !=
      static_cast<std::streamsize>(data.size() * sizeof(float))) {
    throw DataError("truncated heatmap data in " + path.string());
  }
  for (std::size_t i = 0; i < data.size(); ++i) {
    hm.values()[i] = static_cast<double>(data[i]);
  }
  try {
    hm.validate();
  } catch (const DataError&) {
    throw DataError("corrupt heatmap values in " + path.string());
  }
  return hm;
}

PoseSE3 load_pose(const fs::path& path) {
  const json j = read_json(path);
  try {
    require_schema(j, path);
    return pose_from_json(j);
  } catch (const json::exception& e) {
    throw ParseError(path.string() + ": " + e.what());
  }
}

void save_pose(const fs::path& path, const PoseSE3& pose,
               std::optional<double> rms_px) {
  json j = pose_to_json(pose);
  j["schema_version"] = 1;
  if (rms_px.has_value()) {
    j["rms_px"] = *rms_px;
  }
  write_json(path, j);
}

namespace {

ScenarioSpec scenario_from_json(const json& j, const fs::path& path) {
  ScenarioSpec s;
  s.kind = scenario_kind_from(j.value("kind", "robot_in_view"), path);
  s.n_frames = j.value("n_frames", s.n_frames);
  s.pixel_noise_sigma = j.value("pixel_noise_sigma", s.pixel_noise_sigma);
  s.heatmap_noise = j.value("heatmap_noise", s.heatmap_noise);
  s.dropout_prob = j.value("dropout_prob", s.dropout_prob);
  s.seed = j.value("seed", s.seed);
  s.sigma = j.value("sigma", s.sigma);
  s.visibility_margin_px = j.value("visibility_margin_px", s.visibility_margin_px);
  s.min_distance = j.value("min_distance", s.min_distance);
  s.max_distance = j.value("max_distance", s.max_distance);
  s.max_retries = j.value("max_retries", s.max_retries);
  s.validate();
  return s;
}

json scenario_to_json(const ScenarioSpec& s) {
  return {{"schema_version", 1},
          {"kind", scenario_kind_name(s.kind)},
          {"n_frames", s.n_frames},
          {"pixel_noise_sigma", s.pixel_noise_sigma},
          {"heatmap_noise", s.heatmap_noise},
          {"dropout_prob", s.dropout_prob},
          {"seed", s.seed},
          {"sigma", s.sigma},
          {"visibility_margin_px", s.visibility_margin_px},
          {"min_distance", s.min_distance},
          {"max_distance", s.max_distance},
          {"max_retries", s.max_retries}};
}

}  // namespace

ScenarioSpec load_scenario(const fs::path& path) {
  const json j = read_json(path);
  try {
    require_schema(j, path);
    return scenario_from_json(j, path);
  } catch (const json::exception& e) {
    throw ParseError(path.string() + ": " + e.what());
  } catch (const ParameterError& e) {
    throw ParseError(path.string() + ": " + e.what());
  }
}

void save_scenario(const fs::path& path, const ScenarioSpec& scenario) {
  write_json(path, scenario_to_json(scenario));
}

ScenarioFile load_scenario_file(const fs::path& path) {
  const json j = read_json(path);
  try {
    require_schema(j, path);
    ScenarioFile file;
    file.spec = scenario_from_json(j, path);
    const fs::path base = path.parent_path();
    file.robot_spec_path =
        base / fs::path(j.at("robot_spec").get<std::string>());
    file.intrinsics_path =
        base / fs::path(j.at("intrinsics").get<std::string>());
    if (!fs::exists(file.robot_spec_path)) {
      throw ParseError(path.string() + ": robot spec not found: " +
                       file.robot_spec_path.string());
    }
    if (!fs::exists(file.intrinsics_path)) {
      throw ParseError(path.string() + ": intrinsics not found: " +
                       file.intrinsics_path.string());
    }
    return file;
  } catch (const json::exception& e) {
    throw ParseError(path.string() + ": " + e.what());
  } catch (const ParameterError& e) {
    throw ParseError(path.string() + ": " + e.what());
  }
}

Eigen::VectorXd load_embedding(const fs::path& path) {
  const json j = read_json(path);
  try {
    const Eigen::VectorXd v = vector_from_json(j.at("values"));
    if (v.size() != j.at("dim").get<Eigen::Index>()) {
      throw ParseError(path.string() + ": dim header disagrees with values");
    }
    return v;
  } catch (const json::exception& e) {
    throw ParseError(path.string() + ": " + e.what());
  }
}

void save_embedding(const fs::path& path, const Eigen::VectorXd& v) {
  write_json(path, {{"dim", v.size()}, {"values", vector_to_json(v)}});
}

void save_adapter(const fs::path& path, const LoRAAdapter& adapter) {
  write_json(path, {{"schema_version", 1},
                    {"w0_hash", hash_hex(matrix_hash(adapter.W0))},
                    {"input_dim", adapter.input_dim()},
                    {"output_dim", adapter.output_dim()},
                    {"rank", adapter.rank()},
                    {"scale", adapter.scale},
                    {"B", matrix_to_json(adapter.B)},
                    {"A", matrix_to_json(adapter.A)}});
}

LoRAAdapter load_adapter(const fs::path& path, const Eigen::MatrixXd& w0) {
  const json j = read_json(path);
  try {
    require_schema(j, path);
    const std::string expected = j.at("w0_hash").get<std::string>();
    if (hash_hex(matrix_hash(w0)) != expected) {
      throw DataError(path.string() +
                      ": checkpoint was trained against a different W0");
    }
    LoRAAdapter adapter;
    adapter.W0 = w0;
    adapter.B = matrix_from_json(j.at("B"));
    adapter.A = matrix_from_json(j.at("A"));
    adapter.scale = j.at("scale").get<double>();
    adapter.validate();
    return adapter;
  } catch (const json::exception& e) {
    throw ParseError(path.string() + ": " + e.what());
  }
}

void save_embedding_dataset(const fs::path& path,
                            const EmbeddingDataset& dataset) {
  write_json(path, {{"schema_version", 1},
                    {"feature_dim", dataset.feature_dim},
                    {"embed_dim", dataset.embed_dim},
                    {"backbone_w0", matrix_to_json(dataset.backbone_w0)},
                    {"prompts", prompt_bank_to_json(dataset.prompts)},
                    {"train", samples_to_json(dataset.train)},
                    {"test", samples_to_json(dataset.test)}});
}

EmbeddingDataset load_embedding_dataset(const fs::path& path) {
  const json j = read_json(path);
  try {
    require_schema(j, path);
    EmbeddingDataset ds;
    ds.feature_dim = j.at("feature_dim").get<int>();
    ds.embed_dim = j.at("embed_dim").get<int>();
    ds.backbone_w0 = matrix_from_json(j.at("backbone_w0"));
    ds.prompts = prompt_bank_from_json(j.at("prompts"));
    ds.train = samples_from_json(j.at("train"));
    ds.test = samples_from_json(j.at("test"));
    if (ds.backbone_w0.rows() != ds.embed_dim ||
        ds.backbone_w0.cols() != ds.feature_dim) {
      throw ParseError(path.string() + ": backbone shape disagrees with dims");
    }
    return ds;
  } catch (const json::exception& e) {
    throw ParseError(path.string() + ": " + e.what());
  }
}

EmbeddingSetSpec load_embedding_set_spec(const fs::path& path) {
  const json j = read_json(path);
  try {
    require_schema(j, path);
    EmbeddingSetSpec spec;
    spec.feature_dim = j.value("feature_dim", spec.feature_dim);
    spec.embed_dim = j.value("embed_dim", spec.embed_dim);
    spec.n_train_per_class = j.value("n_train_per_class", spec.n_train_per_class);
    spec.n_test_per_class = j.value("n_test_per_class", spec.n_test_per_class);
    spec.cluster_separation =
        j.value("cluster_separation", spec.cluster_separation);
    spec.temperature = j.value("temperature", spec.temperature);
    spec.seed = j.value("seed", spec.seed);
    if (j.contains("parts")) {
      spec.parts = j.at("parts").get<std::vector<std::string>>();
    }
    return spec;
  } catch (const json::exception& e) {
    throw ParseError(path.string() + ": " + e.what());
  }
}

EpisodeHeader load_episode_header(const fs::path& manifest_path) {
  const json j = read_json(manifest_path);
  const fs::path base = manifest_path.parent_path();
  try {
    require_schema(j, manifest_path);
    EpisodeHeader header;
    const json& kj = j.at("intrinsics");
    header.intrinsics.fx = kj.at("fx").get<double>();
    header.intrinsics.fy = kj.at("fy").get<double>();
    header.intrinsics.cx = kj.at("cx").get<double>();
    header.intrinsics.cy = kj.at("cy").get<double>();
    header.intrinsics.width = kj.at("width").get<int>();
    header.intrinsics.height = kj.at("height").get<int>();
    header.intrinsics.validate();
    header.sigma = j.value("sigma", 6.0);
    header.robot_spec_path = base / j.at("robot_spec").get<std::string>();
    if (!fs::exists(header.robot_spec_path)) {
      throw ParseError(manifest_path.string() + ": robot spec not found: " +
                       header.robot_spec_path.string());
    }
    if (j.contains("ground_truth_pose")) {
      header.ground_truth_pose = pose_from_json(j.at("ground_truth_pose"));
    }
    header.n_frames = static_cast<int>(j.at("frames").size());
    return header;
  } catch (const json::exception& e) {
    throw ParseError(manifest_path.string() + ": " + e.what());
  }
}

void write_episode(const fs::path& dir, const SynthEpisode& ep,
                   const fs::path& robot_spec_source) {
  fs::create_directories(dir / "frames");

  {  // byte copy keeps the bundled spec and the episode self-consistent
    std::ifstream in(robot_spec_source, std::ios::binary);
    if (!in) {
      throw ParseError("cannot open robot spec " + robot_spec_source.string());
    }
    std::ofstream out(dir / "robot.json", std::ios::binary);
    out << in.rdbuf();
  }

  save_scenario(dir / "scenario.json", ep.scenario);

  json gt_frames = json::array();
  for (const auto& frame_truth : ep.ground_truth.true_pixels) {
    json fj = json::object();
    for (const auto& [id, px] : frame_truth) {
      fj[std::to_string(id)] = {px.x(), px.y()};
    }
    gt_frames.push_back(std::move(fj));
  }
  json gt = pose_to_json(ep.ground_truth.pose);
  gt["schema_version"] = 1;
  gt["true_pixels"] = std::move(gt_frames);
  write_json(dir / "ground_truth.json", gt);

  json frames = json::array();
  for (const FrameObservation& frame : ep.episode.frames) {
    const std::string fd = frame_dir_name(frame.frame_index);
    fs::create_directories(dir / "frames" / fd);
    json channels = json::array();
    for (const auto& [id, hm] : frame.heatmaps) {
      const std::string file = channel_file_name(id);
      save_heatmap(dir / "frames" / fd / file, hm);
      channels.push_back({{"keypoint_id", id}, {"file", file}});
    }
    write_json(dir / "frames" / fd / "channels.json",
               {{"schema_version", 1},
                {"width", ep.episode.intrinsics.width},
                {"height", ep.episode.intrinsics.height},
                {"channels", std::move(channels)}});
    json fj = {{"frame_index", frame.frame_index},
               {"q", frame.q.angles},
               {"heatmaps", "frames/" + fd + "/channels.json"}};
    if (frame.q.timestamp.has_value()) {
      fj["timestamp"] = *frame.q.timestamp;
    }
    frames.push_back(std::move(fj));
  }

  json manifest = {{"schema_version", 1},
                   {"robot_spec", "robot.json"},
                   {"sigma", ep.episode.sigma},
                   {"frames", std::move(frames)}};
  manifest["intrinsics"] = {{"fx", ep.episode.intrinsics.fx},
                            {"fy", ep.episode.intrinsics.fy},
                            {"cx", ep.episode.intrinsics.cx},
                            {"cy", ep.episode.intrinsics.cy},
                            {"width", ep.episode.intrinsics.width},
                            {"height", ep.episode.intrinsics.height}};
  if (ep.episode.ground_truth_pose.has_value()) {
    manifest["ground_truth_pose"] = pose_to_json(*ep.episode.ground_truth_pose);
  }
  write_json(dir / "manifest.json", manifest);
}

LoadedEpisode load_episode(const fs::path& manifest_path) {
  const json j = read_json(manifest_path);
  const fs::path base = manifest_path.parent_path();
  try {
    require_schema(j, manifest_path);
    Episode episode;

    const json& kj = j.at("intrinsics");
    episode.intrinsics.fx = kj.at("fx").get<double>();
    episode.intrinsics.fy = kj.at("fy").get<double>();
    episode.intrinsics.cx = kj.at("cx").get<double>();
    episode.intrinsics.cy = kj.at("cy").get<double>();
    episode.intrinsics.width = kj.at("width").get<int>();
    episode.intrinsics.height = kj.at("height").get<int>();
    episode.intrinsics.validate();

    episode.sigma = j.value("sigma", 6.0);
    const fs::path robot_spec_path =
        base / j.at("robot_spec").get<std::string>();
    RobotSpec robot = load_robot_spec(robot_spec_path);
    if (j.contains("ground_truth_pose")) {
      episode.ground_truth_pose = pose_from_json(j.at("ground_truth_pose"));
    }

    for (const json& fj : j.at("frames")) {
      FrameObservation frame;
      frame.frame_index = fj.at("frame_index").get<int>();
      frame.q.angles = fj.at("q").get<std::vector<double>>();
      if (fj.contains("timestamp")) {
        frame.q.timestamp = fj.at("timestamp").get<double>();
      }
      if (fj.contains("heatmaps")) {
        const fs::path sidecar = base / fj.at("heatmaps").get<std::string>();
        const json cj = read_json(sidecar);
        require_schema(cj, sidecar);
        for (const json& ch : cj.at("channels")) {
          const int id = ch.at("keypoint_id").get<int>();
          const fs::path hm_path =
              sidecar.parent_path() / ch.at("file").get<std::string>();
          frame.heatmaps.emplace(id, load_heatmap(hm_path));
        }
      } else if (fj.contains("detections")) {
        for (const json& dj : fj.at("detections")) {
          Detection d;
          d.keypoint_id = dj.at("keypoint_id").get<int>();
          d.point2d = {dj.at("uv").at(0).get<double>(),
                       dj.at("uv").at(1).get<double>()};
          d.confidence = dj.value("confidence", 1.0);
          frame.detections.push_back(d);
        }
      } else {
        throw ParseError(manifest_path.string() + ": frame " +
                         std::to_string(frame.frame_index) +
                         " has neither heatmaps nor detections");
      }
      if (fj.contains("embedding")) {
        frame.embedding =
            load_embedding(base / fj.at("embedding").get<std::string>());
      }
      episode.frames.push_back(std::move(frame));
    }
    return {std::move(episode), std::move(robot), robot_spec_path};
  } catch (const json::exception& e) {
    throw ParseError(manifest_path.string() + ": " + e.what());
  }
}

EpisodeGroundTruth load_ground_truth(const fs::path& path) {
  const json j = read_json(path);
  try {
    require_schema(j, path);
    EpisodeGroundTruth gt;
    gt.pose = pose_from_json(j);
    for (const json& fj : j.at("true_pixels")) {
      std::map<int, Eigen::Vector2d> frame;
      for (const auto& [key, px] : fj.items()) {
        frame[std::stoi(key)] = {px.at(0).get<double>(),
                                 px.at(1).get<double>()};
      }
      gt.true_pixels.push_back(std::move(frame));
    }
    return gt;
  } catch (const json::exception& e) {
    throw ParseError(path.string() + ": " + e.what());
  }
}

}  // namespace rcal
