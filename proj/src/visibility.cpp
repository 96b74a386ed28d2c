#include "rcal/visibility.hpp"

#include <algorithm>
#include <cmath>

#include "rcal/errors.hpp"
#include "rcal/rng.hpp"

namespace rcal {

namespace {

double stable_sigmoid(double z) {
  if (z >= 0.0) {
    return 1.0 / (1.0 + std::exp(-z));
  }
  const double e = std::exp(z);
  return e / (1.0 + e);
}

double softplus(double z) {
  return std::max(z, 0.0) + std::log1p(std::exp(-std::abs(z)));
}

struct PairGradient {
  double loss = 0.0;
  Eigen::VectorXd d_embedding;  // dL/dh
  Eigen::VectorXd d_positive;
  Eigen::VectorXd d_negative;
};

// BCE of the prompt-pair classifier and its gradients. The probability is
// sigmoid((cos(h,p) - cos(h,n)) / T).
PairGradient pair_gradient(const Eigen::VectorXd& h, const PromptPair& pair,
                           bool label, bool want_prompt_grads) {
  const double hn = h.norm();
  const double pn = pair.positive.norm();
  const double nn = pair.negative.norm();
  if (hn <= 0.0 || pn <= 0.0 || nn <= 0.0) {
    throw ParameterError("cosine similarity undefined for zero-norm vector");
  }
  const Eigen::VectorXd hu = h / hn;
  const Eigen::VectorXd pu = pair.positive / pn;
  const Eigen::VectorXd nu = pair.negative / nn;
  const double cp = hu.dot(pu);
  const double cn = hu.dot(nu);
  const double z = (cp - cn) / pair.temperature;
  const double prob = stable_sigmoid(z);
  const double y = label ? 1.0 : 0.0;

  PairGradient g;
  g.loss = label ? softplus(-z) : softplus(z);
  const double dz = (prob - y) / pair.temperature;
  g.d_embedding = dz * ((pu - cp * hu) - (nu - cn * hu)) / hn;
  if (want_prompt_grads) {
    g.d_positive = dz * (hu - cp * pu) / pn;
    g.d_negative = -dz * (hu - cn * nu) / nn;
  }
  return g;
}

}  // namespace

void LoRAAdapter::validate() const {
  const int d = output_dim();
  const int k = input_dim();
  const int r = rank();
  if (d < 1 || k < 1) {
    throw ParameterError("adapter W0 must be non-empty");
  }
  if (r < 1 || r >= std::min(d, k)) {
    throw ParameterError("adapter rank must satisfy 1 <= r < min(d, k)");
  }
  if (B.rows() != d || A.cols() != k || A.rows() != r) {
    throw DimensionError("adapter B/A shapes inconsistent with W0 and rank");
  }
}

LoRAAdapter make_lora_adapter(const Eigen::MatrixXd& w0, int rank, double scale,
                              std::uint64_t seed) {
  LoRAAdapter adapter;
  adapter.W0 = w0;
  adapter.scale = scale;
  adapter.B = Eigen::MatrixXd::Zero(w0.rows(), rank);
  adapter.A = Eigen::MatrixXd::Zero(rank, w0.cols());
  SeededRng rng(seed);
  const double stddev = 1.0 / std::sqrt(static_cast<double>(rank));
  for (Eigen::Index r = 0; r < adapter.A.rows(); ++r) {
    for (Eigen::Index c = 0; c < adapter.A.cols(); ++c) {
      adapter.A(r, c) = rng.gaussian(0.0, stddev);
    }
  }
  adapter.validate();
  return adapter;
}

Eigen::VectorXd lora_forward(const LoRAAdapter& adapter,
                             const Eigen::VectorXd& x) {
  if (x.size() != adapter.W0.cols()) {
    throw DimensionError("lora_forward: input has dimension " +
                         std::to_string(x.size()) + ", adapter expects " +
                         std::to_string(adapter.W0.cols()));
  }
  // Two rank-limited products; the dense update B*A is never materialized.
  return adapter.W0 * x + adapter.scale * (adapter.B * (adapter.A * x));
}

double classify_part(const Eigen::VectorXd& embedding, const PromptPair& pair) {
  if (embedding.size() != pair.positive.size() ||
      embedding.size() != pair.negative.size()) {
    throw DimensionError("classify_part: embedding/prompt dimension mismatch");
  }
  const double hn = embedding.norm();
  const double pn = pair.positive.norm();
  const double nn = pair.negative.norm();
  if (hn <= 0.0 || pn <= 0.0 || nn <= 0.0) {
    throw ParameterError("cosine similarity undefined for zero-norm vector");
  }
  const double cp = embedding.dot(pair.positive) / (hn * pn);
  const double cn = embedding.dot(pair.negative) / (hn * nn);
  return stable_sigmoid((cp - cn) / pair.temperature);
}

TrainResult train_few_shot(const LoRAAdapter& adapter,
                           const PromptPairBank& bank,
                           const std::vector<EmbeddingSample>& samples,
                           const TrainConfig& config) {
  adapter.validate();
  if (samples.empty()) {
    throw TrainingError("no training samples");
  }
  std::map<std::string, std::pair<int, int>> class_counts;
  for (const EmbeddingSample& s : samples) {
    if (bank.find(s.part_label) == bank.end()) {
      throw TrainingError("no prompt pair for part '" + s.part_label + "'");
    }
    if (s.features.size() != adapter.input_dim()) {
      throw DimensionError("sample feature dimension mismatch");
    }
    auto& [pos, neg] = class_counts[s.part_label];
    (s.visible ? pos : neg) += 1;
  }
  for (const auto& [part, counts] : class_counts) {
    if (counts.first == 0 || counts.second == 0) {
      throw TrainingError("part '" + part +
                          "' needs at least one visible and one hidden sample");
    }
  }

  TrainResult result;
  result.adapter = adapter;
  result.bank = bank;

  const double inv_n = 1.0 / static_cast<double>(samples.size());
  const auto mean_loss = [&]() {
    double loss = 0.0;
    for (const EmbeddingSample& s : samples) {
      const Eigen::VectorXd h = lora_forward(result.adapter, s.features);
      const PromptPair& pair = result.bank.at(s.part_label);
      loss += pair_gradient(h, pair, s.visible, false).loss;
    }
    return loss * inv_n;
  };

  for (int epoch = 0; epoch < config.epochs; ++epoch) {
    Eigen::MatrixXd grad_b =
        Eigen::MatrixXd::Zero(result.adapter.B.rows(), result.adapter.B.cols());
    Eigen::MatrixXd grad_a =
        Eigen::MatrixXd::Zero(result.adapter.A.rows(), result.adapter.A.cols());
    std::map<std::string, std::pair<Eigen::VectorXd, Eigen::VectorXd>>
        prompt_grads;
    if (config.train_prompts) {
      for (const auto& [part, pair] : result.bank) {
        prompt_grads[part] = {Eigen::VectorXd::Zero(pair.positive.size()),
                              Eigen::VectorXd::Zero(pair.negative.size())};
      }
    }

    for (const EmbeddingSample& s : samples) {
      const Eigen::VectorXd ax = result.adapter.A * s.features;
      const Eigen::VectorXd h =
          result.adapter.W0 * s.features + result.adapter.scale *
                                               (result.adapter.B * ax);
      const PromptPair& pair = result.bank.at(s.part_label);
      const PairGradient g =
          pair_gradient(h, pair, s.visible, config.train_prompts);
      grad_b += inv_n * result.adapter.scale * g.d_embedding * ax.transpose();
      grad_a += inv_n * result.adapter.scale *
                (result.adapter.B.transpose() * g.d_embedding) *
                s.features.transpose();
      if (config.train_prompts) {
        auto& [gp, gn] = prompt_grads[s.part_label];
        gp += inv_n * g.d_positive;
        gn += inv_n * g.d_negative;
      }
    }

    result.adapter.B -= config.learning_rate * grad_b;
    result.adapter.A -= config.learning_rate * grad_a;
    if (config.train_prompts) {
      for (auto& [part, pair] : result.bank) {
        pair.positive -= config.learning_rate * prompt_grads[part].first;
        pair.negative -= config.learning_rate * prompt_grads[part].second;
      }
    }
    result.loss_curve.push_back(mean_loss());
  }
  return result;
}

VisibilityReport oracle_visibility(const KinematicChain& chain,
                                   const KeypointLayout& layout,
                                   const JointState& q, const PoseSE3& pose,
                                   const CameraIntrinsics& K,
                                   double margin_px) {
  const std::map<int, Eigen::Vector3d> points = keypoints_3d(chain, layout, q);
  VisibilityReport report;
  for (const std::string& part : layout.parts()) {
    int in_view = 0;
    for (const int id : layout.part_keypoints(part)) {
      const Eigen::Vector3d pc = pose.apply(points.at(id));
      if (pc.z() <= kMinDepth) {
        continue;
      }
      const double u = K.fx * pc.x() / pc.z() + K.cx;
      const double v = K.fy * pc.y() / pc.z() + K.cy;
      if (u >= margin_px && u <= K.width - 1 - margin_px && v >= margin_px &&
          v <= K.height - 1 - margin_px) {
        ++in_view;
      }
    }
    const bool visible = in_view >= KeypointLayout::kMinKeypointsPerLink;
    report[part] = {visible, visible ? 1.0 : 0.0};
  }
  return report;
}

}  // namespace rcal
