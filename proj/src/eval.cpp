#include "rcal/eval.hpp"

#include <algorithm>
#include <cmath>
#include <cstdarg>
#include <cstdio>
#include <numeric>

#include "rcal/errors.hpp"

namespace rcal {

namespace {

std::string format_row(const char* fmt, ...) {
  char buf[256];
  va_list args;
  va_start(args, fmt);
  std::vsnprintf(buf, sizeof(buf), fmt, args);
  va_end(args);
  return std::string(buf);
}

}  // namespace

double add_metric(const PoseSE3& pose_est, const PoseSE3& pose_gt,
                  const std::vector<Eigen::Vector3d>& points) {
  if (points.empty()) {
    throw ParameterError("add_metric needs at least one evaluation point");
  }
  double sum = 0.0;
  for (const Eigen::Vector3d& p : points) {
    sum += (pose_est.apply(p) - pose_gt.apply(p)).norm();
  }
  return sum / static_cast<double>(points.size());
}

double auc_add(const std::vector<double>& errors, double threshold_max) {
  if (errors.empty()) {
    throw ParameterError("auc_add needs at least one error sample");
  }
  if (!(threshold_max > 0.0)) {
    throw ParameterError("auc_add threshold must be positive");
  }
  double sum = 0.0;
  for (const double e : errors) {
    sum += (threshold_max - std::min(std::max(e, 0.0), threshold_max)) /
           threshold_max;
  }
  return 100.0 * sum / static_cast<double>(errors.size());
}

std::vector<std::pair<double, double>> accuracy_curve(
    const std::vector<double>& errors, double threshold_max,
    double resolution) {
  if (errors.empty()) {
    throw ParameterError("accuracy_curve needs at least one error sample");
  }
  if (!(threshold_max > 0.0) || !(resolution > 0.0)) {
    throw ParameterError("accuracy_curve thresholds must be positive");
  }
  std::vector<double> sorted = errors;
  std::sort(sorted.begin(), sorted.end());
  std::vector<std::pair<double, double>> curve;
  const int steps = static_cast<int>(std::ceil(threshold_max / resolution));
  curve.reserve(static_cast<std::size_t>(steps) + 1);
  for (int i = 0; i <= steps; ++i) {
    const double tau = std::min(i * resolution, threshold_max);
    const auto it = std::upper_bound(sorted.begin(), sorted.end(), tau);
    const double acc = static_cast<double>(it - sorted.begin()) /
                       static_cast<double>(sorted.size());
    curve.emplace_back(tau, acc);
  }
  return curve;
}

AddResult evaluate_errors(const std::string& label, std::vector<double> errors,
                          double threshold_max, int n_points) {
  AddResult result;
  result.label = label;
  result.mean = errors.empty()
                    ? 0.0
                    : std::accumulate(errors.begin(), errors.end(), 0.0) /
                          static_cast<double>(errors.size());
  result.auc_percent = auc_add(errors, threshold_max);
  result.threshold_max = threshold_max;
  result.n_points = n_points;
  result.errors = std::move(errors);
  return result;
}

std::string compare_runs_csv(const std::vector<AddResult>& results) {
  std::string out = "label,n,mean_add_m,auc_pct,threshold_max_m\n";
  for (const AddResult& r : results) {
    out += format_row("%s,%zu,%.9g,%.9g,%.9g\n", r.label.c_str(),
                      r.errors.size(), r.mean, r.auc_percent, r.threshold_max);
  }
  return out;
}

std::string compare_runs_text(const std::vector<AddResult>& results) {
  std::size_t label_width = 6;
  for (const AddResult& r : results) {
    label_width = std::max(label_width, r.label.size());
  }
  std::string out =
      format_row("%-*s  %6s  %8s  %10s\n", static_cast<int>(label_width),
                 "method", "n", "AUC", "Mean (m)");
  for (const AddResult& r : results) {
    out += format_row("%-*s  %6zu  %8.3f  %10.6f\n",
                      static_cast<int>(label_width), r.label.c_str(),
                      r.errors.size(), r.auc_percent, r.mean);
  }
  return out;
}

}  // namespace rcal
