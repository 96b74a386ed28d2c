#pragma once

#include <Eigen/Core>
#include <string>
#include <utility>
#include <vector>

#include "rcal/geometry.hpp"

namespace rcal {

// ADD statistics for one labeled run.
struct AddResult {
  std::string label;
  std::vector<double> errors;  // per-sample ADD, meters
  double mean = 0.0;
  double auc_percent = 0.0;
  double threshold_max = 0.1;  // meters
  int n_points = 0;            // evaluation points per sample
};

// Mean distance between the two transformed point sets:
// (1/n) sum_i |est(p_i) - gt(p_i)|. Throws ParameterError on empty points.
double add_metric(const PoseSE3& pose_est, const PoseSE3& pose_gt,
                  const std::vector<Eigen::Vector3d>& points);

// Area under the accuracy curve acc(tau) = fraction of errors <= tau over
// [0, threshold_max], as a percentage. The empirical accuracy curve is
// piecewise constant, so the integral is evaluated in closed form:
//   auc = 100 * mean_i (threshold_max - min(e_i, threshold_max)) / threshold_max.
// Throws ParameterError on an empty list or non-positive threshold.
double auc_add(const std::vector<double>& errors, double threshold_max);

// acc(tau) sampled every `resolution` meters across [0, threshold_max],
// for plots and reports. The AUC itself does not depend on the resolution.
std::vector<std::pair<double, double>> accuracy_curve(
    const std::vector<double>& errors, double threshold_max,
    double resolution);

AddResult evaluate_errors(const std::string& label,
                          std::vector<double> errors, double threshold_max,
                          int n_points);

// CSV: label,n,mean_add_m,auc_pct,threshold_max_m. Row order = input order.
std::string compare_runs_csv(const std::vector<AddResult>& results);

// Aligned text table, one row per labeled run.
std::string compare_runs_text(const std::vector<AddResult>& results);

}  // namespace rcal
