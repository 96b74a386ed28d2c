#pragma once

#include <vector>

namespace rcal {

// Dense keypoint belief grid. Values are non-negative reals stored row-major;
// (u, v) indexes column u of row v. The minimum 5x5 size guarantees an
// interior peak has the full 3x3 neighborhood needed for second differences.
class Heatmap {
 public:
  Heatmap(int width, int height);  // zero-filled; throws ParameterError

  int width() const { return width_; }
  int height() const { return height_; }

  double at(int u, int v) const {
    return values_[static_cast<std::size_t>(v) * width_ + u];
  }
  double& at(int u, int v) {
    return values_[static_cast<std::size_t>(v) * width_ + u];
  }

  const std::vector<double>& values() const { return values_; }
  std::vector<double>& values() { return values_; }

  // Throws DataError if any value is negative or non-finite.
  void validate() const;

 private:
  int width_;
  int height_;
  std::vector<double> values_;
};

// Isotropic Gaussian bump model: covariance sigma^2 * I.
struct HeatmapModel {
  double sigma = 6.0;  // pixels
};

struct DecodeConfig {
  double epsilon = 1e-10;       // added before the log to tolerate zeros
  double clamp_radius = 1.0;    // max sub-pixel correction per axis
  double max_condition = 1e8;   // Hessian eigenvalue ratio gate
  double min_curvature = 1e-12;  // both eigenvalues must be < -min_curvature
};

struct DecodedKeypoint {
  double u = 0.0;  // sub-pixel column
  double v = 0.0;  // sub-pixel row
  double peak_activation = 0.0;  // heatmap value at the integer argmax
  int peak_u = 0;
  int peak_v = 0;
  bool valid = false;
};

// Samples the normalized 2D Gaussian centered at (u_star, v_star) at integer
// pixel centers: value = exp(-(du^2 + dv^2) / (2 sigma^2)) / (2 pi sigma^2).
// Off-frame centers are allowed and yield near-zero grids.
Heatmap encode_gaussian(double u_star, double v_star, const HeatmapModel& model,
                        int width, int height);

// Distribution-aware decoding: integer argmax (ties broken toward the
// smallest row-major index), then one Taylor step on the log-heatmap,
//   mu = m - H(m)^{-1} g(m),
// with g and H central finite differences of ln(value + epsilon) on the 3x3
// neighborhood of m. The step is clamped to +-clamp_radius per axis. Falls
// back to the argmax with valid=false when the peak sits on the border, the
// Hessian is not negative definite, or its conditioning is poor.
// Throws DecodeError on an all-zero heatmap.
DecodedKeypoint decode_dark(const Heatmap& hm, const DecodeConfig& config = {});

// Integer argmax baseline, same tie-break. Throws DecodeError on all-zero.
DecodedKeypoint decode_argmax(const Heatmap& hm);

// Gaussian-smooths the heatmap with the model's sigma and rescales so the
// maximum matches the input's maximum. Optional pre-step before decoding
// noisy heatmaps; off by default in the pipeline.
Heatmap modulate(const Heatmap& hm, const HeatmapModel& model);

}  // namespace rcal
