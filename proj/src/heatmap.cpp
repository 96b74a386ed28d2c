#include "rcal/heatmap.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "rcal/errors.hpp"

namespace rcal {

namespace {

constexpr double kPi = 3.14159265358979323846;

struct Peak {
  int u;
  int v;
  double value;
};

Peak find_peak(const Heatmap& hm) {
  const std::vector<double>& vals = hm.values();
  std::size_t best = 0;
  for (std::size_t i = 1; i < vals.size(); ++i) {
    if (vals[i] > vals[best]) {
      best = i;
    }
  }
  if (vals[best] <= 0.0) {
    throw DecodeError("heatmap has no peak (all values zero)");
  }
  const int w = hm.width();
  return {static_cast<int>(best % static_cast<std::size_t>(w)),
          static_cast<int>(best / static_cast<std::size_t>(w)), vals[best]};
}

}  // namespace

Heatmap::Heatmap(int width, int height) : width_(width), height_(height) {
  if (width < 5 || height < 5) {
    throw ParameterError("heatmap must be at least 5x5");
  }
  values_.assign(static_cast<std::size_t>(width) * height, 0.0);
}

void Heatmap::validate() const {
  for (const double v : values_) {
    if (!std::isfinite(v) || v < 0.0) {
      throw DataError("heatmap holds a negative or non-finite value");
    }
  }
}

Heatmap encode_gaussian(double u_star, double v_star, const HeatmapModel& model,
                        int width, int height) {
  if (!(model.sigma > 0.0)) {
    throw ParameterError("heatmap sigma must be positive");
  }
  Heatmap hm(width, height);
  const double inv2s2 = 1.0 / (2.0 * model.sigma * model.sigma);
  const double norm1d = 1.0 / std::sqrt(2.0 * kPi * model.sigma * model.sigma);
  // Separable: value(u, v) = gx[u] * gy[v].
  std::vector<double> gx(static_cast<std::size_t>(width));
  std::vector<double> gy(static_cast<std::size_t>(height));
  for (int u = 0; u < width; ++u) {
    const double du = u - u_star;
    gx[static_cast<std::size_t>(u)] = norm1d * std::exp(-du * du * inv2s2);
  }
  for (int v = 0; v < height; ++v) {
    const double dv = v - v_star;
    gy[static_cast<std::size_t>(v)] = norm1d * std::exp(-dv * dv * inv2s2);
  }
  for (int v = 0; v < height; ++v) {
    double* row = &hm.at(0, v);
    for (int u = 0; u < width; ++u) {
      row[u] = gx[static_cast<std::size_t>(u)] * gy[static_cast<std::size_t>(v)];
    }
  }
  return hm;
}

DecodedKeypoint decode_dark(const Heatmap& hm, const DecodeConfig& config) {
  const Peak peak = find_peak(hm);
  DecodedKeypoint out;
  out.peak_u = peak.u;
  out.peak_v = peak.v;
  out.peak_activation = peak.value;
  out.u = peak.u;
  out.v = peak.v;
  out.valid = false;

  if (peak.u == 0 || peak.u == hm.width() - 1 || peak.v == 0 ||
      peak.v == hm.height() - 1) {
    return out;  // no interior 3x3 neighborhood
  }

  // Log-heatmap on the 3x3 neighborhood of the peak.
  double p[3][3];
  for (int dv = -1; dv <= 1; ++dv) {
    for (int du = -1; du <= 1; ++du) {
      p[dv + 1][du + 1] =
          std::log(hm.at(peak.u + du, peak.v + dv) + config.epsilon);
    }
  }
  const double gu = (p[1][2] - p[1][0]) / 2.0;
  const double gv = (p[2][1] - p[0][1]) / 2.0;
  const double huu = p[1][2] - 2.0 * p[1][1] + p[1][0];
  const double hvv = p[2][1] - 2.0 * p[1][1] + p[0][1];
  const double huv = (p[2][2] - p[2][0] - p[0][2] + p[0][0]) / 4.0;

  // Eigenvalues of the symmetric 2x2 Hessian.
  const double tr = huu + hvv;
  const double det = huu * hvv - huv * huv;
  const double disc = std::sqrt(std::max(tr * tr / 4.0 - det, 0.0));
  const double lam1 = tr / 2.0 - disc;  // most negative
  const double lam2 = tr / 2.0 + disc;
  if (!(lam2 < -config.min_curvature)) {
    return out;  // not a strict local maximum of the log-surface
  }
  if (std::abs(lam1) > config.max_condition * std::abs(lam2)) {
    return out;  // ridge-like peak; Taylor step unreliable
  }

  // mu = m - H^{-1} g.
  const double inv_det = 1.0 / det;
  double step_u = -(hvv * gu - huv * gv) * inv_det;
  double step_v = -(-huv * gu + huu * gv) * inv_det;
  step_u = std::clamp(step_u, -config.clamp_radius, config.clamp_radius);
  step_v = std::clamp(step_v, -config.clamp_radius, config.clamp_radius);

  out.u = peak.u + step_u;
  out.v = peak.v + step_v;
  out.valid = true;
  return out;
}

DecodedKeypoint decode_argmax(const Heatmap& hm) {
  const Peak peak = find_peak(hm);
  DecodedKeypoint out;
  out.peak_u = peak.u;
  out.peak_v = peak.v;
  out.peak_activation = peak.value;
  out.u = peak.u;
  out.v = peak.v;
  out.valid = true;
  return out;
}

Heatmap modulate(const Heatmap& hm, const HeatmapModel& model) {
  if (!(model.sigma > 0.0)) {
    throw ParameterError("heatmap sigma must be positive");
  }
  const double max_in = *std::max_element(hm.values().begin(), hm.values().end());
  if (max_in <= 0.0) {
    return hm;
  }

  const int radius = static_cast<int>(std::ceil(3.0 * model.sigma));
  std::vector<double> kernel(static_cast<std::size_t>(2 * radius + 1));
  double ksum = 0.0;
  for (int i = -radius; i <= radius; ++i) {
    const double k = std::exp(-(i * i) / (2.0 * model.sigma * model.sigma));
    kernel[static_cast<std::size_t>(i + radius)] = k;
    ksum += k;
  }
  for (double& k : kernel) {
    k /= ksum;
  }

  const int w = hm.width();
  const int h = hm.height();
  Heatmap tmp(w, h);
  for (int v = 0; v < h; ++v) {  // rows
    for (int u = 0; u < w; ++u) {
      double acc = 0.0;
      for (int i = -radius; i <= radius; ++i) {
        const int uu = u + i;
        if (uu >= 0 && uu < w) {
          acc += kernel[static_cast<std::size_t>(i + radius)] * hm.at(uu, v);
        }
      }
      tmp.at(u, v) = acc;
    }
  }
  Heatmap out(w, h);
  for (int v = 0; v < h; ++v) {  // columns
    for (int u = 0; u < w; ++u) {
      double acc = 0.0;
      for (int i = -radius; i <= radius; ++i) {
        const int vv = v + i;
        if (vv >= 0 && vv < h) {
          acc += kernel[static_cast<std::size_t>(i + radius)] * tmp.at(u, vv);
        }
      }
      out.at(u, v) = acc;
    }
  }

  const double max_out =
      *std::max_element(out.values().begin(), out.values().end());
  if (max_out > 0.0) {
    const double rescale = max_in / max_out;
    for (double& v : out.values()) {
      v *= rescale;
    }
  }
  return out;
}

}  // namespace rcal
