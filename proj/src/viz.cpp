#include "lfdepth/viz.hpp"

#include <algorithm>
#include <cmath>

#include "lfdepth/errors.hpp"

namespace lfd {

namespace {

// viridis anchors, interpolated linearly
constexpr int kAnchors = 9;
constexpr float kRamp[kAnchors][3] = {
    {0.267f, 0.005f, 0.329f}, {0.283f, 0.141f, 0.458f}, {0.254f, 0.265f, 0.530f},
    {0.207f, 0.372f, 0.553f}, {0.164f, 0.471f, 0.558f}, {0.128f, 0.567f, 0.551f},
    {0.135f, 0.659f, 0.518f}, {0.478f, 0.821f, 0.318f}, {0.993f, 0.906f, 0.144f}};

Vec3f ramp_color(float t) {
  t = std::clamp(t, 0.0f, 1.0f);
  const float pos = t * static_cast<float>(kAnchors - 1);
  const int i = std::min(static_cast<int>(pos), kAnchors - 2);
  const float f = pos - static_cast<float>(i);
  return {(1 - f) * kRamp[i][0] + f * kRamp[i + 1][0],
          (1 - f) * kRamp[i][1] + f * kRamp[i + 1][1],
          (1 - f) * kRamp[i][2] + f * kRamp[i + 1][2]};
}

constexpr Vec3f kInvalidColor{1.0f, 0.0f, 1.0f};

}  // namespace

std::pair<float, float> value_range(const DepthMap& map) {
  float lo = std::numeric_limits<float>::infinity();
  float hi = -std::numeric_limits<float>::infinity();
  for (int y = 0; y < map.rows(); ++y) {
    for (int x = 0; x < map.cols(); ++x) {
      if (!map.valid_at(y, x)) continue;
      lo = std::min(lo, map.at(y, x));
      hi = std::max(hi, map.at(y, x));
    }
  }
  if (!(lo <= hi)) return {0.0f, 1.0f};
  return {lo, hi};
}

ColorImage render_heatmap(const DepthMap& map, float lo, float hi) {
  if (lo >= hi) throw InputError("heatmap range must satisfy lo < hi");
  ColorImage out(map.rows(), map.cols());
  const float scale = 1.0f / (hi - lo);
  for (int y = 0; y < map.rows(); ++y) {
    for (int x = 0; x < map.cols(); ++x) {
      out.at(y, x) = map.valid_at(y, x) ? ramp_color((map.at(y, x) - lo) * scale) : kInvalidColor;
    }
  }
  return out;
}

ColorImage render_error_heatmap(const DepthMap& est, const DepthMap& gt, float lo, float hi) {
  if (est.rows() != gt.rows() || est.cols() != gt.cols()) {
    throw InputError("error heatmap needs maps of identical size");
  }
  DepthMap err(est.rows(), est.cols());
  for (int y = 0; y < est.rows(); ++y) {
    for (int x = 0; x < est.cols(); ++x) {
      if (est.valid_at(y, x) && gt.valid_at(y, x)) {
        err.set(y, x, std::abs(est.at(y, x) - gt.at(y, x)));
      }
    }
  }
  return render_heatmap(err, lo, hi);
}

}  // namespace lfd
