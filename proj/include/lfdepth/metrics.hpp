#pragma once

#include <array>
#include <utility>
#include <vector>

#include "lfdepth/core.hpp"

namespace lfd {

// Bad-pixel error thresholds reported throughout.
inline constexpr std::array<double, 3> kBadPixelThresholds{0.01, 0.03, 0.07};

struct AccuracyReport {
  double mse_x100 = 0.0;
  std::array<double, 3> bad_pct{};  // aligned with kBadPixelThresholds
  long n_evaluated = 0;
};

// Mean squared error times one hundred over the mask. A null mask means all
// pixels valid in both maps. Throws InputError on an empty mask.
double mse_x100(const DepthMap& est, const DepthMap& gt, const MaskImage* mask = nullptr);

// Percentage of pixels with |est - gt| strictly above the threshold.
double bad_pixels(const DepthMap& est, const DepthMap& gt, double threshold,
                  const MaskImage* mask = nullptr);

AccuracyReport evaluate_accuracy(const DepthMap& est, const DepthMap& gt,
                                 const MaskImage* mask = nullptr);

struct ConsistencyReport {
  GrayImage per_pixel;   // population variance of warped depths; NaN where < 2 views land
  double mean = 0.0;     // average over pixels with >= 2 contributing views
  int n_views = 0;
  long n_pixels = 0;     // pixels entering the mean
};

// Warps every view's depth map onto the target view with its own disparities
// (forward warp, larger disparity wins collisions) and measures the per-pixel
// population variance of the values that land.
ConsistencyReport view_consistency(const std::vector<DepthMap>& maps,
                                   const std::vector<std::pair<int, int>>& views,
                                   std::pair<int, int> target, int threads = 1);

}  // namespace lfd
