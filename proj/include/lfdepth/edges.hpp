#pragma once

#include <numbers>
#include <span>
#include <vector>

#include "lfdepth/core.hpp"
#include "lfdepth/edges_types.hpp"

namespace lfd {

// Discretized slope candidates covering a disparity range. The grid extends one
// step past each end so peaks at the range boundary still get a parabolic
// refinement; fitted slopes are clamped back to [d_min, d_max].
struct SlopeSet {
  float d_min = -2.0f;
  float d_max = 2.0f;
  float step = 0.05f;

  int count() const {
    return static_cast<int>(std::lround((d_max - d_min) / step)) + 3;
  }
  float at(int k) const { return d_min + step * static_cast<float>(k - 1); }
};

struct EdgeDetectParams {
  float threshold = 0.1f;  // fraction of the max response kept after NMS
  int profile_half = 4;    // oriented step profile spans 2*half+1 spatial taps
};

struct EdgeMap {
  GrayImage response;  // max normalized correlation magnitude over orientations
  MaskImage mask;      // non-maximum-suppressed response above the threshold
};

// Oriented full-angular-height edge filter bank. Each orientation correlates a
// step profile across a candidate line; the response is a zero-normalized
// cross-correlation in [0,1].
EdgeMap detect_epi_edges(const Epi& epi, const SlopeSet& slopes,
                         const EdgeDetectParams& params = {});

// Signed normalized correlation of the step profile along the line
// s(a) = s0 + d*(a - center_row). Out-of-image taps are excluded.
float line_correlation(const GrayImage& epi, float s0, float d, int center_row,
                       int profile_half = 4);

// Fits a parametric line through every mask pixel: slope by maximizing the
// summed oriented response over the slope set, then parabolic interpolation;
// anchor refined to subpixel by a quadratic fit over the spatial response.
// Near-duplicate candidates from different angular rows collapse to the
// strongest. Visibility is left empty.
std::vector<EpiLine> fit_epi_lines(const Epi& epi, const EdgeMap& edges, const SlopeSet& slopes,
                                   const EdgeDetectParams& params = {});

struct VisibilityParams {
  float tau_v = std::numbers::pi_v<float> / 13.0f;
  float grad_floor = 1e-3f;  // samples with |grad I| below this are not visible
};

// Per-view visibility: a sample is visible when the local image gradient aligns
// with the line normal within tau_v. The normal is oriented by the line's edge
// polarity so the test is signed. Out-of-image samples are not visible.
std::vector<uint8_t> line_visibility(const Epi& epi, const EpiLine& line,
                                     const VisibilityParams& params = {});
std::vector<uint8_t> line_visibility(const GradientField& grad, const EpiLine& line,
                                     int center_row, const VisibilityParams& params = {});

// Emits one label per visible line sample, displaced by one pixel along the
// spatial image-gradient direction so it lies on the surface the edge bounds.
// omega_e = clamp(response / median response, 0, 1) * data_weight_cap; samples
// whose displaced pixel leaves the image are dropped. Labels are in view/pixel
// coordinates derived from the EPI geometry. Also fills each line's `weight`.
std::vector<SparseLabel> offset_and_weight(const Epi& epi, std::vector<EpiLine>& lines,
                                           const LfShape& shape,
                                           float data_weight_cap = 15.0f);

// Labels whose sample at the center angular row is visible, i.e. the subset of
// `labels` that lands in the center view.
std::vector<SparseLabel> center_view_labels(std::span<const SparseLabel> labels,
                                            const LfShape& shape);

}  // namespace lfd
