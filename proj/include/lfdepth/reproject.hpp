#pragma once

#include <vector>

#include "lfdepth/core.hpp"
#include "lfdepth/diffusion.hpp"

namespace lfd {

// Guided weighted median filter over a (2r+1)^2 window; the weight of a
// neighbor q is 1 / (||I(p) - I(q)||^2 + eps). Snaps smeared depth edges back
// onto guide-image edges before reprojection. Serial reference implementation.
DepthMap sharpen_depth(const DepthMap& depth, const ColorImage& guide, int radius = 7,
                       float eps = 1e-6f);

// OpenMP kernel, bit-identical to sharpen_depth for any thread count.
DepthMap sharpen_depth_omp(const DepthMap& depth, const ColorImage& guide, int radius,
                           float eps, int threads);

struct WarpResult {
  DepthMap depth;       // holes where nothing landed
  Grid<int> hit_count;  // valid(p) <=> hit_count(p) >= 1
};

// Forward-warps each valid source pixel to
//   x' = x + d * (v_dst - v_src),  y' = y + d * (u_dst - u_src),
// splatting to the nearest integer pixel. Colliding pixels keep the larger
// disparity (the nearer surface); exact ties keep the first pixel in row-major
// scan order. Out-of-bounds splats are dropped.
WarpResult warp_depth(const DepthMap& src, int src_u, int src_v, int dst_u, int dst_v);

// Depth EPI for one slice: row center_row is copied from `center`, every other
// angular row is the corresponding warped row; holes are NaN.
GrayImage assemble_depth_epi(const DepthMap& center, const LfShape& shape,
                             EpiOrientation orientation, int fixed_spatial);

// Same, from warps precomputed once per angular index (warps[a] = center view
// warped to crosshair view a along `orientation`).
GrayImage assemble_depth_epi_from(const std::vector<WarpResult>& warps, const DepthMap& center,
                                  const LfShape& shape, EpiOrientation orientation,
                                  int fixed_spatial);

// Warps the center-view map to every crosshair view along one axis; index a is
// the varying angular coordinate. warps[center] is an identity copy.
std::vector<WarpResult> warp_center_along(const DepthMap& center, const LfShape& shape,
                                          EpiOrientation orientation);

// Depth for a view outside the crosshair: warp the two nearest crosshair maps,
// average where both land (keeping the larger disparity when they disagree by
// more than 0.5, which signals an occlusion mismatch), take the valid one where
// only one lands, and fill remaining holes by intensity-guided diffusion.
DepthMap synthesize_noncrosshair(const DepthMap& horizontal_map, int h_u, int h_v,
                                 const DepthMap& vertical_map, int v_u, int v_v, int target_u,
                                 int target_v, const GrayImage& target_intensity,
                                 float lambda_center, const DiffusionParams& params);

}  // namespace lfd
