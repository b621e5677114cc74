#include "lfdepth/reproject.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>

#include "lfdepth/errors.hpp"
#include "lfdepth/parallel.hpp"

namespace lfd {

namespace {

float weighted_median_at(const DepthMap& depth, const ColorImage& guide, int y, int x,
                         int radius, float eps, std::vector<std::pair<float, float>>& scratch) {
  scratch.clear();
  const Vec3f& ref = guide.at(y, x);
  double total = 0.0;
  for (int dy = -radius; dy <= radius; ++dy) {
    const int yy = y + dy;
    if (yy < 0 || yy >= depth.rows()) continue;
    for (int dx = -radius; dx <= radius; ++dx) {
      const int xx = x + dx;
      if (xx < 0 || xx >= depth.cols()) continue;
      if (!depth.valid_at(yy, xx)) continue;
      const Vec3f& c = guide.at(yy, xx);
      const float dr = c[0] - ref[0], dg = c[1] - ref[1], db = c[2] - ref[2];
      const float w = 1.0f / (dr * dr + dg * dg + db * db + eps);
      scratch.emplace_back(depth.at(yy, xx), w);
      total += w;
    }
  }
  std::sort(scratch.begin(), scratch.end());
  double acc = 0.0;
  for (const auto& [d, w] : scratch) {
    acc += w;
    if (acc >= 0.5 * total) return d;
  }
  return scratch.back().first;
}

}  // namespace

DepthMap sharpen_depth(const DepthMap& depth, const ColorImage& guide, int radius, float eps) {
  return sharpen_depth_omp(depth, guide, radius, eps, 1);
}

DepthMap sharpen_depth_omp(const DepthMap& depth, const ColorImage& guide, int radius, float eps,
                           int threads) {
  if (depth.rows() != guide.rows || depth.cols() != guide.cols) {
    throw InputError("depth and guide must have the same shape");
  }
  DepthMap out(depth.rows(), depth.cols());
  for_each_index(depth.rows(), threads, [&](int y) {
    std::vector<std::pair<float, float>> scratch;
    scratch.reserve(static_cast<size_t>(2 * radius + 1) * (2 * radius + 1));
    for (int x = 0; x < depth.cols(); ++x) {
      if (!depth.valid_at(y, x)) continue;
      out.set(y, x, weighted_median_at(depth, guide, y, x, radius, eps, scratch));
    }
  });
  return out;
}

WarpResult warp_depth(const DepthMap& src, int src_u, int src_v, int dst_u, int dst_v) {
  const int du = dst_u - src_u;
  const int dv = dst_v - src_v;
  WarpResult out;
  out.depth = DepthMap(src.rows(), src.cols());
  out.hit_count = Grid<int>(src.rows(), src.cols(), 0);
  for (int y = 0; y < src.rows(); ++y) {
    for (int x = 0; x < src.cols(); ++x) {
      if (!src.valid_at(y, x)) continue;
      const float d = src.at(y, x);
      const int xd = static_cast<int>(std::lround(x + d * static_cast<float>(dv)));
      const int yd = static_cast<int>(std::lround(y + d * static_cast<float>(du)));
      if (xd < 0 || xd >= src.cols() || yd < 0 || yd >= src.rows()) continue;
      int& hits = out.hit_count.at(yd, xd);
      if (hits == 0 || d > out.depth.at(yd, xd)) out.depth.set(yd, xd, d);
      ++hits;
    }
  }
  return out;
}

std::vector<WarpResult> warp_center_along(const DepthMap& center, const LfShape& shape,
                                          EpiOrientation orientation) {
  const int a_count = orientation == EpiOrientation::Horizontal ? shape.views_v : shape.views_u;
  const int a_c = orientation == EpiOrientation::Horizontal ? shape.center_v() : shape.center_u();
  std::vector<WarpResult> warps(a_count);
  for (int a = 0; a < a_count; ++a) {
    if (orientation == EpiOrientation::Horizontal) {
      warps[a] = warp_depth(center, shape.center_u(), a_c, shape.center_u(), a);
    } else {
      warps[a] = warp_depth(center, a_c, shape.center_v(), a, shape.center_v());
    }
  }
  return warps;
}

GrayImage assemble_depth_epi_from(const std::vector<WarpResult>& warps, const DepthMap& center,
                                  const LfShape& shape, EpiOrientation orientation,
                                  int fixed_spatial) {
  const bool horizontal = orientation == EpiOrientation::Horizontal;
  const int a_count = horizontal ? shape.views_v : shape.views_u;
  const int a_c = horizontal ? shape.center_v() : shape.center_u();
  const int s_count = horizontal ? shape.width : shape.height;

  GrayImage epi(a_count, s_count, std::numeric_limits<float>::quiet_NaN());
  for (int a = 0; a < a_count; ++a) {
    const DepthMap& m = a == a_c ? center : warps[a].depth;
    for (int s = 0; s < s_count; ++s) {
      const int y = horizontal ? fixed_spatial : s;
      const int x = horizontal ? s : fixed_spatial;
      if (m.valid_at(y, x)) epi.at(a, s) = m.at(y, x);
    }
  }
  return epi;
}

GrayImage assemble_depth_epi(const DepthMap& center, const LfShape& shape,
                             EpiOrientation orientation, int fixed_spatial) {
  return assemble_depth_epi_from(warp_center_along(center, shape, orientation), center, shape,
                                 orientation, fixed_spatial);
}

DepthMap synthesize_noncrosshair(const DepthMap& horizontal_map, int h_u, int h_v,
                                 const DepthMap& vertical_map, int v_u, int v_v, int target_u,
                                 int target_v, const GrayImage& target_intensity,
                                 float lambda_center, const DiffusionParams& params) {
  const WarpResult wh = warp_depth(horizontal_map, h_u, h_v, target_u, target_v);
  const WarpResult wv = warp_depth(vertical_map, v_u, v_v, target_u, target_v);

  DepthMap merged(horizontal_map.rows(), horizontal_map.cols());
  bool any_hole = false;
  for (int y = 0; y < merged.rows(); ++y) {
    for (int x = 0; x < merged.cols(); ++x) {
      const bool hv = wh.depth.valid_at(y, x);
      const bool vv = wv.depth.valid_at(y, x);
      if (hv && vv) {
        const float a = wh.depth.at(y, x), b = wv.depth.at(y, x);
        merged.set(y, x, std::abs(a - b) > 0.5f ? std::max(a, b) : 0.5f * (a + b));
      } else if (hv) {
        merged.set(y, x, wh.depth.at(y, x));
      } else if (vv) {
        merged.set(y, x, wv.depth.at(y, x));
      } else {
        any_hole = true;
      }
    }
  }
  if (!any_hole) return merged;

  GrayImage with_holes(merged.rows(), merged.cols(), std::numeric_limits<float>::quiet_NaN());
  for (int y = 0; y < merged.rows(); ++y) {
    for (int x = 0; x < merged.cols(); ++x) {
      if (merged.valid_at(y, x)) with_holes.at(y, x) = merged.at(y, x);
    }
  }
  GrayImage filled = diffuse_epi(with_holes, target_intensity, {}, lambda_center, params);
  DepthMap out(merged.rows(), merged.cols());
  for (int y = 0; y < merged.rows(); ++y) {
    for (int x = 0; x < merged.cols(); ++x) out.set(y, x, filled.at(y, x));
  }
  return out;
}

}  // namespace lfd
