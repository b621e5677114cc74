#pragma once

#include <limits>
#include <string>
#include <utility>
#include <vector>

#include "lfdepth/grid.hpp"

namespace lfd {

// Disparity convention used everywhere: a scene point at spatial position s in
// view a0 of an EPI appears at s + d * (a - a0) in view a. In image terms a
// point at (x, y) seen from view (u, v) appears at (x + d*(v' - v), y + d*(u' - u))
// in view (u', v').
constexpr int kDisparitySign = +1;

struct LfShape {
  int views_u = 0;  // angular rows (u)
  int views_v = 0;  // angular cols (v)
  int height = 0;
  int width = 0;
  int center_u() const { return (views_u - 1) / 2; }
  int center_v() const { return (views_v - 1) / 2; }
};

struct LightField {
  int views_u = 0;
  int views_v = 0;
  int height = 0;
  int width = 0;
  std::vector<ColorImage> rgb;   // index u * views_v + v
  std::vector<GrayImage> gray;   // Rec.601 luma of rgb, same indexing
  std::string name;
  float disparity_min = -2.0f;
  float disparity_max = 2.0f;

  int center_u() const { return (views_u - 1) / 2; }
  int center_v() const { return (views_v - 1) / 2; }
  LfShape shape() const { return {views_u, views_v, height, width}; }

  const ColorImage& view(int u, int v) const { return rgb[static_cast<size_t>(u) * views_v + v]; }
  const GrayImage& gray_view(int u, int v) const { return gray[static_cast<size_t>(u) * views_v + v]; }
};

// Builds a light field from a U x V grid of views (index u*views_v + v), computing
// the luma channel. Throws InputError if the angular counts are not odd and >= 3
// or the views disagree in size.
LightField make_lightfield(std::vector<ColorImage> views, int views_u, int views_v,
                           std::string name = {}, float disparity_min = -2.0f,
                           float disparity_max = 2.0f);

enum class EpiOrientation { Horizontal, Vertical };

// One angular-by-spatial slice of the light field, A rows by S columns.
// Horizontal: row a = gray[u_c][a] restricted to image row `fixed_spatial`, S = W.
// Vertical:   row a = gray[a][v_c] restricted to image column `fixed_spatial`, S = H.
struct Epi {
  GrayImage data;
  EpiOrientation orientation = EpiOrientation::Horizontal;
  int fixed_angular = 0;   // the held angular index (u_c or v_c)
  int fixed_spatial = 0;   // image row t (horizontal) or column s (vertical)
  int center_row = 0;      // angular index of the center view within `data`

  int angular() const { return data.rows; }
  int spatial() const { return data.cols; }
};

Epi extract_epi(const LightField& lf, EpiOrientation orientation, int fixed_spatial);

struct GradientField {
  GrayImage gx;  // d/dx (columns); spatial axis for an EPI
  GrayImage gy;  // d/dy (rows); angular axis for an EPI
};

// Central differences in the interior, one-sided at borders.
GradientField image_gradient(const GrayImage& img);
GradientField epi_gradient(const Epi& epi);

// The central row and column of the angular grid: (u_c, v) for all v, then
// (u, v_c) for all u != u_c. Length U + V - 1.
std::vector<std::pair<int, int>> crosshair_views(const LfShape& shape);
inline std::vector<std::pair<int, int>> crosshair_views(const LightField& lf) {
  return crosshair_views(lf.shape());
}

// Dense disparity with validity mask. Invalid pixels hold NaN; consumers branch
// on the mask, never on the sentinel.
struct DepthMap {
  Grid<float> disp;
  MaskImage valid;

  DepthMap() = default;
  DepthMap(int rows, int cols)
      : disp(rows, cols, std::numeric_limits<float>::quiet_NaN()), valid(rows, cols, 0) {}

  static DepthMap constant(int rows, int cols, float value) {
    DepthMap m(rows, cols);
    std::fill(m.disp.data.begin(), m.disp.data.end(), value);
    std::fill(m.valid.data.begin(), m.valid.data.end(), uint8_t{1});
    return m;
  }

  int rows() const { return disp.rows; }
  int cols() const { return disp.cols; }
  bool valid_at(int y, int x) const { return valid.at(y, x) != 0; }
  float at(int y, int x) const { return disp.at(y, x); }
  void set(int y, int x, float d) {
    disp.at(y, x) = d;
    valid.at(y, x) = 1;
  }
  void clear(int y, int x) {
    disp.at(y, x) = std::numeric_limits<float>::quiet_NaN();
    valid.at(y, x) = 0;
  }
  size_t count_valid() const {
    size_t n = 0;
    for (uint8_t v : valid.data) n += v != 0;
    return n;
  }
  bool all_valid() const { return count_valid() == valid.size(); }
};

}  // namespace lfd
