#include "lfdepth/core.hpp"

#include <fmt/format.h>

#include "lfdepth/errors.hpp"

namespace lfd {

LightField make_lightfield(std::vector<ColorImage> views, int views_u, int views_v,
                           std::string name, float disparity_min, float disparity_max) {
  if (views_u < 3 || views_v < 3 || views_u % 2 == 0 || views_v % 2 == 0) {
    throw InputError(fmt::format("angular counts must be odd and >= 3, got {} x {}", views_u, views_v));
  }
  if (views.size() != static_cast<size_t>(views_u) * views_v) {
    throw InputError(fmt::format("expected {} views, got {}", views_u * views_v, views.size()));
  }
  const int h = views.front().rows;
  const int w = views.front().cols;
  if (h <= 0 || w <= 0) throw InputError("views must be non-empty");
  for (size_t i = 0; i < views.size(); ++i) {
    if (views[i].rows != h || views[i].cols != w) {
      throw InputError(fmt::format("view {} is {}x{}, expected {}x{}", i, views[i].rows,
                                   views[i].cols, h, w));
    }
  }

  LightField lf;
  lf.views_u = views_u;
  lf.views_v = views_v;
  lf.height = h;
  lf.width = w;
  lf.rgb = std::move(views);
  lf.name = std::move(name);
  lf.disparity_min = disparity_min;
  lf.disparity_max = disparity_max;
  lf.gray.reserve(lf.rgb.size());
  for (const auto& v : lf.rgb) lf.gray.push_back(to_gray(v));
  return lf;
}

Epi extract_epi(const LightField& lf, EpiOrientation orientation, int fixed_spatial) {
  Epi epi;
  epi.orientation = orientation;
  epi.fixed_spatial = fixed_spatial;
  if (orientation == EpiOrientation::Horizontal) {
    if (fixed_spatial < 0 || fixed_spatial >= lf.height) {
      throw InputError(fmt::format("EPI row {} out of range [0,{})", fixed_spatial, lf.height));
    }
    epi.fixed_angular = lf.center_u();
    epi.center_row = lf.center_v();
    epi.data = GrayImage(lf.views_v, lf.width);
    for (int a = 0; a < lf.views_v; ++a) {
      const GrayImage& g = lf.gray_view(lf.center_u(), a);
      for (int s = 0; s < lf.width; ++s) epi.data.at(a, s) = g.at(fixed_spatial, s);
    }
  } else {
    if (fixed_spatial < 0 || fixed_spatial >= lf.width) {
      throw InputError(fmt::format("EPI column {} out of range [0,{})", fixed_spatial, lf.width));
    }
    epi.fixed_angular = lf.center_v();
    epi.center_row = lf.center_u();
    epi.data = GrayImage(lf.views_u, lf.height);
    for (int a = 0; a < lf.views_u; ++a) {
      const GrayImage& g = lf.gray_view(a, lf.center_v());
      for (int t = 0; t < lf.height; ++t) epi.data.at(a, t) = g.at(t, fixed_spatial);
    }
  }
  return epi;
}

GradientField image_gradient(const GrayImage& img) {
  if (img.rows < 1 || img.cols < 1 || (img.rows < 2 && img.cols < 2)) {
    throw InputError(fmt::format("gradient undefined for a {}x{} grid", img.rows, img.cols));
  }
  // gradient along a size-1 axis is zero
  GradientField g{GrayImage(img.rows, img.cols, 0.0f), GrayImage(img.rows, img.cols, 0.0f)};
  for (int y = 0; y < img.rows; ++y) {
    for (int x = 0; x < img.cols; ++x) {
      if (img.cols >= 2) {
        if (x == 0) {
          g.gx.at(y, x) = img.at(y, 1) - img.at(y, 0);
        } else if (x == img.cols - 1) {
          g.gx.at(y, x) = img.at(y, x) - img.at(y, x - 1);
        } else {
          g.gx.at(y, x) = 0.5f * (img.at(y, x + 1) - img.at(y, x - 1));
        }
      }
      if (img.rows >= 2) {
        if (y == 0) {
          g.gy.at(y, x) = img.at(1, x) - img.at(0, x);
        } else if (y == img.rows - 1) {
          g.gy.at(y, x) = img.at(y, x) - img.at(y - 1, x);
        } else {
          g.gy.at(y, x) = 0.5f * (img.at(y + 1, x) - img.at(y - 1, x));
        }
      }
    }
  }
  return g;
}

GradientField epi_gradient(const Epi& epi) {
  if (epi.data.rows < 2 || epi.data.cols < 2) {
    throw InputError(fmt::format("degenerate {}x{} EPI", epi.data.rows, epi.data.cols));
  }
  return image_gradient(epi.data);
}

std::vector<std::pair<int, int>> crosshair_views(const LfShape& shape) {
  std::vector<std::pair<int, int>> views;
  views.reserve(shape.views_u + shape.views_v - 1);
  for (int v = 0; v < shape.views_v; ++v) views.emplace_back(shape.center_u(), v);
  for (int u = 0; u < shape.views_u; ++u) {
    if (u != shape.center_u()) views.emplace_back(u, shape.center_v());
  }
  return views;
}

}  // namespace lfd
