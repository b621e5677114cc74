#pragma once

#include <array>
#include <cassert>
#include <cmath>
#include <cstdint>
#include <vector>

namespace lfd {

using Vec3f = std::array<float, 3>;

// Row-major 2D array. at(y, x): y is the row, x the column.
template <typename T>
struct Grid {
  int rows = 0;
  int cols = 0;
  std::vector<T> data;

  Grid() = default;
  Grid(int rows_, int cols_, T fill = T{})
      : rows(rows_), cols(cols_), data(static_cast<size_t>(rows_) * cols_, fill) {}

  bool empty() const { return data.empty(); }
  size_t size() const { return data.size(); }
  bool in_bounds(int y, int x) const { return y >= 0 && y < rows && x >= 0 && x < cols; }

  T& at(int y, int x) {
    assert(in_bounds(y, x));
    return data[static_cast<size_t>(y) * cols + x];
  }
  const T& at(int y, int x) const {
    assert(in_bounds(y, x));
    return data[static_cast<size_t>(y) * cols + x];
  }

  bool same_shape(const Grid& o) const { return rows == o.rows && cols == o.cols; }
};

using GrayImage = Grid<float>;
using ColorImage = Grid<Vec3f>;
using MaskImage = Grid<uint8_t>;

// Rec.601 luma.
inline float luma(const Vec3f& c) {
  return 0.299f * c[0] + 0.587f * c[1] + 0.114f * c[2];
}

inline GrayImage to_gray(const ColorImage& img) {
  GrayImage out(img.rows, img.cols);
  for (size_t i = 0; i < img.data.size(); ++i) out.data[i] = luma(img.data[i]);
  return out;
}

// Bilinear sample along x at an integer row; x clamped to the valid range by the caller.
inline float sample_row(const GrayImage& img, int y, float x) {
  int x0 = static_cast<int>(std::floor(x));
  if (x0 >= img.cols - 1) return img.at(y, img.cols - 1);
  if (x0 < 0) return img.at(y, 0);
  float f = x - static_cast<float>(x0);
  return (1.0f - f) * img.at(y, x0) + f * img.at(y, x0 + 1);
}

}  // namespace lfd
