// Test-only reference implementations, kept independent of the library code
// paths they check.
#pragma once

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <random>
#include <string>
#include <vector>

#include "lfdepth/core.hpp"
#include "lfdepth/diffusion.hpp"

namespace oracle {

// Dense Gaussian elimination with partial pivoting.
inline std::vector<double> dense_solve(const lfd::SparseSystem& sys) {
  const int n = sys.n;
  std::vector<double> a(static_cast<size_t>(n) * (n + 1), 0.0);
  auto at = [&](int r, int c) -> double& { return a[static_cast<size_t>(r) * (n + 1) + c]; };
  for (int i = 0; i < n; ++i) {
    for (int k = sys.row_ptr[i]; k < sys.row_ptr[i + 1]; ++k) at(i, sys.col_idx[k]) = sys.val[k];
    at(i, n) = sys.rhs[i];
  }
  for (int col = 0; col < n; ++col) {
    int pivot = col;
    for (int r = col + 1; r < n; ++r) {
      if (std::abs(at(r, col)) > std::abs(at(pivot, col))) pivot = r;
    }
    if (pivot != col) {
      for (int c = col; c <= n; ++c) std::swap(at(col, c), at(pivot, c));
    }
    const double p = at(col, col);
    for (int r = col + 1; r < n; ++r) {
      const double f = at(r, col) / p;
      if (f == 0.0) continue;
      for (int c = col; c <= n; ++c) at(r, c) -= f * at(col, c);
    }
  }
  std::vector<double> x(n);
  for (int r = n - 1; r >= 0; --r) {
    double sum = at(r, n);
    for (int c = r + 1; c < n; ++c) sum -= at(r, c) * x[c];
    x[r] = sum / at(r, r);
  }
  return x;
}

inline double rel_l2_diff(const std::vector<double>& a, const std::vector<double>& b) {
  double num = 0.0, den = 0.0;
  for (size_t i = 0; i < a.size(); ++i) {
    num += (a[i] - b[i]) * (a[i] - b[i]);
    den += b[i] * b[i];
  }
  return den > 0.0 ? std::sqrt(num / den) : std::sqrt(num);
}

// Total energy of the quadratic objective for a candidate labeling.
inline double energy_of(const lfd::WeightMaps& w, const std::vector<double>& values) {
  const int rows = w.lambda_data.rows, cols = w.lambda_data.cols;
  auto val = [&](int y, int x) { return values[static_cast<size_t>(y) * cols + x]; };
  double e = 0.0;
  for (int y = 0; y < rows; ++y) {
    for (int x = 0; x < cols; ++x) {
      const double ld = w.lambda_data.at(y, x);
      if (ld > 0.0) {
        const double diff = val(y, x) - w.target.at(y, x);
        e += ld * diff * diff;
      }
      if (x + 1 < cols) {
        const double diff = val(y, x) - val(y, x + 1);
        e += w.lambda_right.at(y, x) * diff * diff;
      }
      if (y + 1 < rows) {
        const double diff = val(y, x) - val(y + 1, x);
        e += w.lambda_down.at(y, x) * diff * diff;
      }
    }
  }
  return e;
}

// Kahan-compensated two-pass MSE reference.
inline double mse_x100_kahan(const lfd::DepthMap& est, const lfd::DepthMap& gt) {
  double sum = 0.0, comp = 0.0;
  long n = 0;
  for (int y = 0; y < est.rows(); ++y) {
    for (int x = 0; x < est.cols(); ++x) {
      if (!est.valid_at(y, x) || !gt.valid_at(y, x)) continue;
      const double d = static_cast<double>(est.at(y, x)) - gt.at(y, x);
      const double term = d * d - comp;
      const double next = sum + term;
      comp = (next - sum) - term;
      sum = next;
      ++n;
    }
  }
  return 100.0 * sum / static_cast<double>(n);
}

// Analytic EPI with a single antialiased step edge along s(a) = s0 + d*(a-a_c):
// pixel value is the coverage of the bright side.
inline lfd::Epi step_edge_epi(int a_count, int s_count, float d, float s0, float lo = 0.2f,
                              float hi = 0.8f) {
  lfd::Epi epi;
  epi.data = lfd::GrayImage(a_count, s_count);
  epi.center_row = (a_count - 1) / 2;
  for (int a = 0; a < a_count; ++a) {
    const float edge = s0 + d * static_cast<float>(a - epi.center_row);
    for (int s = 0; s < s_count; ++s) {
      const float cover = std::clamp(static_cast<float>(s) + 0.5f - edge, 0.0f, 1.0f);
      epi.data.at(a, s) = lo + cover * (hi - lo);
    }
  }
  return epi;
}

// Brute-force slope estimate: scan a fine slope grid, score each candidate by
// the squared alignment error of every row against the center row, pick the
// minimizer. Independent of the oriented filter bank.
inline float brute_force_slope(const lfd::GrayImage& epi, int a_c, float d_min, float d_max,
                               float step = 0.01f) {
  float best_d = d_min;
  double best_err = std::numeric_limits<double>::infinity();
  for (float d = d_min; d <= d_max + 1e-6f; d += step) {
    double err = 0.0;
    long n = 0;
    for (int a = 0; a < epi.rows; ++a) {
      const float shift = d * static_cast<float>(a - a_c);
      for (int s = 0; s < epi.cols; ++s) {
        const float sp = static_cast<float>(s) + shift;
        if (sp < 0.0f || sp > static_cast<float>(epi.cols - 1)) continue;
        const double diff = lfd::sample_row(epi, a, sp) - epi.at(a_c, s);
        err += diff * diff;
        ++n;
      }
    }
    if (n > 0) err /= static_cast<double>(n);
    if (n > 0 && err < best_err) {
      best_err = err;
      best_d = d;
    }
  }
  return best_d;
}

struct TempDir {
  std::filesystem::path path;
  explicit TempDir(const std::string& tag) {
    path = std::filesystem::temp_directory_path() /
           (tag + "_" + std::to_string(std::random_device{}()));
    std::filesystem::create_directories(path);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path, ec);
  }
};

inline bool bits_equal(float a, float b) {
  uint32_t ua, ub;
  std::memcpy(&ua, &a, 4);
  std::memcpy(&ub, &b, 4);
  return ua == ub;
}

inline bool maps_bit_equal(const lfd::DepthMap& a, const lfd::DepthMap& b) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) return false;
  for (size_t i = 0; i < a.disp.data.size(); ++i) {
    if (a.valid.data[i] != b.valid.data[i]) return false;
    if (a.valid.data[i] && !bits_equal(a.disp.data[i], b.disp.data[i])) return false;
  }
  return true;
}

}  // namespace oracle
