#include "lfdepth/diffusion.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>

#include "lfdepth/errors.hpp"

namespace lfd {

WeightMaps make_weight_maps(const GrayImage& intensity, float smooth_c, float smooth_eps) {
  GradientField g = image_gradient(intensity);
  const int rows = intensity.rows, cols = intensity.cols;
  GrayImage mag(rows, cols);
  for (size_t i = 0; i < mag.data.size(); ++i) {
    mag.data[i] = std::hypot(g.gx.data[i], g.gy.data[i]);
  }

  WeightMaps w;
  w.lambda_data = GrayImage(rows, cols, 0.0f);
  w.target = GrayImage(rows, cols, 0.0f);
  w.lambda_right = GrayImage(rows, cols, 0.0f);
  w.lambda_down = GrayImage(rows, cols, 0.0f);
  for (int y = 0; y < rows; ++y) {
    for (int x = 0; x < cols; ++x) {
      if (x + 1 < cols) {
        const float m = 0.5f * (mag.at(y, x) + mag.at(y, x + 1));
        w.lambda_right.at(y, x) = smooth_c / (m + smooth_eps);
      }
      if (y + 1 < rows) {
        const float m = 0.5f * (mag.at(y, x) + mag.at(y + 1, x));
        w.lambda_down.at(y, x) = smooth_c / (m + smooth_eps);
      }
    }
  }
  return w;
}

void add_label(WeightMaps& w, int y, int x, float d, float weight) {
  if (weight <= 0.0f) return;
  const float prev = w.lambda_data.at(y, x);
  const float total = prev + weight;
  w.target.at(y, x) = (prev * w.target.at(y, x) + weight * d) / total;
  w.lambda_data.at(y, x) = total;
}

SparseSystem build_system(const WeightMaps& weights) {
  const int rows = weights.lambda_data.rows, cols = weights.lambda_data.cols;
  const int n = rows * cols;
  bool any_data = false;
  for (float l : weights.lambda_data.data) {
    if (l > 0.0f) {
      any_data = true;
      break;
    }
  }
  if (!any_data) {
    throw SolverError("all data weights are zero; the system is singular up to a constant");
  }

  SparseSystem sys;
  sys.grid_rows = rows;
  sys.grid_cols = cols;
  sys.n = n;
  sys.row_ptr.reserve(n + 1);
  sys.row_ptr.push_back(0);
  sys.col_idx.reserve(static_cast<size_t>(n) * 5);
  sys.val.reserve(static_cast<size_t>(n) * 5);
  sys.rhs.resize(n);

  auto edge_weight = [&](int y, int x, int y2, int x2) -> double {
    if (y2 == y) return weights.lambda_right.at(y, std::min(x, x2));
    return weights.lambda_down.at(std::min(y, y2), x);
  };

  for (int y = 0; y < rows; ++y) {
    for (int x = 0; x < cols; ++x) {
      const int p = y * cols + x;
      double diag = weights.lambda_data.at(y, x);
      sys.rhs[p] = static_cast<double>(weights.lambda_data.at(y, x)) * weights.target.at(y, x);

      // columns in ascending order: up, left, diag, right, down
      const int neighbors[4][2] = {{y - 1, x}, {y, x - 1}, {y, x + 1}, {y + 1, x}};
      double offdiag[4];
      bool present[4];
      for (int k = 0; k < 4; ++k) {
        const int ny = neighbors[k][0], nx = neighbors[k][1];
        present[k] = ny >= 0 && ny < rows && nx >= 0 && nx < cols;
        if (present[k]) {
          offdiag[k] = edge_weight(y, x, ny, nx);
          diag += offdiag[k];
        }
      }
      for (int k = 0; k < 2; ++k) {
        if (present[k]) {
          sys.col_idx.push_back(neighbors[k][0] * cols + neighbors[k][1]);
          sys.val.push_back(-offdiag[k]);
        }
      }
      sys.col_idx.push_back(p);
      sys.val.push_back(diag);
      for (int k = 2; k < 4; ++k) {
        if (present[k]) {
          sys.col_idx.push_back(neighbors[k][0] * cols + neighbors[k][1]);
          sys.val.push_back(-offdiag[k]);
        }
      }
      sys.row_ptr.push_back(static_cast<int>(sys.col_idx.size()));
    }
  }
  return sys;
}

namespace {

// Lower-triangular CSR factor (diagonal included) plus its transpose for the
// backward sweep.
struct IcFactor {
  std::vector<int> row_ptr, col_idx;
  std::vector<double> val;
  std::vector<int> t_row_ptr, t_col_idx;
  std::vector<double> t_val;
  std::vector<double> diag;  // L(i,i)
  bool ok = false;
};

IcFactor ic0_factor(const SparseSystem& a) {
  const int n = a.n;
  IcFactor f;
  f.row_ptr.assign(n + 1, 0);
  f.diag.assign(n, 0.0);

  // sparsity of tril(A)
  for (int i = 0; i < n; ++i) {
    int cnt = 0;
    for (int k = a.row_ptr[i]; k < a.row_ptr[i + 1]; ++k) {
      if (a.col_idx[k] <= i) ++cnt;
    }
    f.row_ptr[i + 1] = f.row_ptr[i] + cnt;
  }
  f.col_idx.resize(f.row_ptr[n]);
  f.val.resize(f.row_ptr[n]);
  for (int i = 0; i < n; ++i) {
    int w = f.row_ptr[i];
    for (int k = a.row_ptr[i]; k < a.row_ptr[i + 1]; ++k) {
      if (a.col_idx[k] <= i) {
        f.col_idx[w] = a.col_idx[k];
        f.val[w] = a.val[k];
        ++w;
      }
    }
  }

  for (int i = 0; i < n; ++i) {
    const int ib = f.row_ptr[i], ie = f.row_ptr[i + 1];
    for (int ki = ib; ki < ie; ++ki) {
      const int j = f.col_idx[ki];
      // dot of rows i and j over shared columns < j
      double sum = f.val[ki];
      int pi = ib, pj = f.row_ptr[j];
      const int je = f.row_ptr[j + 1];
      while (pi < ki && pj < je - 1) {  // last entry of row j is its diagonal
        const int ci = f.col_idx[pi], cj = f.col_idx[pj];
        if (ci == cj) {
          sum -= f.val[pi] * f.val[pj];
          ++pi;
          ++pj;
        } else if (ci < cj) {
          ++pi;
        } else {
          ++pj;
        }
      }
      if (j == i) {
        if (sum <= 0.0) return f;  // breakdown; caller falls back to Jacobi
        f.val[ki] = std::sqrt(sum);
        f.diag[i] = f.val[ki];
      } else {
        f.val[ki] = sum / f.diag[j];
      }
    }
  }

  // transpose for the backward substitution
  f.t_row_ptr.assign(n + 1, 0);
  for (int k = 0; k < f.row_ptr[n]; ++k) ++f.t_row_ptr[f.col_idx[k] + 1];
  for (int i = 0; i < n; ++i) f.t_row_ptr[i + 1] += f.t_row_ptr[i];
  f.t_col_idx.resize(f.row_ptr[n]);
  f.t_val.resize(f.row_ptr[n]);
  std::vector<int> w(f.t_row_ptr.begin(), f.t_row_ptr.end() - 1);
  for (int i = 0; i < n; ++i) {
    for (int k = f.row_ptr[i]; k < f.row_ptr[i + 1]; ++k) {
      const int j = f.col_idx[k];
      f.t_col_idx[w[j]] = i;
      f.t_val[w[j]] = f.val[k];
      ++w[j];
    }
  }
  f.ok = true;
  return f;
}

// z = (L L^T)^{-1} r
void ic0_apply(const IcFactor& f, const std::vector<double>& r, std::vector<double>& y,
               std::vector<double>& z) {
  const int n = static_cast<int>(r.size());
  for (int i = 0; i < n; ++i) {
    double sum = r[i];
    const int ie = f.row_ptr[i + 1] - 1;  // diagonal is last
    for (int k = f.row_ptr[i]; k < ie; ++k) sum -= f.val[k] * y[f.col_idx[k]];
    y[i] = sum / f.diag[i];
  }
  for (int i = n - 1; i >= 0; --i) {
    double sum = y[i];
    const int ib = f.t_row_ptr[i];
    for (int k = f.t_row_ptr[i + 1] - 1; k > ib; --k) sum -= f.t_val[k] * z[f.t_col_idx[k]];
    z[i] = sum / f.diag[i];
  }
}

void spmv(const SparseSystem& a, const std::vector<double>& x, std::vector<double>& out) {
  for (int i = 0; i < a.n; ++i) {
    double sum = 0.0;
    for (int k = a.row_ptr[i]; k < a.row_ptr[i + 1]; ++k) sum += a.val[k] * x[a.col_idx[k]];
    out[i] = sum;
  }
}

double dot(const std::vector<double>& a, const std::vector<double>& b) {
  double s = 0.0;
  for (size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

}  // namespace

std::vector<double> solve(const SparseSystem& sys, double tol, int max_iter, SolveStats* stats) {
  const int n = sys.n;
  if (max_iter <= 0) max_iter = static_cast<int>(10.0 * std::sqrt(static_cast<double>(n))) + 200;

  const double norm_b = std::sqrt(dot(sys.rhs, sys.rhs));
  std::vector<double> x(n, 0.0);
  if (norm_b == 0.0) {
    if (stats) *stats = {0, 0.0, false};
    return x;
  }

  IcFactor ic = ic0_factor(sys);
  std::vector<double> inv_diag;
  if (!ic.ok) {
    inv_diag.resize(n);
    for (int i = 0; i < n; ++i) {
      double d = 0.0;
      for (int k = sys.row_ptr[i]; k < sys.row_ptr[i + 1]; ++k) {
        if (sys.col_idx[k] == i) d = sys.val[k];
      }
      inv_diag[i] = d > 0.0 ? 1.0 / d : 1.0;
    }
  }

  std::vector<double> r = sys.rhs;  // r = b - A*0
  std::vector<double> z(n), y(n), p(n), ap(n);
  auto precondition = [&](const std::vector<double>& rin, std::vector<double>& zout) {
    if (ic.ok) {
      ic0_apply(ic, rin, y, zout);
    } else {
      for (int i = 0; i < n; ++i) zout[i] = inv_diag[i] * rin[i];
    }
  };

  precondition(r, z);
  p = z;
  double rho = dot(r, z);
  double res = std::sqrt(dot(r, r)) / norm_b;
  int it = 0;
  while (res > tol && it < max_iter) {
    spmv(sys, p, ap);
    const double pap = dot(p, ap);
    if (pap <= 0.0) break;  // loss of positive definiteness in finite precision
    const double alpha = rho / pap;
    for (int i = 0; i < n; ++i) x[i] += alpha * p[i];
    for (int i = 0; i < n; ++i) r[i] -= alpha * ap[i];
    precondition(r, z);
    const double rho_next = dot(r, z);
    const double beta = rho_next / rho;
    rho = rho_next;
    for (int i = 0; i < n; ++i) p[i] = z[i] + beta * p[i];
    res = std::sqrt(dot(r, r)) / norm_b;
    ++it;
  }

  if (stats) *stats = {it, res, !ic.ok};
  if (res > tol) {
    throw SolverError(fmt::format(
        "conjugate gradient did not converge: residual {:.3e} after {} iterations (tol {:.1e})",
        res, it, tol));
  }
  return x;
}

DepthMap diffuse_grid(const GrayImage& intensity, std::span<const SparseLabel> labels,
                      const DiffusionParams& params) {
  WeightMaps w = make_weight_maps(intensity, params.smooth_c, params.smooth_eps);
  for (const SparseLabel& l : labels) {
    if (!w.lambda_data.in_bounds(l.y, l.x)) {
      throw InputError(fmt::format("label at ({}, {}) outside {}x{} grid", l.x, l.y,
                                   intensity.cols, intensity.rows));
    }
    add_label(w, l.y, l.x, l.d, l.weight);
  }
  SparseSystem sys = build_system(w);
  std::vector<double> sol = solve(sys, params.tol, params.max_iter);
  DepthMap out(intensity.rows, intensity.cols);
  for (int y = 0; y < intensity.rows; ++y) {
    for (int x = 0; x < intensity.cols; ++x) {
      out.set(y, x, static_cast<float>(sol[sys.index(y, x)]));
    }
  }
  return out;
}

GrayImage diffuse_epi(const GrayImage& depth_epi, const GrayImage& intensity_epi,
                      std::span<const SparseLabel> guides, float lambda_center,
                      const DiffusionParams& params) {
  if (!depth_epi.same_shape(intensity_epi)) {
    throw InputError("depth and intensity EPIs must have the same shape");
  }
  WeightMaps w = make_weight_maps(intensity_epi, params.smooth_c, params.smooth_eps);
  for (int y = 0; y < depth_epi.rows; ++y) {
    for (int x = 0; x < depth_epi.cols; ++x) {
      const float d = depth_epi.at(y, x);
      if (!std::isnan(d)) add_label(w, y, x, d, lambda_center);
    }
  }
  for (const SparseLabel& l : guides) {
    if (w.lambda_data.in_bounds(l.y, l.x)) add_label(w, l.y, l.x, l.d, l.weight);
  }
  SparseSystem sys = build_system(w);
  std::vector<double> sol = solve(sys, params.tol, params.max_iter);
  GrayImage out(depth_epi.rows, depth_epi.cols);
  for (int i = 0; i < sys.n; ++i) out.data[i] = static_cast<float>(sol[i]);
  return out;
}

}  // namespace lfd
