#pragma once

#include <span>
#include <vector>

#include "lfdepth/core.hpp"
#include "lfdepth/edges_types.hpp"

namespace lfd {

// Parameters of the quadratic diffusion energy
//   E(D) = sum_p lambda_d(p) (D(p) - D_o(p))^2
//        + sum_{(p,q) in S} lambda_s(p,q) (D(p) - D(q))^2
// over the 4-connected neighbor set S, each undirected edge counted once.
struct DiffusionParams {
  float smooth_c = 0.1f;     // c in lambda_s = c / (|grad I| + eps)
  float smooth_eps = 1e-4f;  // eps above; with I in [0,1] this caps lambda_s at c/eps
  double tol = 1e-6;         // relative residual ||Ax-b|| / ||b||
  int max_iter = 0;          // <= 0 means 10*sqrt(n) + 200
};

// Per-pixel data weights/targets plus per-edge smoothness weights for one grid.
// Edge weights are symmetric: the gradient magnitude entering lambda_s is the
// mean of the two endpoint magnitudes, so mirrored inputs build mirrored systems.
struct WeightMaps {
  GrayImage lambda_data;    // >= 0
  GrayImage target;         // D_o; meaningful where lambda_data > 0
  GrayImage lambda_right;   // edge (y,x)-(y,x+1); column cols-1 unused
  GrayImage lambda_down;    // edge (y,x)-(y+1,x); row rows-1 unused
};

// Smoothness weights from an intensity grid per lambda_s = c / (|grad I| + eps).
WeightMaps make_weight_maps(const GrayImage& intensity, float smooth_c, float smooth_eps);

// Accumulates a data label: lambda_data += w, target becomes the weighted mean
// of all labels on the pixel.
void add_label(WeightMaps& w, int y, int x, float d, float weight);

// Normal equations of the energy in compressed sparse row form. Unknowns are
// pixels in row-major order (index = y * cols + x); at most 5 nonzeros per row.
struct SparseSystem {
  int grid_rows = 0;
  int grid_cols = 0;
  int n = 0;
  std::vector<int> row_ptr;
  std::vector<int> col_idx;
  std::vector<double> val;
  std::vector<double> rhs;

  int index(int y, int x) const { return y * grid_cols + x; }
};

// Throws SolverError if no pixel carries a data weight (solution would only be
// defined up to a constant).
SparseSystem build_system(const WeightMaps& weights);

struct SolveStats {
  int iterations = 0;
  double residual = 0.0;     // final relative residual
  bool used_jacobi = false;  // incomplete Cholesky broke down
};

// Preconditioned conjugate gradient, incomplete-Cholesky(0) preconditioner with
// Jacobi fallback. Deterministic: a given system always runs the same FLOP
// sequence. Throws SolverError on non-convergence, carrying the final residual.
std::vector<double> solve(const SparseSystem& system, double tol = 1e-6, int max_iter = 0,
                          SolveStats* stats = nullptr);

// Diffuses sparse labels over an intensity grid; returns a fully valid map.
DepthMap diffuse_grid(const GrayImage& intensity, std::span<const SparseLabel> labels,
                      const DiffusionParams& params);

// Completes a depth EPI: valid pixels of depth_epi become data terms at weight
// lambda_center, NaN holes get weight 0, and line-guide labels (already in EPI
// coordinates: y = angular row, x = spatial) add their own weights. Every row
// of the result is one view's depth along this slice, which is what makes the
// output view-consistent by construction.
GrayImage diffuse_epi(const GrayImage& depth_epi, const GrayImage& intensity_epi,
                      std::span<const SparseLabel> guides, float lambda_center,
                      const DiffusionParams& params);

}  // namespace lfd
