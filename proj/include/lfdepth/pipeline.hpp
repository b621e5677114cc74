#pragma once

#include <functional>
#include <map>
#include <numbers>
#include <string>
#include <vector>

#include "lfdepth/core.hpp"
#include "lfdepth/diffusion.hpp"
#include "lfdepth/edges.hpp"

namespace lfd {

enum class ViewsMode { Center, Crosshair, All };

struct PipelineConfig {
  float tau_v = std::numbers::pi_v<float> / 13.0f;  // visibility cone
  float grad_floor = 1e-3f;
  float smooth_c = 0.1f;       // smoothness weight numerator
  float smooth_eps = 1e-4f;    // smoothness weight regularizer
  float lambda_center = 15.0f; // data weight of reprojected center depth
  int wmf_radius = 7;
  float wmf_eps = 1e-6f;
  float edge_threshold = 0.1f;
  float slope_step = 0.05f;
  double solver_tol = 1e-6;
  int solver_max_iter = 0;  // <= 0: 10*sqrt(n) + 200
  ViewsMode views_mode = ViewsMode::All;
  int threads = 0;  // <= 0: all hardware threads

  DiffusionParams diffusion() const {
    return {smooth_c, smooth_eps, solver_tol, solver_max_iter};
  }
  SlopeSet slopes(float d_min, float d_max) const { return {d_min, d_max, slope_step}; }
};

struct StageTiming {
  std::string stage;
  double seconds = 0.0;
};

struct RunStats {
  long n_lines = 0;
  long n_guide_labels = 0;
  long n_center_labels = 0;
  std::vector<StageTiming> timings;
};

// (stage name, fraction complete in [0,1])
using ProgressFn = std::function<void(const std::string&, float)>;

using ViewKey = std::pair<int, int>;
using DepthMapSet = std::map<ViewKey, DepthMap>;

// All fitted lines and guide labels of one EPI slice.
struct EpiFeatures {
  std::vector<EpiLine> lines;
  std::vector<SparseLabel> labels;  // view/pixel coordinates
};

// Detect + fit + visibility + offsetting for one EPI.
EpiFeatures extract_epi_features(const Epi& epi, const LfShape& shape, const SlopeSet& slopes,
                                 const PipelineConfig& cfg);

// Features of every crosshair EPI; index [0, H) are horizontal slices (by image
// row), [H, H+W) vertical slices (by image column). Deterministic for any
// thread count.
std::vector<EpiFeatures> extract_all_features(const LightField& lf, const PipelineConfig& cfg,
                                              RunStats* stats = nullptr,
                                              const ProgressFn& progress = {});

// Sparse edge depths diffused over the center view. Throws PipelineError when
// no depth edges are detected.
DepthMap estimate_center(const LightField& lf, const PipelineConfig& cfg,
                         RunStats* stats = nullptr, const ProgressFn& progress = {});

// View-consistent maps for all U+V-1 crosshair views: sharpen the center map,
// reproject it along each axis, and complete the depth EPIs by angular
// diffusion with line guides.
DepthMapSet estimate_crosshair(const LightField& lf, const PipelineConfig& cfg,
                               RunStats* stats = nullptr, const ProgressFn& progress = {});

// Full U*V grid; views outside the crosshair come from the two nearest
// crosshair maps. Every returned map is complete.
DepthMapSet estimate_all(const LightField& lf, const PipelineConfig& cfg,
                         RunStats* stats = nullptr, const ProgressFn& progress = {});

}  // namespace lfd
