#include "lfdepth/pipeline.hpp"

#include <fmt/format.h>

#include <chrono>

#include "lfdepth/errors.hpp"
#include "lfdepth/parallel.hpp"
#include "lfdepth/reproject.hpp"

namespace lfd {

namespace {

class StageScope {
 public:
  StageScope(std::string name, RunStats* stats, const ProgressFn& progress)
      : name_(std::move(name)), stats_(stats), progress_(progress),
        start_(std::chrono::steady_clock::now()) {
    if (progress_) progress_(name_, 0.0f);
  }
  ~StageScope() {
    const double secs =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
    if (stats_) stats_->timings.push_back({name_, secs});
    if (progress_) progress_(name_, 1.0f);
  }

 private:
  std::string name_;
  RunStats* stats_;
  const ProgressFn& progress_;
  std::chrono::steady_clock::time_point start_;
};

std::vector<SparseLabel> labels_in_epi_coords(const EpiFeatures& features,
                                              EpiOrientation orientation) {
  std::vector<SparseLabel> out;
  out.reserve(features.labels.size());
  for (const SparseLabel& l : features.labels) {
    SparseLabel e = l;
    if (orientation == EpiOrientation::Horizontal) {
      e.y = l.view_v;  // angular row
      e.x = l.x;
    } else {
      e.y = l.view_u;
      e.x = l.y;
    }
    out.push_back(e);
  }
  return out;
}

}  // namespace

EpiFeatures extract_epi_features(const Epi& epi, const LfShape& shape, const SlopeSet& slopes,
                                 const PipelineConfig& cfg) {
  const EdgeDetectParams detect_params{cfg.edge_threshold, 4};
  const EdgeMap edges = detect_epi_edges(epi, slopes, detect_params);
  EpiFeatures features;
  features.lines = fit_epi_lines(epi, edges, slopes, detect_params);
  if (features.lines.empty()) return features;

  const GradientField grad = epi_gradient(epi);
  const VisibilityParams vis_params{cfg.tau_v, cfg.grad_floor};
  for (EpiLine& line : features.lines) {
    line.visibility = line_visibility(grad, line, epi.center_row, vis_params);
  }
  features.labels = offset_and_weight(epi, features.lines, shape, cfg.lambda_center);
  return features;
}

std::vector<EpiFeatures> extract_all_features(const LightField& lf, const PipelineConfig& cfg,
                                              RunStats* stats, const ProgressFn& progress) {
  StageScope stage("edges", stats, progress);
  const LfShape shape = lf.shape();
  const SlopeSet slopes = cfg.slopes(lf.disparity_min, lf.disparity_max);
  const int n = lf.height + lf.width;
  std::vector<EpiFeatures> features(n);
  for_each_index(n, resolve_threads(cfg.threads), [&](int i) {
    const bool horizontal = i < lf.height;
    const Epi epi = horizontal ? extract_epi(lf, EpiOrientation::Horizontal, i)
                               : extract_epi(lf, EpiOrientation::Vertical, i - lf.height);
    features[i] = extract_epi_features(epi, shape, slopes, cfg);
  });
  if (stats) {
    for (const EpiFeatures& f : features) {
      stats->n_lines += static_cast<long>(f.lines.size());
      stats->n_guide_labels += static_cast<long>(f.labels.size());
    }
  }
  return features;
}

namespace {

DepthMap diffuse_center(const LightField& lf, const PipelineConfig& cfg,
                        const std::vector<EpiFeatures>& features, RunStats* stats,
                        const ProgressFn& progress) {
  std::vector<SparseLabel> center_labels;
  for (const EpiFeatures& f : features) {
    for (const SparseLabel& l : f.labels) {
      if (l.view_u == lf.center_u() && l.view_v == lf.center_v()) center_labels.push_back(l);
    }
  }
  if (center_labels.empty()) throw PipelineError("no depth edges detected");
  if (stats) stats->n_center_labels = static_cast<long>(center_labels.size());

  StageScope stage("center_diffusion", stats, progress);
  return diffuse_grid(lf.gray_view(lf.center_u(), lf.center_v()), center_labels, cfg.diffusion());
}

DepthMapSet crosshair_from_center(const LightField& lf, const PipelineConfig& cfg,
                                  const std::vector<EpiFeatures>& features,
                                  const DepthMap& center_raw, RunStats* stats,
                                  const ProgressFn& progress) {
  const LfShape shape = lf.shape();
  const int threads = resolve_threads(cfg.threads);

  DepthMap sharp;
  {
    StageScope stage("sharpen", stats, progress);
    sharp = sharpen_depth_omp(center_raw, lf.view(lf.center_u(), lf.center_v()), cfg.wmf_radius,
                              cfg.wmf_eps, threads);
  }

  StageScope stage("angular_inpaint", stats, progress);
  const DiffusionParams diff = cfg.diffusion();

  // horizontal slices complete the (u_c, *) views, vertical slices the (*, v_c) views
  std::vector<DepthMap> row_maps(lf.views_v), col_maps(lf.views_u);
  for (auto& m : row_maps) m = DepthMap(lf.height, lf.width);
  for (auto& m : col_maps) m = DepthMap(lf.height, lf.width);

  const auto warps_h = warp_center_along(sharp, shape, EpiOrientation::Horizontal);
  const auto warps_v = warp_center_along(sharp, shape, EpiOrientation::Vertical);

  for_each_index(lf.height, threads, [&](int t) {
    const Epi intensity = extract_epi(lf, EpiOrientation::Horizontal, t);
    const GrayImage depth_epi =
        assemble_depth_epi_from(warps_h, sharp, shape, EpiOrientation::Horizontal, t);
    const auto guides = labels_in_epi_coords(features[t], EpiOrientation::Horizontal);
    const GrayImage completed =
        diffuse_epi(depth_epi, intensity.data, guides, cfg.lambda_center, diff);
    for (int a = 0; a < lf.views_v; ++a) {
      for (int x = 0; x < lf.width; ++x) row_maps[a].set(t, x, completed.at(a, x));
    }
  });
  for_each_index(lf.width, threads, [&](int s) {
    const Epi intensity = extract_epi(lf, EpiOrientation::Vertical, s);
    const GrayImage depth_epi =
        assemble_depth_epi_from(warps_v, sharp, shape, EpiOrientation::Vertical, s);
    const auto guides = labels_in_epi_coords(features[lf.height + s], EpiOrientation::Vertical);
    const GrayImage completed =
        diffuse_epi(depth_epi, intensity.data, guides, cfg.lambda_center, diff);
    for (int a = 0; a < lf.views_u; ++a) {
      for (int y = 0; y < lf.height; ++y) col_maps[a].set(y, s, completed.at(a, y));
    }
  });

  DepthMapSet maps;
  for (int v = 0; v < lf.views_v; ++v) maps[{lf.center_u(), v}] = std::move(row_maps[v]);
  for (int u = 0; u < lf.views_u; ++u) {
    if (u != lf.center_u()) maps[{u, lf.center_v()}] = std::move(col_maps[u]);
  }
  maps[{lf.center_u(), lf.center_v()}] = std::move(sharp);
  return maps;
}

DepthMapSet all_from_crosshair(const LightField& lf, const PipelineConfig& cfg,
                               DepthMapSet crosshair, RunStats* stats,
                               const ProgressFn& progress) {
  StageScope stage("noncrosshair", stats, progress);
  const DiffusionParams diff = cfg.diffusion();
  const int threads = resolve_threads(cfg.threads);

  std::vector<ViewKey> targets;
  for (int u = 0; u < lf.views_u; ++u) {
    for (int v = 0; v < lf.views_v; ++v) {
      if (u != lf.center_u() && v != lf.center_v()) targets.push_back({u, v});
    }
  }
  std::vector<DepthMap> synthesized(targets.size());
  for_each_index(static_cast<int>(targets.size()), threads, [&](int i) {
    const auto [u, v] = targets[i];
    synthesized[i] = synthesize_noncrosshair(
        crosshair.at({lf.center_u(), v}), lf.center_u(), v, crosshair.at({u, lf.center_v()}), u,
        lf.center_v(), u, v, lf.gray_view(u, v), cfg.lambda_center, diff);
  });

  DepthMapSet maps = std::move(crosshair);
  for (size_t i = 0; i < targets.size(); ++i) maps[targets[i]] = std::move(synthesized[i]);
  return maps;
}

}  // namespace

DepthMap estimate_center(const LightField& lf, const PipelineConfig& cfg, RunStats* stats,
                         const ProgressFn& progress) {
  const auto features = extract_all_features(lf, cfg, stats, progress);
  return diffuse_center(lf, cfg, features, stats, progress);
}

DepthMapSet estimate_crosshair(const LightField& lf, const PipelineConfig& cfg, RunStats* stats,
                               const ProgressFn& progress) {
  const auto features = extract_all_features(lf, cfg, stats, progress);
  const DepthMap center = diffuse_center(lf, cfg, features, stats, progress);
  return crosshair_from_center(lf, cfg, features, center, stats, progress);
}

DepthMapSet estimate_all(const LightField& lf, const PipelineConfig& cfg, RunStats* stats,
                         const ProgressFn& progress) {
  const auto features = extract_all_features(lf, cfg, stats, progress);
  const DepthMap center = diffuse_center(lf, cfg, features, stats, progress);
  DepthMapSet crosshair = crosshair_from_center(lf, cfg, features, center, stats, progress);
  return all_from_crosshair(lf, cfg, std::move(crosshair), stats, progress);
}

}  // namespace lfd
