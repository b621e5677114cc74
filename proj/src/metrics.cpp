#include "lfdepth/metrics.hpp"

#include <fmt/format.h>

#include <cmath>

#include "lfdepth/errors.hpp"
#include "lfdepth/parallel.hpp"
#include "lfdepth/reproject.hpp"

namespace lfd {

namespace {

void check_congruent(const DepthMap& est, const DepthMap& gt, const MaskImage* mask) {
  if (est.rows() != gt.rows() || est.cols() != gt.cols()) {
    throw InputError(fmt::format("map dims differ: {}x{} vs {}x{}", est.cols(), est.rows(),
                                 gt.cols(), gt.rows()));
  }
  if (mask && (mask->rows != est.rows() || mask->cols != est.cols())) {
    throw InputError("mask dims differ from maps");
  }
}

template <typename Fn>
long for_masked(const DepthMap& est, const DepthMap& gt, const MaskImage* mask, Fn&& fn) {
  long n = 0;
  for (int y = 0; y < est.rows(); ++y) {
    for (int x = 0; x < est.cols(); ++x) {
      if (mask && !mask->at(y, x)) continue;
      if (!est.valid_at(y, x) || !gt.valid_at(y, x)) {
        if (mask) throw InputError("mask selects a pixel invalid in est or gt");
        continue;
      }
      fn(est.at(y, x), gt.at(y, x));
      ++n;
    }
  }
  if (n == 0) throw InputError("empty evaluation mask");
  return n;
}

}  // namespace

double mse_x100(const DepthMap& est, const DepthMap& gt, const MaskImage* mask) {
  check_congruent(est, gt, mask);
  double sum = 0.0;
  const long n = for_masked(est, gt, mask, [&](float e, float g) {
    const double diff = static_cast<double>(e) - static_cast<double>(g);
    sum += diff * diff;
  });
  return 100.0 * sum / static_cast<double>(n);
}

double bad_pixels(const DepthMap& est, const DepthMap& gt, double threshold,
                  const MaskImage* mask) {
  if (threshold <= 0.0) throw InputError("bad-pixel threshold must be positive");
  check_congruent(est, gt, mask);
  long bad = 0;
  const long n = for_masked(est, gt, mask, [&](float e, float g) {
    if (std::abs(static_cast<double>(e) - static_cast<double>(g)) > threshold) ++bad;
  });
  return 100.0 * static_cast<double>(bad) / static_cast<double>(n);
}

AccuracyReport evaluate_accuracy(const DepthMap& est, const DepthMap& gt, const MaskImage* mask) {
  AccuracyReport r;
  r.mse_x100 = mse_x100(est, gt, mask);
  for (size_t i = 0; i < kBadPixelThresholds.size(); ++i) {
    r.bad_pct[i] = bad_pixels(est, gt, kBadPixelThresholds[i], mask);
  }
  long n = 0;
  for (int y = 0; y < est.rows(); ++y) {
    for (int x = 0; x < est.cols(); ++x) {
      if (mask && !mask->at(y, x)) continue;
      if (est.valid_at(y, x) && gt.valid_at(y, x)) ++n;
    }
  }
  r.n_evaluated = n;
  return r;
}

ConsistencyReport view_consistency(const std::vector<DepthMap>& maps,
                                   const std::vector<std::pair<int, int>>& views,
                                   std::pair<int, int> target, int threads) {
  if (maps.size() != views.size()) throw InputError("one view coordinate per map required");
  if (maps.size() < 2) throw InputError("view consistency needs at least 2 views");
  const int rows = maps.front().rows(), cols = maps.front().cols();
  for (const DepthMap& m : maps) {
    if (m.rows() != rows || m.cols() != cols) throw InputError("maps must share dimensions");
  }

  std::vector<DepthMap> warped(maps.size());
  for_each_index(static_cast<int>(maps.size()), threads, [&](int i) {
    warped[i] =
        warp_depth(maps[i], views[i].first, views[i].second, target.first, target.second).depth;
  });

  ConsistencyReport report;
  report.n_views = static_cast<int>(maps.size());
  report.per_pixel = GrayImage(rows, cols, std::numeric_limits<float>::quiet_NaN());
  double total = 0.0;
  long n_pixels = 0;
  for (int y = 0; y < rows; ++y) {
    for (int x = 0; x < cols; ++x) {
      int n = 0;
      double mean = 0.0;
      for (const DepthMap& w : warped) {
        if (w.valid_at(y, x)) {
          mean += w.at(y, x);
          ++n;
        }
      }
      if (n < 2) continue;
      mean /= n;
      double var = 0.0;
      for (const DepthMap& w : warped) {
        if (w.valid_at(y, x)) {
          const double diff = w.at(y, x) - mean;
          var += diff * diff;
        }
      }
      var /= n;
      report.per_pixel.at(y, x) = static_cast<float>(var);
      total += var;
      ++n_pixels;
    }
  }
  if (n_pixels == 0) throw InputError("no pixel received two or more views");
  report.mean = total / static_cast<double>(n_pixels);
  report.n_pixels = n_pixels;
  return report;
}

}  // namespace lfd
