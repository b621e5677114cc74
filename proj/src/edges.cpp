#include "lfdepth/edges.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>

#include "lfdepth/errors.hpp"

namespace lfd {

namespace {

constexpr int kMinSamples = 12;
constexpr double kVarFloor = 1e-10;

float bilinear_row(const GrayImage& img, int y, float x) { return sample_row(img, y, x); }

}  // namespace

float line_correlation(const GrayImage& epi, float s0, float d, int center_row,
                       int profile_half) {
  const int a_count = epi.rows;
  const int s_max = epi.cols - 1;
  int m = 0;
  double si = 0.0, sii = 0.0, sw = 0.0, sww = 0.0, siw = 0.0;
  for (int a = 0; a < a_count; ++a) {
    const float base = s0 + d * static_cast<float>(a - center_row);
    for (int j = -profile_half; j <= profile_half; ++j) {
      const float s = base + static_cast<float>(j);
      if (s < 0.0f || s > static_cast<float>(s_max)) continue;
      const double value = bilinear_row(epi, a, s);
      const double w = j > 0 ? 1.0 : (j < 0 ? -1.0 : 0.0);
      ++m;
      si += value;
      sii += value * value;
      sw += w;
      sww += w * w;
      siw += value * w;
    }
  }
  if (m < kMinSamples) return 0.0f;
  const double var_i = sii - si * si / m;
  const double var_w = sww - sw * sw / m;
  if (var_i < kVarFloor || var_w < kVarFloor) return 0.0f;
  return static_cast<float>((siw - si * sw / m) / std::sqrt(var_i * var_w));
}

EdgeMap detect_epi_edges(const Epi& epi, const SlopeSet& slopes, const EdgeDetectParams& params) {
  const int a_count = epi.angular();
  const int s_count = epi.spatial();
  if (a_count < 3) throw InputError(fmt::format("EPI needs >= 3 angular rows, got {}", a_count));
  const int a_c = epi.center_row;
  const int k_count = slopes.count();

  const float max_abs_slope = std::max(std::abs(slopes.at(0)), std::abs(slopes.at(k_count - 1)));
  const int reach = std::max(a_count - 1 - a_c, a_c);
  const int pad = static_cast<int>(std::ceil(max_abs_slope * static_cast<float>(reach))) + 1;
  const int s_ext = s_count + 2 * pad;

  // response of every candidate line, anchored at the center row
  std::vector<float> stack(static_cast<size_t>(k_count) * s_ext);
  for (int k = 0; k < k_count; ++k) {
    const float d = slopes.at(k);
    for (int i = 0; i < s_ext; ++i) {
      stack[static_cast<size_t>(k) * s_ext + i] =
          line_correlation(epi.data, static_cast<float>(i - pad), d, a_c, params.profile_half);
    }
  }

  EdgeMap out;
  out.response = GrayImage(a_count, s_count, 0.0f);
  out.mask = MaskImage(a_count, s_count, 0);
  for (int a = 0; a < a_count; ++a) {
    for (int s = 0; s < s_count; ++s) {
      float best = 0.0f;
      for (int k = 0; k < k_count; ++k) {
        // anchor of the line with slope d_k passing through (a, s)
        const float pos = static_cast<float>(s) - slopes.at(k) * static_cast<float>(a - a_c) +
                          static_cast<float>(pad);
        const int i0 = static_cast<int>(std::floor(pos));
        if (i0 < 0 || i0 >= s_ext - 1) continue;
        const float f = pos - static_cast<float>(i0);
        const float* row = stack.data() + static_cast<size_t>(k) * s_ext;
        const float r = std::abs((1.0f - f) * row[i0] + f * row[i0 + 1]);
        best = std::max(best, r);
      }
      out.response.at(a, s) = best;
    }
  }

  float global_max = 0.0f;
  for (float r : out.response.data) global_max = std::max(global_max, r);
  const float thresh = params.threshold * global_max;
  if (global_max <= 0.0f) return out;

  for (int a = 0; a < a_count; ++a) {
    for (int s = 0; s < s_count; ++s) {
      const float r = out.response.at(a, s);
      if (r < thresh || r <= 0.0f) continue;
      const float left = s > 0 ? out.response.at(a, s - 1) : -1.0f;
      const float right = s < s_count - 1 ? out.response.at(a, s + 1) : -1.0f;
      if (r >= left && r > right) out.mask.at(a, s) = 1;
    }
  }
  return out;
}

namespace {

// Peak offset of a parabola through (-1, ym), (0, y0), (+1, yp), clamped to
// half a sample.
float parabolic_offset(float ym, float y0, float yp) {
  const float denom = ym - 2.0f * y0 + yp;
  if (std::abs(denom) < 1e-12f) return 0.0f;
  return std::clamp(0.5f * (ym - yp) / denom, -0.5f, 0.5f);
}

}  // namespace

std::vector<EpiLine> fit_epi_lines(const Epi& epi, const EdgeMap& edges, const SlopeSet& slopes,
                                   const EdgeDetectParams& params) {
  const int a_c = epi.center_row;
  const int k_count = slopes.count();
  if (k_count < 3) throw InputError("empty disparity range");

  struct Candidate {
    float d, s0, response, polarity;
  };
  std::vector<Candidate> candidates;
  std::vector<float> score(k_count);

  for (int a = 0; a < epi.angular(); ++a) {
    for (int s = 0; s < epi.spatial(); ++s) {
      if (!edges.mask.at(a, s)) continue;
      int best_k = -1;
      float best_abs = 0.0f;
      for (int k = 0; k < k_count; ++k) {
        const float anchor = static_cast<float>(s) - slopes.at(k) * static_cast<float>(a - a_c);
        score[k] = line_correlation(epi.data, anchor, slopes.at(k), a_c, params.profile_half);
        if (std::abs(score[k]) > best_abs) {
          best_abs = std::abs(score[k]);
          best_k = k;
        }
      }
      if (best_k < 0 || best_abs <= 0.0f) continue;
      const int kc = std::clamp(best_k, 1, k_count - 2);
      const float dk = parabolic_offset(std::abs(score[kc - 1]), std::abs(score[kc]),
                                        std::abs(score[kc + 1]));
      float d = std::clamp(slopes.at(kc) + dk * slopes.step, slopes.d_min, slopes.d_max);

      // subpixel anchor from the spatial response at this angular row
      const float d_grid = slopes.at(best_k);
      auto spatial_score = [&](float ss) {
        const float anchor = ss - d_grid * static_cast<float>(a - a_c);
        return std::abs(line_correlation(epi.data, anchor, d_grid, a_c, params.profile_half));
      };
      const float q0 = best_abs;
      const float qm = spatial_score(static_cast<float>(s) - 1.0f);
      const float qp = spatial_score(static_cast<float>(s) + 1.0f);
      const float ds = parabolic_offset(qm, q0, qp);
      const float s0 = (static_cast<float>(s) + ds) - d * static_cast<float>(a - a_c);

      candidates.push_back({d, s0, best_abs, score[best_k] >= 0.0f ? 1.0f : -1.0f});
    }
  }

  // strongest candidate wins among near duplicates coming from other rows
  std::stable_sort(candidates.begin(), candidates.end(), [](const Candidate& a, const Candidate& b) {
    return a.response > b.response;
  });
  std::vector<EpiLine> lines;
  const float d_tol = 2.0f * slopes.step;
  for (const Candidate& c : candidates) {
    bool duplicate = false;
    for (const EpiLine& l : lines) {
      if (std::abs(l.d - c.d) <= d_tol && std::abs(l.s0 - c.s0) <= 1.0f) {
        duplicate = true;
        break;
      }
    }
    if (duplicate) continue;
    EpiLine line;
    line.d = c.d;
    line.s0 = c.s0;
    line.response = c.response;
    line.polarity = c.polarity;
    line.orientation = epi.orientation;
    line.fixed_spatial = epi.fixed_spatial;
    lines.push_back(line);
  }
  std::sort(lines.begin(), lines.end(), [](const EpiLine& a, const EpiLine& b) {
    return a.s0 != b.s0 ? a.s0 < b.s0 : a.d < b.d;
  });
  return lines;
}

std::vector<uint8_t> line_visibility(const GradientField& grad, const EpiLine& line,
                                     int center_row, const VisibilityParams& params) {
  const int a_count = grad.gx.rows;
  const int s_max = grad.gx.cols - 1;
  std::vector<uint8_t> vis(a_count, 0);

  const float inv_len = 1.0f / std::sqrt(1.0f + line.d * line.d);
  const float ns = inv_len;            // spatial component of the line normal
  const float na = -line.d * inv_len;  // angular component

  float polarity = line.polarity;
  if (polarity == 0.0f) {
    double acc = 0.0;
    for (int a = 0; a < a_count; ++a) {
      const float s = line.sample_pos(a, center_row);
      if (s < 0.0f || s > static_cast<float>(s_max)) continue;
      acc += bilinear_row(grad.gx, a, s) * ns + bilinear_row(grad.gy, a, s) * na;
    }
    polarity = acc >= 0.0 ? 1.0f : -1.0f;
  }

  const float cos_tau = std::cos(params.tau_v);
  for (int a = 0; a < a_count; ++a) {
    const float s = line.sample_pos(a, center_row);
    if (s < 0.0f || s > static_cast<float>(s_max)) continue;
    const float gx = bilinear_row(grad.gx, a, s);
    const float gy = bilinear_row(grad.gy, a, s);
    const float norm = std::hypot(gx, gy);
    if (norm < params.grad_floor) continue;
    const float cos_angle = polarity * (gx * ns + gy * na) / norm;
    vis[a] = cos_angle > cos_tau ? 1 : 0;
  }
  return vis;
}

std::vector<uint8_t> line_visibility(const Epi& epi, const EpiLine& line,
                                     const VisibilityParams& params) {
  return line_visibility(epi_gradient(epi), line, epi.center_row, params);
}

std::vector<SparseLabel> offset_and_weight(const Epi& epi, std::vector<EpiLine>& lines,
                                           const LfShape& shape, float data_weight_cap) {
  if (lines.empty()) return {};
  for (const EpiLine& line : lines) {
    if (line.visibility.size() != static_cast<size_t>(epi.angular())) {
      throw InputError("line visibility must be computed before offsetting");
    }
  }

  std::vector<float> responses;
  responses.reserve(lines.size());
  for (const EpiLine& line : lines) responses.push_back(line.response);
  std::sort(responses.begin(), responses.end());
  const size_t mid = responses.size() / 2;
  const float median = responses.size() % 2 == 1
                           ? responses[mid]
                           : 0.5f * (responses[mid - 1] + responses[mid]);

  const GradientField grad = epi_gradient(epi);
  const int s_count = epi.spatial();
  std::vector<SparseLabel> labels;
  for (EpiLine& line : lines) {
    const float omega =
        median > 0.0f ? std::clamp(line.response / median, 0.0f, 1.0f) * data_weight_cap : 0.0f;
    line.weight = omega;
    if (omega <= 0.0f) continue;
    for (int a = 0; a < epi.angular(); ++a) {
      if (!line.visibility[a]) continue;
      const float s = line.sample_pos(a, epi.center_row);
      const float gx = bilinear_row(grad.gx, a, s);
      const int sgn = gx >= 0.0f ? 1 : -1;
      const int s_label = static_cast<int>(std::lround(s)) + sgn;
      if (s_label < 0 || s_label >= s_count) continue;

      SparseLabel label;
      label.d = line.d;
      label.weight = omega;
      label.source = LabelSource::LineGuide;
      if (epi.orientation == EpiOrientation::Horizontal) {
        label.view_u = shape.center_u();
        label.view_v = a;
        label.x = s_label;
        label.y = epi.fixed_spatial;
      } else {
        label.view_u = a;
        label.view_v = shape.center_v();
        label.x = epi.fixed_spatial;
        label.y = s_label;
      }
      labels.push_back(label);
    }
  }
  return labels;
}

std::vector<SparseLabel> center_view_labels(std::span<const SparseLabel> labels,
                                            const LfShape& shape) {
  std::vector<SparseLabel> out;
  for (const SparseLabel& l : labels) {
    if (l.view_u == shape.center_u() && l.view_v == shape.center_v()) out.push_back(l);
  }
  return out;
}

}  // namespace lfd
