#pragma once

#include <cstdint>
#include <vector>

#include "lfdepth/core.hpp"

namespace lfd {

// A parametric scene-point edge in an EPI. The sample position in angular row a
// is s(a) = s0 + d * (a - center_row); only within-image samples are scored.
// Visibility at the center row is not required: lines occluded in the center
// view are kept, they are the whole point of tracking edges in EPI space.
struct EpiLine {
  float d = 0.0f;        // disparity (px per view step) = line slope
  float s0 = 0.0f;       // subpixel spatial anchor at the center angular row
  float response = 0.0f; // peak oriented-filter response in [0,1]
  float weight = 0.0f;   // edge-importance weight omega_e, set by offset_and_weight
  float polarity = 0.0f; // sign of the intensity step along the line normal
  std::vector<uint8_t> visibility;  // length A; empty until computed
  EpiOrientation orientation = EpiOrientation::Horizontal;
  int fixed_spatial = 0;

  float sample_pos(int a, int center_row) const {
    return s0 + d * static_cast<float>(a - center_row);
  }
};

enum class LabelSource : uint8_t { Reprojected, LineGuide };

// One sparse depth label: a pixel in a specific view with a disparity value and
// a data weight.
struct SparseLabel {
  int view_u = 0;
  int view_v = 0;
  int x = 0;
  int y = 0;
  float d = 0.0f;
  float weight = 0.0f;
  LabelSource source = LabelSource::LineGuide;
};

}  // namespace lfd
