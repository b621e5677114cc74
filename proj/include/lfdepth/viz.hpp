#pragma once

#include "lfdepth/core.hpp"

namespace lfd {

// Maps values in [lo, hi] onto a viridis-style monotone-luminance ramp.
// Invalid pixels render as magenta (255, 0, 255).
ColorImage render_heatmap(const DepthMap& map, float lo, float hi);

// |est - gt| rendered the same way; pixels invalid in either map are magenta.
ColorImage render_error_heatmap(const DepthMap& est, const DepthMap& gt, float lo, float hi);

// Finite value range of a map; falls back to (0, 1) when nothing is valid.
std::pair<float, float> value_range(const DepthMap& map);

}  // namespace lfd
