#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "lfdepth/core.hpp"

namespace lfd {

// Layered fronto-parallel test scenes. Each layer is a plane at constant
// disparity carrying a procedural texture; every view is rendered by shifting
// the layer per the disparity convention and compositing front over back, so
// per-view ground truth and occlusion geometry are exact.

enum class TextureKind { Checker, Noise, Gradient };

struct TextureSpec {
  TextureKind kind = TextureKind::Checker;
  int scale = 8;        // cell size in pixels
  uint64_t seed = 0;
  float lo = 0.2f;      // value range; emitted values are quantized to the 8-bit grid
  float hi = 0.8f;
};

struct LayerSpec {
  float disparity = 0.0f;
  TextureSpec texture;
  // Extent in the reference (center) view; nullopt = infinite plane. Only the
  // background layer may be infinite, and must be.
  std::optional<std::array<int, 4>> rect;  // x, y, w, h
};

struct SceneSpec {
  std::string name = "scene";
  std::vector<LayerSpec> layers;  // back to front; layers[0] is the background
  float blur_sigma = 0.0f;        // optical blur applied per view after compositing
  bool subpixel = false;          // bilinear texture sampling for fractional shifts

  void validate() const;  // throws InputError
};

SceneSpec read_scene_spec(const std::filesystem::path& path);
void write_scene_spec(const std::filesystem::path& path, const SceneSpec& spec);

struct SynthResult {
  LightField lf;
  std::vector<DepthMap> gt;           // per view, index u * views_v + v; all pixels valid
  std::vector<MaskImage> layer_id;    // front-most layer index per pixel
};

SynthResult synth_lightfield(const SceneSpec& spec, int views_u, int views_v, int height,
                             int width);

// The canonical two-layer desk-scale scene used throughout the tests:
// checkerboard background at d=0, noise-textured foreground square at d=2.
SceneSpec canonical_two_layer_scene();

}  // namespace lfd
