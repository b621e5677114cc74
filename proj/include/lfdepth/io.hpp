#pragma once

#include <filesystem>
#include <optional>
#include <string>

#include "lfdepth/core.hpp"

namespace lfd {

// Directory-of-PNGs light field description, stored as manifest.json next to
// the frames. `frame_pattern` is a printf-style template with exactly one
// zero-padded integer conversion, e.g. "frame_%03d.png".
struct Manifest {
  std::string name;
  int width = 0;
  int height = 0;
  int views_u = 0;
  int views_v = 0;
  std::string frame_pattern;
  float disparity_min = -2.0f;
  float disparity_max = 2.0f;
  bool row_major = true;  // frame index = u * views_v + v; otherwise v * views_u + u
  // Optional central angular crop (odd counts), applied after load.
  std::optional<int> crop_views_u;
  std::optional<int> crop_views_v;

  int frame_index(int u, int v) const { return row_major ? u * views_v + v : v * views_u + u; }
  std::string frame_name(int u, int v) const;
};

Manifest read_manifest(const std::filesystem::path& path);
void write_manifest(const std::filesystem::path& path, const Manifest& manifest);

LightField load_lightfield(const std::filesystem::path& manifest_path);

// Writes the frames plus manifest.json into `dir`.
void save_lightfield(const std::filesystem::path& dir, const LightField& lf,
                     const std::string& frame_pattern = "frame_%03d.png");

// 8-bit RGB PNG. Values clamp to [0,1] and quantize with round(v * 255).
ColorImage read_png(const std::filesystem::path& path);
void write_png(const std::filesystem::path& path, const ColorImage& img);

// Grayscale PFM ("Pf"): ASCII dims, scale line whose sign encodes endianness
// (negative = little-endian), float32 rows stored bottom-to-top. NaN marks
// invalid pixels.
DepthMap read_pfm(const std::filesystem::path& path);
void write_pfm(const std::filesystem::path& path, const DepthMap& map);

}  // namespace lfd
