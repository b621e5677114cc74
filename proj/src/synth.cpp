#include "lfdepth/synth.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <nlohmann/json.hpp>

#include "lfdepth/errors.hpp"

namespace lfd {

using nlohmann::json;

namespace {

// splitmix64; deterministic across platforms.
uint64_t hash_mix(uint64_t x) {
  x += 0x9e3779b97f4a7c15ull;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
  return x ^ (x >> 31);
}

uint8_t quantize8(float v) {
  return static_cast<uint8_t>(std::lround(std::clamp(v, 0.0f, 1.0f) * 255.0f));
}

// Texture value at integer texture coordinates, already on the 8-bit grid so
// that PNG round trips are exact.
float texture_value(const TextureSpec& t, int64_t ix, int64_t iy, int ref_width) {
  const float lo = quantize8(t.lo) / 255.0f;
  const float hi = quantize8(t.hi) / 255.0f;
  const int scale = std::max(1, t.scale);
  switch (t.kind) {
    case TextureKind::Checker: {
      // floor division so the pattern continues cleanly for negative coords
      auto cell = [&](int64_t c) { return static_cast<int64_t>(std::floor(static_cast<double>(c) / scale)); };
      return ((cell(ix) + cell(iy)) & 1) ? hi : lo;
    }
    case TextureKind::Noise: {
      // ix/iy are block coordinates here (blocks of `scale` pixels share a value)
      uint64_t h = hash_mix(hash_mix(static_cast<uint64_t>(ix + (1 << 20)) * 0x100000001b3ull ^
                                     static_cast<uint64_t>(iy + (1 << 20))) ^
                            t.seed);
      const float f = static_cast<float>(h >> 40) / static_cast<float>(1 << 24);
      return quantize8(lo + f * (hi - lo)) / 255.0f;
    }
    case TextureKind::Gradient: {
      const float f =
          ref_width > 1 ? std::clamp(static_cast<float>(ix) / (ref_width - 1), 0.0f, 1.0f) : 0.0f;
      return quantize8(lo + f * (hi - lo)) / 255.0f;
    }
  }
  return lo;
}

float texture_nearest(const TextureSpec& t, int64_t ix, int64_t iy, int ref_width) {
  if (t.kind == TextureKind::Noise) {
    const int scale = std::max(1, t.scale);
    const int64_t bx = static_cast<int64_t>(std::floor(static_cast<double>(ix) / scale));
    const int64_t by = static_cast<int64_t>(std::floor(static_cast<double>(iy) / scale));
    return texture_value(t, bx, by, ref_width);
  }
  return texture_value(t, ix, iy, ref_width);
}

float texture_at(const TextureSpec& t, double x, double y, int ref_width, bool subpixel) {
  const int64_t x0 = static_cast<int64_t>(std::floor(x));
  const int64_t y0 = static_cast<int64_t>(std::floor(y));
  if (!subpixel) return texture_nearest(t, x0, y0, ref_width);
  // bilinear over pixels: flat inside cells, one-pixel ramps at cell borders
  const double ax = x - static_cast<double>(x0), ay = y - static_cast<double>(y0);
  const double v00 = texture_nearest(t, x0, y0, ref_width);
  const double v10 = texture_nearest(t, x0 + 1, y0, ref_width);
  const double v01 = texture_nearest(t, x0, y0 + 1, ref_width);
  const double v11 = texture_nearest(t, x0 + 1, y0 + 1, ref_width);
  return static_cast<float>((1 - ax) * (1 - ay) * v00 + ax * (1 - ay) * v10 +
                            (1 - ax) * ay * v01 + ax * ay * v11);
}

GrayImage gaussian_blur(const GrayImage& img, float sigma) {
  const int radius = std::max(1, static_cast<int>(std::ceil(3.0f * sigma)));
  std::vector<float> kernel(2 * radius + 1);
  float sum = 0.0f;
  for (int i = -radius; i <= radius; ++i) {
    kernel[i + radius] = std::exp(-0.5f * (i / sigma) * (i / sigma));
    sum += kernel[i + radius];
  }
  for (float& k : kernel) k /= sum;

  GrayImage tmp(img.rows, img.cols), out(img.rows, img.cols);
  for (int y = 0; y < img.rows; ++y) {
    for (int x = 0; x < img.cols; ++x) {
      float acc = 0.0f;
      for (int i = -radius; i <= radius; ++i) {
        int xx = std::clamp(x + i, 0, img.cols - 1);
        acc += kernel[i + radius] * img.at(y, xx);
      }
      tmp.at(y, x) = acc;
    }
  }
  for (int y = 0; y < img.rows; ++y) {
    for (int x = 0; x < img.cols; ++x) {
      float acc = 0.0f;
      for (int i = -radius; i <= radius; ++i) {
        int yy = std::clamp(y + i, 0, img.rows - 1);
        acc += kernel[i + radius] * tmp.at(yy, x);
      }
      out.at(y, x) = acc;
    }
  }
  return out;
}

TextureKind parse_kind(const std::string& s) {
  if (s == "checker") return TextureKind::Checker;
  if (s == "noise") return TextureKind::Noise;
  if (s == "gradient") return TextureKind::Gradient;
  throw InputError(fmt::format("unknown texture kind '{}'", s));
}

const char* kind_name(TextureKind k) {
  switch (k) {
    case TextureKind::Checker: return "checker";
    case TextureKind::Noise: return "noise";
    case TextureKind::Gradient: return "gradient";
  }
  return "checker";
}

}  // namespace

void SceneSpec::validate() const {
  if (layers.empty()) throw InputError("scene needs at least a background layer");
  if (layers.front().rect.has_value()) {
    throw InputError("background layer must cover the full extent (rect omitted)");
  }
  for (size_t i = 1; i < layers.size(); ++i) {
    if (!layers[i].rect.has_value()) {
      throw InputError(fmt::format("layer {} must have a rect (only the background is infinite)", i));
    }
    if (layers[i].disparity < layers[i - 1].disparity) {
      throw InputError("layers must be ordered back to front (non-decreasing disparity)");
    }
    const auto& r = *layers[i].rect;
    if (r[2] <= 0 || r[3] <= 0) throw InputError(fmt::format("layer {} rect is empty", i));
  }
  for (const auto& l : layers) {
    if (l.texture.hi < l.texture.lo) throw InputError("texture hi must be >= lo");
  }
}

SceneSpec read_scene_spec(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError(fmt::format("cannot open {}", path.string()));
  json j;
  try {
    in >> j;
  } catch (const json::parse_error& e) {
    throw IoError(fmt::format("{}: {}", path.string(), e.what()));
  }
  SceneSpec spec;
  spec.name = j.value("name", "scene");
  spec.blur_sigma = j.value("blur_sigma", 0.0f);
  spec.subpixel = j.value("subpixel", false);
  if (!j.contains("layers")) throw IoError(fmt::format("{}: missing field 'layers'", path.string()));
  for (const auto& lj : j.at("layers")) {
    LayerSpec layer;
    layer.disparity = lj.value("disparity", 0.0f);
    if (lj.contains("texture")) {
      const auto& tj = lj.at("texture");
      layer.texture.kind = parse_kind(tj.value("kind", "checker"));
      layer.texture.scale = tj.value("scale", 8);
      layer.texture.seed = tj.value("seed", uint64_t{0});
      layer.texture.lo = tj.value("lo", 0.2f);
      layer.texture.hi = tj.value("hi", 0.8f);
    }
    if (lj.contains("rect") && !lj.at("rect").is_null()) {
      auto r = lj.at("rect").get<std::vector<int>>();
      if (r.size() != 4) throw IoError(fmt::format("{}: rect must be [x, y, w, h]", path.string()));
      layer.rect = std::array<int, 4>{r[0], r[1], r[2], r[3]};
    }
    spec.layers.push_back(layer);
  }
  spec.validate();
  return spec;
}

void write_scene_spec(const std::filesystem::path& path, const SceneSpec& spec) {
  json layers = json::array();
  for (const auto& l : spec.layers) {
    json lj{{"disparity", l.disparity},
            {"texture",
             {{"kind", kind_name(l.texture.kind)},
              {"scale", l.texture.scale},
              {"seed", l.texture.seed},
              {"lo", l.texture.lo},
              {"hi", l.texture.hi}}}};
    if (l.rect) lj["rect"] = std::vector<int>(l.rect->begin(), l.rect->end());
    layers.push_back(lj);
  }
  json j{{"name", spec.name},
         {"blur_sigma", spec.blur_sigma},
         {"subpixel", spec.subpixel},
         {"layers", layers}};
  std::ofstream out(path);
  if (!out) throw IoError(fmt::format("cannot write {}", path.string()));
  out << j.dump(2) << "\n";
}

SynthResult synth_lightfield(const SceneSpec& spec, int views_u, int views_v, int height,
                             int width) {
  spec.validate();
  for (size_t i = 1; i < spec.layers.size(); ++i) {
    const auto& r = *spec.layers[i].rect;
    const int x0 = std::max(r[0], 0), y0 = std::max(r[1], 0);
    const int x1 = std::min(r[0] + r[2], width), y1 = std::min(r[1] + r[3], height);
    if (x0 >= x1 || y0 >= y1) {
      throw InputError(fmt::format("layer {} extent empty after clipping to {}x{}", i, width, height));
    }
  }

  SynthResult out;
  const int uc = (views_u - 1) / 2, vc = (views_v - 1) / 2;
  std::vector<ColorImage> views(static_cast<size_t>(views_u) * views_v);
  out.gt.assign(views.size(), DepthMap());
  out.layer_id.assign(views.size(), MaskImage());

  for (int u = 0; u < views_u; ++u) {
    for (int v = 0; v < views_v; ++v) {
      const size_t idx = static_cast<size_t>(u) * views_v + v;
      GrayImage shade(height, width);
      DepthMap gt(height, width);
      MaskImage ids(height, width, 0);
      for (int y = 0; y < height; ++y) {
        for (int x = 0; x < width; ++x) {
          // front-most layer whose back-projected reference point covers this pixel
          for (int li = static_cast<int>(spec.layers.size()) - 1; li >= 0; --li) {
            const LayerSpec& layer = spec.layers[li];
            const double sx = x - static_cast<double>(layer.disparity) * (v - vc);
            const double sy = y - static_cast<double>(layer.disparity) * (u - uc);
            bool covered = true;
            if (layer.rect) {
              const auto& r = *layer.rect;
              covered = sx >= r[0] && sx < r[0] + r[2] && sy >= r[1] && sy < r[1] + r[3];
            }
            if (!covered) continue;
            shade.at(y, x) = texture_at(layer.texture, sx, sy, width, spec.subpixel);
            gt.set(y, x, layer.disparity);
            ids.at(y, x) = static_cast<uint8_t>(li);
            break;
          }
        }
      }
      if (spec.blur_sigma > 0.0f) shade = gaussian_blur(shade, spec.blur_sigma);
      ColorImage rgb(height, width);
      for (size_t i = 0; i < shade.data.size(); ++i) {
        const float q = quantize8(shade.data[i]) / 255.0f;
        rgb.data[i] = {q, q, q};
      }
      views[idx] = std::move(rgb);
      out.gt[idx] = std::move(gt);
      out.layer_id[idx] = std::move(ids);
    }
  }

  float dmin = 0.0f, dmax = 0.0f;
  for (const auto& l : spec.layers) {
    dmin = std::min(dmin, l.disparity);
    dmax = std::max(dmax, l.disparity);
  }
  out.lf = make_lightfield(std::move(views), views_u, views_v, spec.name, dmin - 0.5f, dmax + 0.5f);
  return out;
}

SceneSpec canonical_two_layer_scene() {
  SceneSpec spec;
  spec.name = "two_layer";
  spec.blur_sigma = 1.0f;
  LayerSpec bg;
  bg.disparity = 0.0f;
  bg.texture = {TextureKind::Checker, 8, 1, 0.10f, 0.45f};
  LayerSpec fg;
  fg.disparity = 2.0f;
  fg.texture = {TextureKind::Noise, 2, 7, 0.55f, 1.00f};
  fg.rect = std::array<int, 4>{24, 20, 16, 24};
  spec.layers = {bg, fg};
  return spec;
}

}  // namespace lfd
