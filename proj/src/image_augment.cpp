#include "saattack/image_augment.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace saattack {

std::vector<BlockGrid::Rect> BlockGrid::tile(const ImageShape& s) const {
  if (rows < 1 || cols < 1) throw ConfigError("block grid needs rows >= 1 and cols >= 1");
  if (s.height < rows || s.width < cols) {
    throw ConfigError("image " + s.str() + " is smaller than the " + std::to_string(rows) + "x" +
                      std::to_string(cols) + " block grid");
  }
  const int bh = s.height / rows, bw = s.width / cols;
  std::vector<Rect> out;
  out.reserve(static_cast<std::size_t>(rows) * cols);
  for (int r = 0; r < rows; ++r) {
    const int y0 = r * bh;
    const int h = r == rows - 1 ? s.height - y0 : bh;
    for (int c = 0; c < cols; ++c) {
      const int x0 = c * bw;
      const int w = c == cols - 1 ? s.width - x0 : bw;
      out.push_back({y0, x0, h, w});
    }
  }
  return out;
}

std::string_view to_string(BlockTransform t) {
  switch (t) {
    case BlockTransform::VShift: return "VShift";
    case BlockTransform::HShift: return "HShift";
    case BlockTransform::VFlip: return "VFlip";
    case BlockTransform::HFlip: return "HFlip";
    case BlockTransform::Rotate: return "Rotate";
    case BlockTransform::Scale: return "Scale";
    case BlockTransform::AddNoise: return "AddNoise";
    case BlockTransform::Resize: return "Resize";
    case BlockTransform::DCT: return "DCT";
    case BlockTransform::Dropout: return "Dropout";
  }
  return "?";
}

ImageTensor crop(const ImageTensor& x, const BlockGrid::Rect& r) {
  if (r.y0 < 0 || r.x0 < 0 || r.height < 1 || r.width < 1 || r.y0 + r.height > x.height() ||
      r.x0 + r.width > x.width()) {
    throw ShapeError("crop rectangle outside image " + x.shape().str());
  }
  const int c = x.channels();
  std::vector<double> v;
  v.reserve(static_cast<std::size_t>(r.height) * r.width * c);
  for (int y = 0; y < r.height; ++y) {
    for (int xx = 0; xx < r.width; ++xx) {
      for (int ch = 0; ch < c; ++ch) v.push_back(x.at(r.y0 + y, r.x0 + xx, ch));
    }
  }
  return ImageTensor({r.height, r.width, c}, std::move(v));
}

namespace {

void paste(ImageArray& dst, const ImageTensor& block, const BlockGrid::Rect& r) {
  for (int y = 0; y < r.height; ++y) {
    for (int x = 0; x < r.width; ++x) {
      for (int c = 0; c < block.channels(); ++c) dst.at(r.y0 + y, r.x0 + x, c) = block.at(y, x, c);
    }
  }
}

// Output pixel (y, x) takes source pixel src(y, x); out-of-range sources
// become 0.
template <typename F>
ImageTensor remap(const ImageTensor& b, F src) {
  ImageArray out(b.shape());
  for (int y = 0; y < b.height(); ++y) {
    for (int x = 0; x < b.width(); ++x) {
      const auto [sy, sx] = src(y, x);
      if (sy < 0 || sy >= b.height() || sx < 0 || sx >= b.width()) continue;
      for (int c = 0; c < b.channels(); ++c) out.at(y, x, c) = b.at(sy, sx, c);
    }
  }
  return ImageTensor(b.shape(), std::move(out.values));
}

ImageTensor map_values(const ImageTensor& b, auto fn) {
  std::vector<double> v(b.values().begin(), b.values().end());
  for (double& e : v) e = fn(e);
  return ImageTensor::clipped(b.shape(), std::move(v));
}

ImageTensor rotate(const ImageTensor& b, int quarter_turns) {
  const double cy = (b.height() - 1) / 2.0, cx = (b.width() - 1) / 2.0;
  return remap(b, [&](int y, int x) {
    const double dy = y - cy, dx = x - cx;
    double sy = 0, sx = 0;
    switch (((quarter_turns % 4) + 4) % 4) {
      case 0: sy = y; sx = x; break;
      case 1: sy = cy + dx; sx = cx - dy; break;
      case 2: sy = cy - dy; sx = cx - dx; break;
      default: sy = cy - dx; sx = cx + dy; break;
    }
    return std::pair{static_cast<int>(std::lround(sy)), static_cast<int>(std::lround(sx))};
  });
}

ImageTensor dct_lowpass(const ImageTensor& b, double cutoff) {
  const int h = b.height(), w = b.width(), c = b.channels();
  const int keep_h = std::clamp(static_cast<int>(std::ceil(cutoff * h)), 1, h);
  const int keep_w = std::clamp(static_cast<int>(std::ceil(cutoff * w)), 1, w);
  ImageArray out(b.shape());
  std::vector<double> plane(static_cast<std::size_t>(h) * w);
  for (int ch = 0; ch < c; ++ch) {
    for (int y = 0; y < h; ++y)
      for (int x = 0; x < w; ++x) plane[static_cast<std::size_t>(y) * w + x] = b.at(y, x, ch);
    auto coeffs = dct2(plane, h, w);
    for (int u = 0; u < h; ++u)
      for (int v = 0; v < w; ++v)
        if (u >= keep_h || v >= keep_w) coeffs[static_cast<std::size_t>(u) * w + v] = 0.0;
    const auto back = idct2(coeffs, h, w);
    for (int y = 0; y < h; ++y)
      for (int x = 0; x < w; ++x) out.at(y, x, ch) = back[static_cast<std::size_t>(y) * w + x];
  }
  return ImageTensor::clipped(b.shape(), std::move(out.values));
}

// Orthonormal DCT-II basis, n x n, row k = frequency.
std::vector<double> dct_matrix(int n) {
  std::vector<double> m(static_cast<std::size_t>(n) * n);
  for (int k = 0; k < n; ++k) {
    const double a = k == 0 ? std::sqrt(1.0 / n) : std::sqrt(2.0 / n);
    for (int i = 0; i < n; ++i) {
      m[static_cast<std::size_t>(k) * n + i] =
          a * std::cos(std::numbers::pi * (2 * i + 1) * k / (2.0 * n));
    }
  }
  return m;
}

}  // namespace

std::vector<double> dct2(std::span<const double> plane, int h, int w) {
  const auto mh = dct_matrix(h), mw = dct_matrix(w);
  std::vector<double> tmp(static_cast<std::size_t>(h) * w, 0.0), out(tmp.size(), 0.0);
  // rows: tmp[y][v] = sum_x plane[y][x] mw[v][x]
  for (int y = 0; y < h; ++y)
    for (int v = 0; v < w; ++v) {
      double s = 0.0;
      for (int x = 0; x < w; ++x) s += plane[static_cast<std::size_t>(y) * w + x] * mw[static_cast<std::size_t>(v) * w + x];
      tmp[static_cast<std::size_t>(y) * w + v] = s;
    }
  for (int u = 0; u < h; ++u)
    for (int v = 0; v < w; ++v) {
      double s = 0.0;
      for (int y = 0; y < h; ++y) s += mh[static_cast<std::size_t>(u) * h + y] * tmp[static_cast<std::size_t>(y) * w + v];
      out[static_cast<std::size_t>(u) * w + v] = s;
    }
  return out;
}

std::vector<double> idct2(std::span<const double> coeffs, int h, int w) {
  const auto mh = dct_matrix(h), mw = dct_matrix(w);
  std::vector<double> tmp(static_cast<std::size_t>(h) * w, 0.0), out(tmp.size(), 0.0);
  for (int y = 0; y < h; ++y)
    for (int v = 0; v < w; ++v) {
      double s = 0.0;
      for (int u = 0; u < h; ++u) s += mh[static_cast<std::size_t>(u) * h + y] * coeffs[static_cast<std::size_t>(u) * w + v];
      tmp[static_cast<std::size_t>(y) * w + v] = s;
    }
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) {
      double s = 0.0;
      for (int v = 0; v < w; ++v) s += tmp[static_cast<std::size_t>(y) * w + v] * mw[static_cast<std::size_t>(v) * w + x];
      out[static_cast<std::size_t>(y) * w + x] = s;
    }
  return out;
}

BlockTransformParams draw_block_params(BlockTransform t, const ImageShape& block,
                                       RandomStream& rng, const BlockTransformRanges& r) {
  BlockTransformParams p;
  switch (t) {
    case BlockTransform::VShift:
      p.shift = static_cast<int>(rng.uniform_index(static_cast<std::size_t>(block.height)));
      break;
    case BlockTransform::HShift:
      p.shift = static_cast<int>(rng.uniform_index(static_cast<std::size_t>(block.width)));
      break;
    case BlockTransform::Rotate:
      p.quarter_turns = 1 + static_cast<int>(rng.uniform_index(3));
      break;
    case BlockTransform::Scale: p.scale = rng.uniform(r.scale_min, r.scale_max); break;
    case BlockTransform::AddNoise: p.noise_amplitude = rng.uniform(0.0, r.noise_max); break;
    case BlockTransform::Resize: p.resize_factor = rng.uniform(r.resize_min, r.resize_max); break;
    case BlockTransform::DCT: p.dct_cutoff = rng.uniform(r.dct_cutoff_min, r.dct_cutoff_max); break;
    case BlockTransform::Dropout: p.dropout_rate = rng.uniform(0.0, r.dropout_max); break;
    case BlockTransform::VFlip:
    case BlockTransform::HFlip: break;
  }
  return p;
}

ImageTensor transform_block(const ImageTensor& b, BlockTransform t,
                            const BlockTransformParams& p, RandomStream& rng) {
  const int h = b.height(), w = b.width();
  switch (t) {
    case BlockTransform::VShift:
      return remap(b, [&](int y, int x) { return std::pair{((y - p.shift) % h + h) % h, x}; });
    case BlockTransform::HShift:
      return remap(b, [&](int y, int x) { return std::pair{y, ((x - p.shift) % w + w) % w}; });
    case BlockTransform::VFlip:
      return remap(b, [&](int y, int x) { return std::pair{h - 1 - y, x}; });
    case BlockTransform::HFlip:
      return remap(b, [&](int y, int x) { return std::pair{y, w - 1 - x}; });
    case BlockTransform::Rotate: return rotate(b, p.quarter_turns);
    case BlockTransform::Scale: return map_values(b, [&](double v) { return v * p.scale; });
    case BlockTransform::AddNoise:
      return map_values(b, [&](double v) {
        return v + rng.uniform(-p.noise_amplitude, p.noise_amplitude);
      });
    case BlockTransform::Resize: {
      if (p.resize_factor == 1.0) return b;
      const int dh = std::max(1, static_cast<int>(std::lround(h * p.resize_factor)));
      const int dw = std::max(1, static_cast<int>(std::lround(w * p.resize_factor)));
      return resize_bilinear(resize_bilinear(b, dh, dw), h, w);
    }
    case BlockTransform::DCT: return dct_lowpass(b, p.dct_cutoff);
    case BlockTransform::Dropout:
      if (p.dropout_rate <= 0.0) return b;
      return map_values(b, [&](double v) { return rng.uniform() < p.dropout_rate ? 0.0 : v; });
  }
  throw Error("unknown block transform");
}

ImageTensor apply_block_transform(const ImageTensor& block, BlockTransform t, RandomStream& rng,
                                  const BlockTransformRanges& ranges) {
  const auto p = draw_block_params(t, block.shape(), rng, ranges);
  return transform_block(block, t, p, rng);
}

std::vector<ImageTensor> sia_augment(const ImageTensor& x, int n, const BlockGrid& grid,
                                     RandomStream& rng, const BlockTransformRanges& ranges) {
  if (n < 0) throw ConfigError("sia_augment count must be >= 0");
  const auto rects = grid.tile(x.shape());
  std::vector<ImageTensor> out;
  out.reserve(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    ImageArray canvas(x.shape());
    for (const auto& r : rects) {
      const auto t = kAllBlockTransforms[rng.uniform_index(kAllBlockTransforms.size())];
      paste(canvas, apply_block_transform(crop(x, r), t, rng, ranges), r);
    }
    out.push_back(ImageTensor::clipped(x.shape(), std::move(canvas.values)));
  }
  return out;
}

namespace {

struct Tap {
  int i0, i1;
  double a;  // weight of i1
};

// Source taps for each destination index, half-pixel centres.
std::vector<Tap> resize_taps(int dst, int src) {
  const double scale = static_cast<double>(src) / dst;
  std::vector<Tap> taps(static_cast<std::size_t>(dst));
  for (int d = 0; d < dst; ++d) {
    const double s = std::clamp((d + 0.5) * scale - 0.5, 0.0, static_cast<double>(src - 1));
    const int i0 = static_cast<int>(std::floor(s));
    taps[static_cast<std::size_t>(d)] = {i0, std::min(i0 + 1, src - 1), s - i0};
  }
  return taps;
}

}  // namespace

ImageTensor resize_bilinear(const ImageTensor& x, int height, int width) {
  if (height < 1 || width < 1) throw ConfigError("resize target must be at least 1x1");
  if (height == x.height() && width == x.width()) return x;
  const int c = x.channels();
  const auto ty = resize_taps(height, x.height());
  const auto tx = resize_taps(width, x.width());
  ImageArray out({height, width, c});
  for (int y = 0; y < height; ++y) {
    const auto [y0, y1, ay] = ty[static_cast<std::size_t>(y)];
    for (int xx = 0; xx < width; ++xx) {
      const auto [x0, x1, ax] = tx[static_cast<std::size_t>(xx)];
      for (int ch = 0; ch < c; ++ch) {
        const double v00 = x.at(y0, x0, ch), v01 = x.at(y0, x1, ch);
        const double v10 = x.at(y1, x0, ch), v11 = x.at(y1, x1, ch);
        const double top = v00 + ax * (v01 - v00);
        const double bot = v10 + ax * (v11 - v10);
        out.at(y, xx, ch) = top + ay * (bot - top);
      }
    }
  }
  return ImageTensor::clipped(out.shape, std::move(out.values));
}

ImageArray resize_bilinear_vjp(const ImageArray& cotangent, int height, int width) {
  if (height < 1 || width < 1) throw ConfigError("resize source must be at least 1x1");
  const auto& cs = cotangent.shape;
  if (cs.height == height && cs.width == width) return cotangent;
  const auto ty = resize_taps(cs.height, height);
  const auto tx = resize_taps(cs.width, width);
  ImageArray g({height, width, cs.channels});
  for (int y = 0; y < cs.height; ++y) {
    const auto [y0, y1, ay] = ty[static_cast<std::size_t>(y)];
    for (int xx = 0; xx < cs.width; ++xx) {
      const auto [x0, x1, ax] = tx[static_cast<std::size_t>(xx)];
      for (int ch = 0; ch < cs.channels; ++ch) {
        const double v = cotangent.at(y, xx, ch);
        g.at(y0, x0, ch) += (1 - ay) * (1 - ax) * v;
        g.at(y0, x1, ch) += (1 - ay) * ax * v;
        g.at(y1, x0, ch) += ay * (1 - ax) * v;
        g.at(y1, x1, ch) += ay * ax * v;
      }
    }
  }
  return g;
}

ImageShape scaled_shape(const ImageShape& s, double factor) {
  if (!(factor > 0.0)) throw ConfigError("scale factors must be > 0");
  return {std::max(1, static_cast<int>(std::lround(s.height * factor))),
          std::max(1, static_cast<int>(std::lround(s.width * factor))), s.channels};
}

std::vector<ImageTensor> scale_set(const ImageTensor& x, std::span<const double> factors) {
  if (factors.empty()) throw ConfigError("scale_set needs at least one factor");
  std::vector<ImageTensor> out;
  out.reserve(factors.size());
  for (double f : factors) {
    const auto s = scaled_shape(x.shape(), f);
    out.push_back(resize_bilinear(resize_bilinear(x, s.height, s.width), x.height(), x.width()));
  }
  return out;
}

}  // namespace saattack
