#pragma once

// Block-wise structure-invariant augmentation and the multi-scale copies used
// by the image attack.

#include <array>
#include <span>
#include <string_view>
#include <vector>

#include "saattack/core.hpp"

namespace saattack {

/// rows x cols tiling; trailing row/column blocks absorb remainder pixels.
struct BlockGrid {
  int rows = 3;
  int cols = 3;

  struct Rect {
    int y0, x0, height, width;
  };
  /// Throws ConfigError when the image is smaller than the grid.
  std::vector<Rect> tile(const ImageShape& s) const;
};

enum class BlockTransform {
  VShift,
  HShift,
  VFlip,
  HFlip,
  Rotate,
  Scale,
  AddNoise,
  Resize,
  DCT,
  Dropout,
};

inline constexpr std::array<BlockTransform, 10> kAllBlockTransforms = {
    BlockTransform::VShift, BlockTransform::HShift,   BlockTransform::VFlip,
    BlockTransform::HFlip,  BlockTransform::Rotate,   BlockTransform::Scale,
    BlockTransform::AddNoise, BlockTransform::Resize, BlockTransform::DCT,
    BlockTransform::Dropout};

std::string_view to_string(BlockTransform t);

/// Ranges the per-block parameters are drawn from (uniformly).
struct BlockTransformRanges {
  double scale_min = 0.5, scale_max = 1.5;
  double noise_max = 0.1;
  double dropout_max = 0.3;
  double resize_min = 0.5, resize_max = 1.0;
  double dct_cutoff_min = 0.3, dct_cutoff_max = 1.0;
};

/// Parameters of one transform application. Only the fields relevant to the
/// chosen transform are read.
struct BlockTransformParams {
  int shift = 0;           // VShift / HShift, in pixels (circular)
  int quarter_turns = 2;   // Rotate: 1, 2 or 3 (90, 180, 270 degrees)
  double scale = 1.0;      // Scale: intensity multiplier
  double noise_amplitude = 0.0;
  double resize_factor = 1.0;
  double dct_cutoff = 1.0; // fraction of DCT coefficients kept per axis
  double dropout_rate = 0.0;
};

BlockTransformParams draw_block_params(BlockTransform t, const ImageShape& block,
                                       RandomStream& rng,
                                       const BlockTransformRanges& ranges = {});

/// Applies `t` with explicit parameters. `rng` is consumed only by the
/// per-element draws of AddNoise and Dropout.
ImageTensor transform_block(const ImageTensor& block, BlockTransform t,
                            const BlockTransformParams& params, RandomStream& rng);

/// Draws parameters and applies `t`.
ImageTensor apply_block_transform(const ImageTensor& block, BlockTransform t, RandomStream& rng,
                                  const BlockTransformRanges& ranges = {});

/// n variants; every block of every variant gets one uniformly drawn transform.
std::vector<ImageTensor> sia_augment(const ImageTensor& x, int n, const BlockGrid& grid,
                                     RandomStream& rng, const BlockTransformRanges& ranges = {});

/// Bilinear resampling with half-pixel centres; a constant image stays
/// exactly constant.
ImageTensor resize_bilinear(const ImageTensor& x, int height, int width);

/// Transpose of resize_bilinear: maps a cotangent on the resized image back
/// onto an input of the given size.
ImageArray resize_bilinear_vjp(const ImageArray& cotangent, int height, int width);

/// Intermediate size used by scale_set for one factor.
ImageShape scaled_shape(const ImageShape& s, double factor);

/// One copy per factor: resized by the factor, then resized back to x's
/// resolution. Factor 1.0 yields x itself.
std::vector<ImageTensor> scale_set(const ImageTensor& x, std::span<const double> factors);

/// Orthonormal 2-D DCT-II of one channel (row-major h x w) and its inverse.
std::vector<double> dct2(std::span<const double> plane, int h, int w);
std::vector<double> idct2(std::span<const double> coeffs, int h, int w);

ImageTensor crop(const ImageTensor& x, const BlockGrid::Rect& r);

}  // namespace saattack
