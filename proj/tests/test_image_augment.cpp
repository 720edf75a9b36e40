#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "saattack/image_augment.hpp"
#include "test_support.hpp"

using namespace saattack;
using namespace saattack::testing;

namespace {

void expect_valid_variant(const ImageTensor& v, const ImageShape& s) {
  ASSERT_EQ(v.shape(), s);
  for (double e : v.values()) {
    ASSERT_GE(e, 0.0);
    ASSERT_LE(e, 1.0);
  }
}

// Naive double-sum DCT-II, orthonormal scaling.
std::vector<double> naive_dct2(const std::vector<double>& x, int h, int w) {
  std::vector<double> out(x.size());
  for (int u = 0; u < h; ++u) {
    for (int v = 0; v < w; ++v) {
      const double au = u == 0 ? std::sqrt(1.0 / h) : std::sqrt(2.0 / h);
      const double av = v == 0 ? std::sqrt(1.0 / w) : std::sqrt(2.0 / w);
      long double s = 0;
      for (int y = 0; y < h; ++y) {
        for (int xx = 0; xx < w; ++xx) {
          s += x[y * w + xx] * std::cos(std::numbers::pi * (2 * y + 1) * u / (2.0 * h)) *
               std::cos(std::numbers::pi * (2 * xx + 1) * v / (2.0 * w));
        }
      }
      out[u * w + v] = au * av * static_cast<double>(s);
    }
  }
  return out;
}

}  // namespace

TEST(BlockGrid, TilesCoverTheImageExactlyOnce) {
  for (const ImageShape s : {ImageShape{9, 9, 1}, ImageShape{10, 11, 3}, ImageShape{32, 32, 3}}) {
    for (const BlockGrid g : {BlockGrid{3, 3}, BlockGrid{2, 4}, BlockGrid{1, 1}}) {
      std::vector<int> hits(static_cast<std::size_t>(s.height) * s.width, 0);
      const auto rects = g.tile(s);
      EXPECT_EQ(rects.size(), static_cast<std::size_t>(g.rows * g.cols));
      for (const auto& r : rects) {
        for (int y = r.y0; y < r.y0 + r.height; ++y)
          for (int x = r.x0; x < r.x0 + r.width; ++x) ++hits[y * s.width + x];
      }
      for (int h : hits) EXPECT_EQ(h, 1);
    }
  }
  EXPECT_THROW(BlockGrid{}.tile({2, 8, 3}), ConfigError);
}

TEST(SiaAugment, CountsShapeRangeAndErrors) {
  RandomStream rng(1);
  const auto x = random_image({12, 12, 3}, rng);
  EXPECT_TRUE(sia_augment(x, 0, {}, rng).empty());
  EXPECT_THROW(sia_augment(ImageTensor::filled({2, 2, 1}, 0.5), 1, {}, rng), ConfigError);
  const auto vs = sia_augment(x, 50, {}, rng);
  EXPECT_EQ(vs.size(), 50u);
  for (const auto& v : vs) expect_valid_variant(v, x.shape());
}

TEST(SiaAugment, DeterministicUnderFixedSeed) {
  RandomStream gen(2);
  const auto x = random_image({16, 16, 3}, gen);
  RandomStream a(7), b(7);
  EXPECT_EQ(sia_augment(x, 8, {}, a), sia_augment(x, 8, {}, b));
}

TEST(BlockTransforms, FlipsAreInvolutions) {
  RandomStream rng(3);
  for (int trial = 0; trial < 50; ++trial) {
    const int h = 1 + static_cast<int>(rng.uniform_index(9)), w = 1 + static_cast<int>(rng.uniform_index(9));
    const auto b = random_image({h, w, 3}, rng);
    for (auto t : {BlockTransform::VFlip, BlockTransform::HFlip}) {
      EXPECT_EQ(apply_block_transform(apply_block_transform(b, t, rng), t, rng), b);
    }
  }
}

TEST(BlockTransforms, FlipAndShiftMoveTheRightPixels) {
  const ImageTensor b({2, 3, 1}, {0.1, 0.2, 0.3, 0.4, 0.5, 0.6});
  RandomStream rng(0);
  EXPECT_EQ(transform_block(b, BlockTransform::VFlip, {}, rng),
            ImageTensor({2, 3, 1}, {0.4, 0.5, 0.6, 0.1, 0.2, 0.3}));
  EXPECT_EQ(transform_block(b, BlockTransform::HFlip, {}, rng),
            ImageTensor({2, 3, 1}, {0.3, 0.2, 0.1, 0.6, 0.5, 0.4}));
  BlockTransformParams p;
  p.shift = 1;
  EXPECT_EQ(transform_block(b, BlockTransform::HShift, p, rng),
            ImageTensor({2, 3, 1}, {0.3, 0.1, 0.2, 0.6, 0.4, 0.5}));
  EXPECT_EQ(transform_block(b, BlockTransform::VShift, p, rng),
            ImageTensor({2, 3, 1}, {0.4, 0.5, 0.6, 0.1, 0.2, 0.3}));
}

TEST(BlockTransforms, RotationByQuarterTurnsOnSquareBlocks) {
  const ImageTensor b({2, 2, 1}, {0.1, 0.2, 0.3, 0.4});
  RandomStream rng(0);
  BlockTransformParams p;
  p.quarter_turns = 2;
  EXPECT_EQ(transform_block(b, BlockTransform::Rotate, p, rng),
            ImageTensor({2, 2, 1}, {0.4, 0.3, 0.2, 0.1}));
  p.quarter_turns = 1;
  const auto once = transform_block(b, BlockTransform::Rotate, p, rng);
  auto four = once;
  for (int i = 0; i < 3; ++i) four = transform_block(four, BlockTransform::Rotate, p, rng);
  EXPECT_EQ(four, b);
  EXPECT_NE(once, b);
}

TEST(BlockTransforms, DropoutWithZeroRateIsIdentity) {
  RandomStream gen(4), rng(5);
  const auto b = random_image({5, 5, 3}, gen);
  BlockTransformParams p;
  p.dropout_rate = 0.0;
  EXPECT_EQ(transform_block(b, BlockTransform::Dropout, p, rng), b);
  BlockTransformRanges none;
  none.dropout_max = 0.0;
  EXPECT_EQ(apply_block_transform(b, BlockTransform::Dropout, rng, none), b);
}

TEST(BlockTransforms, NoiseStaysWithinAmplitude) {
  RandomStream rng(6);
  for (int trial = 0; trial < 100; ++trial) {
    const auto b = random_image({6, 6, 3}, rng);
    BlockTransformParams p;
    p.noise_amplitude = rng.uniform(0.0, 0.1);
    const auto out = transform_block(b, BlockTransform::AddNoise, p, rng);
    for (std::size_t i = 0; i < b.size(); ++i) {
      ASSERT_LE(std::abs(out.values()[i] - b.values()[i]), p.noise_amplitude);
      ASSERT_GE(out.values()[i], 0.0);
      ASSERT_LE(out.values()[i], 1.0);
    }
  }
}

TEST(BlockTransforms, EveryTransformPreservesShapeAndRange) {
  RandomStream rng(7);
  for (int trial = 0; trial < 40; ++trial) {
    const int h = 1 + static_cast<int>(rng.uniform_index(10)), w = 1 + static_cast<int>(rng.uniform_index(10));
    const auto b = random_image({h, w, trial % 2 ? 3 : 1}, rng);
    for (auto t : kAllBlockTransforms) expect_valid_variant(apply_block_transform(b, t, rng), b.shape());
  }
}

TEST(Dct, MatchesNaiveTransformAndInverts) {
  RandomStream rng(8);
  for (int trial = 0; trial < 20; ++trial) {
    const int h = 1 + static_cast<int>(rng.uniform_index(8)), w = 1 + static_cast<int>(rng.uniform_index(8));
    std::vector<double> plane(static_cast<std::size_t>(h) * w);
    for (double& v : plane) v = rng.uniform();
    const auto c = dct2(plane, h, w);
    const auto ref = naive_dct2(plane, h, w);
    for (std::size_t i = 0; i < c.size(); ++i) EXPECT_NEAR(c[i], ref[i], 1e-12);
    const auto back = idct2(c, h, w);
    for (std::size_t i = 0; i < c.size(); ++i) EXPECT_NEAR(back[i], plane[i], 1e-12);
  }
}

TEST(Dct, FullCutoffReproducesBlock) {
  RandomStream rng(9);
  for (int trial = 0; trial < 50; ++trial) {
    const auto b = random_image({1 + static_cast<int>(rng.uniform_index(11)), 1 + static_cast<int>(rng.uniform_index(11)), 3}, rng);
    BlockTransformParams p;
    p.dct_cutoff = 1.0;
    const auto out = transform_block(b, BlockTransform::DCT, p, rng);
    for (std::size_t i = 0; i < b.size(); ++i) EXPECT_NEAR(out.values()[i], b.values()[i], 1e-6);
  }
}

TEST(Dct, LowCutoffKeepsOnlyTheMean) {
  RandomStream rng(10);
  const auto b = random_image({8, 8, 1}, rng);
  BlockTransformParams p;
  p.dct_cutoff = 0.1;  // ceil(0.8) = 1 coefficient per axis
  const auto out = transform_block(b, BlockTransform::DCT, p, rng);
  double mean = 0;
  for (double v : b.values()) mean += v;
  mean /= 64;
  for (double v : out.values()) EXPECT_NEAR(v, mean, 1e-12);
}

TEST(ScaleSet, IdentityAndConstantImages) {
  RandomStream rng(11);
  const auto x = random_image({10, 10, 3}, rng);
  const std::vector<double> one = {1.0};
  const auto s1 = scale_set(x, one);
  ASSERT_EQ(s1.size(), 1u);
  EXPECT_EQ(s1[0], x);

  const auto c = ImageTensor::filled({9, 7, 3}, 0.37);
  const std::vector<double> f = {0.5, 1.0};
  for (const auto& v : scale_set(c, f)) EXPECT_EQ(v, c);
  EXPECT_THROW(scale_set(x, std::vector<double>{}), ConfigError);
  EXPECT_THROW(scale_set(x, std::vector<double>{-1.0}), ConfigError);
}

TEST(ScaleSet, ArbitraryFactorsPreserveShape) {
  RandomStream rng(12);
  for (int trial = 0; trial < 30; ++trial) {
    const auto x = random_image({1 + static_cast<int>(rng.uniform_index(20)), 1 + static_cast<int>(rng.uniform_index(20)), 3}, rng);
    std::vector<double> factors;
    for (int i = 0; i < 4; ++i) factors.push_back(rng.uniform(0.05, 3.0));
    for (const auto& v : scale_set(x, factors)) expect_valid_variant(v, x.shape());
  }
}

TEST(ResizeBilinear, UpsampleOfTwoPixels) {
  // Half-pixel centres: outputs at source coords -0.25 (clamped), 0.25, 0.75, 1.25 (clamped).
  const ImageTensor x({1, 2, 1}, {0.0, 1.0});
  const auto y = resize_bilinear(x, 1, 4);
  const std::vector<double> expected = {0.0, 0.25, 0.75, 1.0};
  for (int i = 0; i < 4; ++i) EXPECT_NEAR(y.at(0, i, 0), expected[i], 1e-15);
}

TEST(ResizeBilinear, VjpIsTheTranspose) {
  // <resize(x), g> == <x, vjp(g)> for random x and g.
  RandomStream rng(31);
  for (int trial = 0; trial < 50; ++trial) {
    const ImageShape in{1 + static_cast<int>(rng.uniform_index(12)), 1 + static_cast<int>(rng.uniform_index(12)),
                        rng.uniform_index(2) == 0 ? 1 : 3};
    const int h = 1 + static_cast<int>(rng.uniform_index(15)), w = 1 + static_cast<int>(rng.uniform_index(15));
    const auto x = random_image(in, rng);
    ImageArray g({h, w, in.channels});
    for (double& v : g.values) v = rng.uniform(-1, 1);
    const auto y = resize_bilinear(x, h, w);
    const auto back = resize_bilinear_vjp(g, in.height, in.width);
    ASSERT_EQ(back.shape, in);
    EXPECT_NEAR(dot(y.values(), g.values), dot(x.values(), back.values), 1e-12);
  }
}
