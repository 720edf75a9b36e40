#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>

#include "saattack/core.hpp"
#include "test_support.hpp"

using namespace saattack;
using saattack::testing::random_image;

namespace {

const ImageShape kShape{4, 5, 3};

}  // namespace

TEST(ImageTensor, RejectsOutOfRangeAndNonFinite) {
  EXPECT_THROW(ImageTensor(kShape, std::vector<double>(kShape.size(), 1.5)), Error);
  EXPECT_THROW(ImageTensor(kShape, std::vector<double>(kShape.size(), -0.1)), Error);
  EXPECT_THROW(ImageTensor(kShape, std::vector<double>(kShape.size(), NAN)), Error);
  EXPECT_THROW(ImageTensor(kShape, std::vector<double>(3, 0.5)), ShapeError);
  EXPECT_THROW(ImageTensor::filled({4, 4, 2}, 0.5), ShapeError);
  EXPECT_NO_THROW(ImageTensor::filled({4, 4, 1}, 0.0));
}

TEST(ImageTensor, ClippedClampsIntoUnitRange) {
  auto x = ImageTensor::clipped({1, 3, 1}, {-2.0, 0.25, 7.0});
  EXPECT_EQ(x.at(0, 0, 0), 0.0);
  EXPECT_EQ(x.at(0, 1, 0), 0.25);
  EXPECT_EQ(x.at(0, 2, 0), 1.0);
}

TEST(ProjectLinf, IdentityWhenEqualToReference) {
  RandomStream rng(3);
  const auto x = random_image(kShape, rng);
  for (double eps : {0.0, 1e-9, 2.0 / 255, 0.5}) EXPECT_EQ(project_linf(x, x, eps), x);
}

TEST(ProjectLinf, ClampsToUpperBoundary) {
  const auto x = ImageTensor::filled({1, 1, 1}, 0.6);
  const auto ref = ImageTensor::filled({1, 1, 1}, 0.5);
  const double eps = 2.0 / 255;
  const double out = project_linf(x, ref, eps).at(0, 0, 0);
  EXPECT_NEAR(out, 0.50784, 1e-5);
  EXPECT_NEAR(out, 0.5 + eps, 1e-15);
  EXPECT_LE(std::abs(out - 0.5), eps);
}

TEST(ProjectLinf, RandomPairsStayInBallAndRange) {
  RandomStream rng(11);
  for (int trial = 0; trial < 100; ++trial) {
    const auto x = random_image(kShape, rng);
    const auto ref = random_image(kShape, rng);
    const double eps = rng.uniform(0.0, 0.1);
    const auto out = project_linf(x, ref, eps);
    for (std::size_t i = 0; i < out.size(); ++i) {
      const double o = out.values()[i];
      ASSERT_LE(std::abs(o - ref.values()[i]), eps);
      ASSERT_GE(o, 0.0);
      ASSERT_LE(o, 1.0);
    }
  }
}

TEST(ProjectLinf, IdempotentAndNeverIncreasesDistance) {
  RandomStream rng(12);
  for (int trial = 0; trial < 100; ++trial) {
    const auto x = random_image(kShape, rng);
    const auto ref = random_image(kShape, rng);
    const double eps = rng.uniform(0.0, 0.2);
    const auto once = project_linf(x, ref, eps);
    EXPECT_EQ(project_linf(once, ref, eps), once);
    EXPECT_LE(linf_distance(once, ref), linf_distance(x, ref));
  }
}

TEST(ProjectLinf, ShapeMismatchRejected) {
  EXPECT_THROW(project_linf(ImageTensor::filled({2, 2, 1}, 0.5), ImageTensor::filled({2, 3, 1}, 0.5),
                            0.1),
               ShapeError);
  EXPECT_THROW(project_linf(ImageTensor::filled({2, 2, 1}, 0.5), ImageTensor::filled({2, 2, 1}, 0.5),
                            -0.1),
               Error);
}

TEST(WordsChanged, Examples) {
  const TextSample a({"a", "dog", "runs"});
  EXPECT_EQ(words_changed(a, a), 0);
  EXPECT_EQ(words_changed(a, TextSample({"a", "cat", "runs"})), 1);
  EXPECT_THROW(words_changed(a, TextSample({"a", "dog"})), Error);
}

TEST(WordsChanged, MatchesPositionwiseOracle) {
  RandomStream rng(5);
  const std::vector<std::string> alphabet = {"a", "b", "c"};
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t n = 1 + rng.uniform_index(8);
    std::vector<std::string> wa, wb;
    for (std::size_t i = 0; i < n; ++i) {
      wa.push_back(alphabet[rng.uniform_index(3)]);
      wb.push_back(alphabet[rng.uniform_index(3)]);
    }
    int expected = 0;
    for (std::size_t i = 0; i < n; ++i) expected += wa[i] != wb[i];
    EXPECT_EQ(words_changed(TextSample(wa), TextSample(wb)), expected);
  }
}

TEST(TextSample, InvariantsAndTokenizer) {
  EXPECT_THROW(TextSample(std::vector<std::string>{}), Error);
  EXPECT_THROW(TextSample({"a", ""}), Error);
  EXPECT_THROW(TextSample({"a b"}), Error);
  EXPECT_EQ(TextSample::tokenize("  A Dog,  runs! ").words(),
            (std::vector<std::string>{"a", "dog", "runs"}));
  EXPECT_EQ(TextSample::tokenize("\"don't\" stop").words(),
            (std::vector<std::string>{"don't", "stop"}));
  EXPECT_THROW(TextSample::tokenize("  ... !! "), Error);
  EXPECT_EQ(TextSample({"a", "b"}).with_word(1, "c").join(), "a c");
}

TEST(RandomStream, EqualSeedsGiveIdenticalSequences) {
  RandomStream a(42), b(42), c(43);
  bool differs = false;
  for (int i = 0; i < 1000; ++i) {
    const auto x = a.next_u64();
    EXPECT_EQ(x, b.next_u64());
    differs |= x != c.next_u64();
  }
  EXPECT_TRUE(differs);
}

TEST(RandomStream, DrawsStayInRange) {
  RandomStream r(7);
  for (int i = 0; i < 10000; ++i) {
    const double u = r.uniform();
    ASSERT_GE(u, 0.0);
    ASSERT_LT(u, 1.0);
    ASSERT_LT(r.uniform_index(7), 7u);
  }
  EXPECT_THROW(r.uniform_index(0), Error);
}

TEST(RandomStream, ForkDependsOnlyOnSeedAndTag) {
  RandomStream a(9), b(9);
  a.next_u64();
  EXPECT_EQ(a.fork(3).next_u64(), b.fork(3).next_u64());
  EXPECT_NE(a.fork(3).next_u64(), a.fork(4).next_u64());
}

TEST(AttackConfig, ValidationRules) {
  AttackConfig c;
  EXPECT_NO_THROW(c.validate());
  EXPECT_DOUBLE_EQ(c.effective_init_amplitude(), c.eps_x);
  auto bad = [](auto mutate) {
    AttackConfig c;
    mutate(c);
    return c;
  };
  EXPECT_THROW(bad([](auto& c) { c.eps_x = -1; }).validate(), ConfigError);
  EXPECT_THROW(bad([](auto& c) { c.alpha = 0; }).validate(), ConfigError);
  EXPECT_THROW(bad([](auto& c) { c.iterations = -1; }).validate(), ConfigError);
  EXPECT_THROW(bad([](auto& c) { c.top_k = 0; }).validate(), ConfigError);
  EXPECT_THROW(bad([](auto& c) { c.eps_t = 0; }).validate(), ConfigError);
  EXPECT_THROW(bad([](auto& c) { c.image_augmentations = -1; }).validate(), ConfigError);
  EXPECT_THROW(bad([](auto& c) { c.scale_factors = {}; }).validate(), ConfigError);
  EXPECT_THROW(bad([](auto& c) { c.scale_factors = {1.0, 0.0}; }).validate(), ConfigError);
  EXPECT_NO_THROW(bad([](auto& c) {
                    c.iterations = 0;
                    c.alpha = 0;
                  }).validate());
}
