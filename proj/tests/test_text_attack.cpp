#include <gtest/gtest.h>

#include <algorithm>
#include <numeric>

#include "saattack/text_attack.hpp"
#include "test_support.hpp"

using namespace saattack;
using namespace saattack::testing;

namespace {

ToyDualEncoder pool_encoder() { return ToyDualEncoder(small_spec(3), instance_pool()); }

// Image along e1; "hot" along e1, "a"/"b" along e2/e3, mask along e4.
TableEncoder aligned_encoder() {
  return TableEncoder({1, 0, 0, 0}, {{"hot", {1, 0, 0, 0}}, {"a", {0, 1, 0, 0}}, {"b", {0, 0, 1, 0}}},
                      {0, 0, 0, 1});
}

}  // namespace

TEST(WordImportance, SingleWordRanksItself) {
  const auto enc = pool_encoder();
  RandomStream rng(1);
  const auto x = random_image(small_spec().image_shape, rng);
  EXPECT_EQ(word_importance_ranking(TextSample({"dog"}), x, enc, 10), std::vector<std::size_t>{0});
  EXPECT_THROW(word_importance_ranking(TextSample({"dog"}), x, enc, 0), ConfigError);
}

TEST(WordImportance, AlignedTokenRanksFirst) {
  const auto enc = aligned_encoder();
  const auto x = ImageTensor::filled({1, 1, 1}, 0.5);
  for (const auto& words : {std::vector<std::string>{"a", "hot", "b"},
                            std::vector<std::string>{"b", "a", "hot"},
                            std::vector<std::string>{"hot", "b", "a"}}) {
    const TextSample t(words);
    const auto hot = static_cast<std::size_t>(std::find(words.begin(), words.end(), "hot") - words.begin());
    EXPECT_EQ(word_importance_ranking(t, x, enc, 10).front(), hot);
  }
}

TEST(WordImportance, RankingMatchesBruteForceMasking) {
  const auto enc = pool_encoder();
  RandomStream rng(2);
  for (int trial = 0; trial < 100; ++trial) {
    const auto inst = random_text_instance(rng, small_spec().image_shape);
    const auto& t = inst.text;
    const auto img = enc.encode_image(inst.x_ben);
    const double base = cosine_similarity(enc.encode_text(t), img);
    std::vector<double> imp;
    for (std::size_t i = 0; i < t.size(); ++i) {
      auto w = t.words();
      w[i] = kMaskToken;
      imp.push_back(base - cosine_similarity(enc.encode_text(TextSample(w)), img));
    }
    std::vector<std::size_t> expected(t.size());
    std::iota(expected.begin(), expected.end(), 0);
    // Insertion sort: strictly larger importance moves ahead, ties keep order.
    for (std::size_t i = 1; i < expected.size(); ++i) {
      for (std::size_t j = i; j > 0 && imp[expected[j]] > imp[expected[j - 1]]; --j) {
        std::swap(expected[j], expected[j - 1]);
      }
    }
    const int k = 1 + static_cast<int>(rng.uniform_index(6));
    expected.resize(std::min<std::size_t>(expected.size(), k));
    EXPECT_EQ(word_importance_ranking(t, inst.x_ben, enc, k), expected);
  }
}

TEST(LossText, CosineOneGivesMinusOne) {
  // Text embedding equal to the image embedding.
  const TableEncoder enc({0, 2, 0}, {{"same", {0, 2, 0}}}, {1, 0, 0});
  const auto x = ImageTensor::filled({1, 1, 1}, 0.5);
  EXPECT_EQ(loss_text(TextSample({"same"}), x, {}, enc), -1.0);
}

TEST(LossText, EmptyAugmentationEqualsBenignTermBitwise) {
  const auto enc = pool_encoder();
  RandomStream rng(3);
  for (int trial = 0; trial < 50; ++trial) {
    const auto inst = random_text_instance(rng, small_spec().image_shape);
    const std::vector<ImageTensor> none;
    const double eq3 = -cosine_similarity(enc.encode_text(inst.text), enc.encode_image(inst.x_ben));
    EXPECT_EQ(loss_text(inst.text, inst.x_ben, none, enc), eq3);
    EXPECT_EQ(loss_text(inst.text, inst.x_ben, {}, enc), eq3);
  }
}

TEST(LossText, TwoAugmentedImagesHandSummed) {
  const auto enc = pool_encoder();
  RandomStream rng(4);
  const auto shape = small_spec().image_shape;
  for (int trial = 0; trial < 20; ++trial) {
    const TextSample t({"dog", "runs"});
    const auto x0 = random_image(shape, rng), x1 = random_image(shape, rng), x2 = random_image(shape, rng);
    const auto e = enc.encode_text(t);
    const auto e0 = enc.encode_image(x0), e1 = enc.encode_image(x1), e2 = enc.encode_image(x2);
    const double expected = -(reference_cosine(e.values(), e0.values()) +
                              reference_cosine(e.values(), e1.values()) +
                              reference_cosine(e.values(), e2.values()));
    const std::vector<ImageTensor> aug = {x1, x2};
    EXPECT_NEAR(loss_text(t, x0, aug, enc), expected, 1e-14);
  }
}

TEST(TextAttack, NoCandidatesLeavesTextUnchanged) {
  const auto enc = pool_encoder();
  RandomStream rng(5);
  const auto x = random_image(small_spec().image_shape, rng);
  const TextSample t({"dog", "runs", "sky"});
  const FixedProposer empty({});
  const auto res = text_attack_detailed(t, x, {}, enc, AttackConfig{}, empty);
  EXPECT_EQ(res.text, t);
  EXPECT_EQ(res.chosen, -1);
  EXPECT_TRUE(res.evaluated.empty());
  // Proposals equal to the original word are not substitutions.
  const FixedProposer same({{"dog"}, {"runs"}, {"sky"}});
  EXPECT_EQ(text_attack(t, x, {}, enc, AttackConfig{}, same), t);
}

TEST(TextAttack, ForcedSingleCandidate) {
  const auto enc = pool_encoder();
  RandomStream rng(6);
  const auto x = random_image(small_spec().image_shape, rng);
  const FixedProposer one({{"cat"}});
  EXPECT_EQ(text_attack(TextSample({"dog"}), x, {}, enc, AttackConfig{}, one), TextSample({"cat"}));
}

TEST(TextAttack, MatchesExhaustiveArgmax) {
  const auto enc = pool_encoder();
  RandomStream rng(7);
  AttackConfig cfg;
  cfg.top_k = 10;
  for (int trial = 0; trial < 200; ++trial) {
    const auto inst = random_text_instance(rng, small_spec().image_shape);
    const auto out = text_attack(inst.text, inst.x_ben, inst.x_aug, enc, cfg, inst.proposer);
    EXPECT_EQ(out, exhaustive_text_argmax(inst.text, inst.x_ben, inst.x_aug, enc, inst.proposer));
    EXPECT_EQ(out.size(), inst.text.size());
    EXPECT_LE(words_changed(out, inst.text), 1);
  }
}

TEST(TextAttack, ChosenCandidateHasTheHighestRescoredLoss) {
  const auto enc = pool_encoder();
  RandomStream rng(8);
  for (int trial = 0; trial < 100; ++trial) {
    const auto inst = random_text_instance(rng, small_spec().image_shape);
    const auto res = text_attack_detailed(inst.text, inst.x_ben, inst.x_aug, enc, AttackConfig{}, inst.proposer);
    if (res.chosen < 0) continue;
    const double chosen = loss_text(res.text, inst.x_ben, inst.x_aug, enc);
    for (const auto& c : res.evaluated) {
      EXPECT_GE(chosen, loss_text(inst.text.with_word(c.position, c.replacement), inst.x_ben,
                                  inst.x_aug, enc));
    }
  }
}

TEST(TextAttack, TopKRestrictsPositions) {
  const auto enc = pool_encoder();
  RandomStream rng(9);
  const auto x = random_image(small_spec().image_shape, rng);
  const TextSample t({"dog", "runs", "sky", "red"});
  const FixedProposer all({{"cat"}, {"sits"}, {"tree"}, {"blue"}});
  AttackConfig cfg;
  cfg.top_k = 1;
  const auto res = text_attack_detailed(t, x, {}, enc, cfg, all);
  ASSERT_EQ(res.ranked_positions.size(), 1u);
  ASSERT_EQ(res.evaluated.size(), 1u);
  EXPECT_EQ(res.evaluated[0].position, res.ranked_positions[0]);
}

TEST(TextAttack, CandidateCapFollowsProposerOrder) {
  const auto enc = pool_encoder();
  RandomStream rng(10);
  const auto x = random_image(small_spec().image_shape, rng);
  const FixedProposer prop({{"cat", "cat", "sky", "tree"}});
  AttackConfig cfg;
  cfg.candidates_per_position = 2;
  const auto res = text_attack_detailed(TextSample({"dog"}), x, {}, enc, cfg, prop);
  ASSERT_EQ(res.evaluated.size(), 2u);
  EXPECT_EQ(res.evaluated[0].replacement, "cat");
  EXPECT_EQ(res.evaluated[1].replacement, "sky");
}

TEST(TextAttack, LexiconProposerUsesSynonyms) {
  const LexiconProposer prop(bundled_lexicon());
  EXPECT_EQ(prop.propose(TextSample({"a", "dog"}), 1), bundled_lexicon().synonyms("dog"));
  EXPECT_TRUE(prop.propose(TextSample({"a", "dog"}), 0).empty());
}
