#pragma once

// Sign-gradient PGD on the image that pushes its scaled copies away from the
// benign caption and a set of augmented captions, inside B[x_ben, eps_x].

#include <functional>
#include <span>
#include <vector>

#include "saattack/core.hpp"
#include "saattack/encoders.hpp"

namespace saattack {

struct ImageAttackState {
  ImageTensor x_adv;
  int iteration = 0;  // 0 = after initialisation
  std::vector<EmbeddingVector> text_embeddings;  // t_ben first, then t_cat
};

/// Called after initialisation (iteration 0, `stepped` empty) and after every
/// projected update with the pre-projection iterate.
using ImageAttackObserver =
    std::function<void(const ImageAttackState& state, const ImageArray& stepped)>;

/// x_ben + U(-a, a) elementwise, a = cfg.effective_init_amplitude(), then
/// projected into B[x_ben, eps_x] and [0, 1].
ImageTensor init_perturbation(const ImageTensor& x_ben, const AttackConfig& cfg,
                              RandomStream& rng);

/// -sum over scaled copies x_i of [cos(f(t_ben), f(x_i)) + sum_j cos(f(t_cat[j]), f(x_i))].
double loss_image(const ImageTensor& x, const TextSample& t_ben, std::span<const TextSample> t_cat,
                  const DualEncoder& enc, std::span<const double> scale_factors);

/// Same loss with the text embeddings supplied.
double loss_image(const ImageTensor& x, std::span<const EmbeddingVector> text_embeddings,
                  const DualEncoder& enc, std::span<const double> scale_factors);

/// Gradient of loss_image: per-copy gradients evaluated at each rescaled
/// copy and summed (the resize itself is not differentiated).
ImageArray loss_image_gradient(const ImageTensor& x,
                               std::span<const EmbeddingVector> text_embeddings,
                               const DualEncoder& enc, std::span<const double> scale_factors);

/// x + alpha * sign(g), without clipping.
ImageArray sign_step(const ImageTensor& x, const ImageArray& g, double alpha);

/// Exactly cfg.iterations projected sign-gradient ascent steps on loss_image.
ImageTensor image_attack(const ImageTensor& x_ben, const TextSample& t_ben,
                         std::span<const TextSample> t_cat, const DualEncoder& enc,
                         const AttackConfig& cfg, RandomStream& rng,
                         const ImageAttackObserver& observer = {});

}  // namespace saattack
