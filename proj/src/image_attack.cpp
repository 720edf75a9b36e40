#include "saattack/image_attack.hpp"

#include "saattack/image_augment.hpp"

namespace saattack {

ImageTensor init_perturbation(const ImageTensor& x_ben, const AttackConfig& cfg,
                              RandomStream& rng) {
  cfg.validate();
  const double a = cfg.effective_init_amplitude();
  if (a == 0.0 || cfg.eps_x == 0.0) return x_ben;
  auto v = std::vector<double>(x_ben.values().begin(), x_ben.values().end());
  for (double& e : v) e += rng.uniform(-a, a);
  return project_linf(ImageTensor::clipped(x_ben.shape(), std::move(v)), x_ben, cfg.eps_x);
}

double loss_image(const ImageTensor& x, std::span<const EmbeddingVector> text_embeddings,
                  const DualEncoder& enc, std::span<const double> scale_factors) {
  double loss = 0.0;
  for (const auto& copy : scale_set(x, scale_factors)) {
    const auto e = enc.encode_image(copy);
    for (const auto& t : text_embeddings) loss -= cosine_similarity(t, e);
  }
  return loss;
}

double loss_image(const ImageTensor& x, const TextSample& t_ben, std::span<const TextSample> t_cat,
                  const DualEncoder& enc, std::span<const double> scale_factors) {
  std::vector<EmbeddingVector> texts;
  texts.reserve(1 + t_cat.size());
  texts.push_back(enc.encode_text(t_ben));
  for (const auto& t : t_cat) texts.push_back(enc.encode_text(t));
  return loss_image(x, texts, enc, scale_factors);
}

ImageArray loss_image_gradient(const ImageTensor& x,
                               std::span<const EmbeddingVector> text_embeddings,
                               const DualEncoder& enc, std::span<const double> scale_factors) {
  const std::vector<double> weights(text_embeddings.size(), -1.0);
  ImageArray g(x.shape());
  const auto copies = scale_set(x, scale_factors);
  for (std::size_t k = 0; k < copies.size(); ++k) {
    auto gc = weighted_cosine_gradient(enc, copies[k], text_embeddings, weights);
    // Back through the upsample, then the downsample.
    const auto mid = scaled_shape(x.shape(), scale_factors[k]);
    gc = resize_bilinear_vjp(resize_bilinear_vjp(gc, mid.height, mid.width), x.height(), x.width());
    for (std::size_t i = 0; i < g.values.size(); ++i) g.values[i] += gc.values[i];
  }
  return g;
}

ImageArray sign_step(const ImageTensor& x, const ImageArray& g, double alpha) {
  if (g.shape != x.shape()) throw ShapeError("gradient shape does not match image");
  ImageArray out(x.shape());
  auto xv = x.values();
  for (std::size_t i = 0; i < xv.size(); ++i) {
    const double s = g.values[i] > 0.0 ? 1.0 : (g.values[i] < 0.0 ? -1.0 : 0.0);
    out.values[i] = xv[i] + alpha * s;
  }
  return out;
}

ImageTensor image_attack(const ImageTensor& x_ben, const TextSample& t_ben,
                         std::span<const TextSample> t_cat, const DualEncoder& enc,
                         const AttackConfig& cfg, RandomStream& rng,
                         const ImageAttackObserver& observer) {
  cfg.validate();
  if (!enc.supports_image_gradients()) {
    throw CapabilityError("image attack needs an encoder with image gradients ('" +
                          enc.describe() + "')");
  }
  ImageAttackState state{init_perturbation(x_ben, cfg, rng), 0, {}};
  state.text_embeddings.reserve(1 + t_cat.size());
  state.text_embeddings.push_back(enc.encode_text(t_ben));
  for (const auto& t : t_cat) state.text_embeddings.push_back(enc.encode_text(t));
  if (observer) observer(state, ImageArray{});

  for (int it = 1; it <= cfg.iterations; ++it) {
    const auto g = loss_image_gradient(state.x_adv, state.text_embeddings, enc, cfg.scale_factors);
    auto stepped = sign_step(state.x_adv, g, cfg.alpha);
    state.x_adv = project_linf(ImageTensor::clipped(x_ben.shape(), stepped.values), x_ben, cfg.eps_x);
    state.iteration = it;
    if (observer) observer(state, stepped);
  }
  return state.x_adv;
}

}  // namespace saattack
