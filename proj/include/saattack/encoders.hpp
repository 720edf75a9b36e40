#pragma once

// Dual-encoder abstraction consumed by every attack and by retrieval, plus a
// pair of toy encoders with closed-form gradients.
//
// A real vision-language model plugs in by implementing DualEncoder:
// encode_image, encode_text and, for white-box image attacks, image_vjp
// (the vector-Jacobian product of encode_image). Nothing else in the library
// depends on how embeddings are produced.

#include <cstdint>
#include <filesystem>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "saattack/core.hpp"

namespace saattack {

/// Finite real vector in an encoder's embedding space.
class EmbeddingVector {
 public:
  explicit EmbeddingVector(std::vector<double> values);

  std::size_t dim() const { return values_.size(); }
  std::span<const double> values() const { return values_; }
  double operator[](std::size_t i) const { return values_[i]; }
  double norm() const;

  bool operator==(const EmbeddingVector&) const = default;

 private:
  std::vector<double> values_;
};

class DualEncoder {
 public:
  virtual ~DualEncoder() = default;

  virtual std::size_t embedding_dim() const = 0;
  virtual bool supports_image_gradients() const { return false; }
  /// Short human-readable identity, recorded in reports.
  virtual std::string describe() const = 0;

  virtual EmbeddingVector encode_image(const ImageTensor& x) const = 0;
  virtual EmbeddingVector encode_text(const TextSample& t) const = 0;

  /// Returns J^T * cotangent, where J is the Jacobian of encode_image at x.
  /// The default throws CapabilityError.
  virtual ImageArray image_vjp(const ImageTensor& x,
                               std::span<const double> cotangent) const;
};

/// Norms below this are treated as zero by the cosine routines.
inline constexpr double kNormTolerance = 1e-12;

/// u.v / (|u| |v|), clamped to [-1, 1]. Throws DegenerateInputError on a
/// zero-norm input and ShapeError on a dimension mismatch.
double cosine_similarity(const EmbeddingVector& u, const EmbeddingVector& v);

/// Gradient with respect to x of sum_j weights[j] * cos(encode_image(x), targets[j]).
ImageArray weighted_cosine_gradient(const DualEncoder& enc, const ImageTensor& x,
                                    std::span<const EmbeddingVector> targets,
                                    std::span<const double> weights);

// ---------------------------------------------------------------------------
// Toy encoders

/// Everything needed to rebuild a toy encoder bit-for-bit (together with
/// the vocabulary).
struct ToyEncoderSpec {
  std::uint64_t seed = 1;          // projection matrix
  int patch_size = 8;
  int embedding_dim = 32;
  ImageShape image_shape{32, 32, 3};
  std::uint64_t concept_seed = 0;  // shared "world" the text rows are tied to

  void validate() const;
  /// Number of pooled features: (H/p) * (W/p) * C.
  std::size_t feature_dim() const;
  bool operator==(const ToyEncoderSpec&) const = default;
};

/// Patch-mean pooling over non-overlapping p x p patches followed by a fixed
/// seeded Gaussian projection of the centred pooled features:
///   e = W (pool(x) - 0.5).
/// Affine in the pixels, so the Jacobian is constant.
class ToyImageEncoder {
 public:
  explicit ToyImageEncoder(const ToyEncoderSpec& spec);

  const ToyEncoderSpec& spec() const { return spec_; }

  /// Pooled features, ordered (patch row, patch col, channel).
  std::vector<double> pool(const ImageTensor& x) const;
  /// W (features - 0.5).
  std::vector<double> project(std::span<const double> features) const;
  EmbeddingVector encode(const ImageTensor& x) const;
  ImageArray vjp(const ImageTensor& x, std::span<const double> cotangent) const;

  /// Row-major embedding_dim x feature_dim.
  std::span<const double> projection() const { return projection_; }

 private:
  void check_input(const ImageTensor& x) const;

  ToyEncoderSpec spec_;
  std::vector<double> projection_;
};

/// Mean of per-token embedding rows; unknown tokens use the OOV row.
class ToyTextEncoder {
 public:
  ToyTextEncoder(std::map<std::string, std::vector<double>> rows, std::vector<double> oov_row);

  EmbeddingVector encode(const TextSample& t) const;
  const std::vector<double>& row(const std::string& token) const;
  bool contains(const std::string& token) const { return rows_.contains(token); }
  std::size_t dim() const { return oov_row_.size(); }

 private:
  std::map<std::string, std::vector<double>> rows_;
  std::vector<double> oov_row_;
};

/// Reserved token used for masking and for the OOV concept.
inline constexpr const char* kMaskToken = "[MASK]";

/// Pooled-feature "meaning" of a token in the toy world, uniform in [0,1]^F.
/// Depends only on (concept_seed, token, feature count), never on the
/// encoder seed, so independently seeded encoders see the same world.
std::vector<double> toy_concept(const ToyEncoderSpec& spec, const std::string& token);

/// Toy image and text encoders that share a projection: text row of token w
/// is W (concept(w) - 0.5), so an image whose pooled features equal the mean
/// concept of a caption embeds exactly onto that caption.
class ToyDualEncoder : public DualEncoder {
 public:
  ToyDualEncoder(const ToyEncoderSpec& spec, const std::vector<std::string>& vocabulary);

  std::size_t embedding_dim() const override;
  bool supports_image_gradients() const override { return true; }
  std::string describe() const override;

  EmbeddingVector encode_image(const ImageTensor& x) const override;
  EmbeddingVector encode_text(const TextSample& t) const override;
  ImageArray image_vjp(const ImageTensor& x, std::span<const double> cotangent) const override;

  const ToyImageEncoder& image_encoder() const { return image_; }
  const ToyTextEncoder& text_encoder() const { return text_; }
  const std::vector<std::string>& vocabulary() const { return vocabulary_; }

 private:
  ToyImageEncoder image_;
  ToyTextEncoder text_;
  std::vector<std::string> vocabulary_;
};

/// Renders an image for `caption` in the toy world: each patch is filled with
/// the mean concept of the caption's tokens plus uniform pixel noise of the
/// given amplitude, clipped to [0,1].
ImageTensor render_toy_image(const ToyEncoderSpec& spec, const TextSample& caption,
                             double noise, RandomStream& rng);

/// One token per line; blank lines and '#' comments ignored; duplicates
/// collapsed keeping first occurrence.
std::vector<std::string> load_vocabulary(const std::filesystem::path& path);
std::vector<std::string> parse_vocabulary(const std::string& text);

}  // namespace saattack
