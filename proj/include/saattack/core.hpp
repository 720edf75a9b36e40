#pragma once

// Shared value types for the attack library: images, texts, attack budgets,
// seeded randomness and the two budget primitives (l-inf projection and
// substitution edit count).

#include <cstddef>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace saattack {

// ---------------------------------------------------------------------------
// Errors

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Two tensors that must share a shape do not.
class ShapeError : public Error {
 public:
  using Error::Error;
};

/// Invalid configuration, or an input incompatible with a configured component.
class ConfigError : public Error {
 public:
  using Error::Error;
};

/// The encoder cannot provide the requested capability (e.g. image gradients).
class CapabilityError : public Error {
 public:
  using Error::Error;
};

/// Mathematically degenerate input, e.g. a zero-norm embedding.
class DegenerateInputError : public Error {
 public:
  using Error::Error;
};

// ---------------------------------------------------------------------------
// Shapes and images

struct ImageShape {
  int height = 0;
  int width = 0;
  int channels = 0;

  std::size_t size() const {
    return static_cast<std::size_t>(height) * width * channels;
  }
  bool operator==(const ImageShape&) const = default;
  std::string str() const;
};

/// Dense real array with an image shape and no range constraint. Used for
/// gradients and intermediate arithmetic.
struct ImageArray {
  ImageShape shape;
  std::vector<double> values;  // row-major (y, x, c)

  ImageArray() = default;
  explicit ImageArray(ImageShape s) : shape(s), values(s.size(), 0.0) {}
  ImageArray(ImageShape s, std::vector<double> v);

  double& at(int y, int x, int c) {
    return values[(static_cast<std::size_t>(y) * shape.width + x) * shape.channels + c];
  }
  double at(int y, int x, int c) const {
    return values[(static_cast<std::size_t>(y) * shape.width + x) * shape.channels + c];
  }
};

/// H x W x C intensities, every element in [0, 1], channels in {1, 3}.
///
/// Immutable once built. Construct either from values that already satisfy
/// the range invariant (checked) or through `clipped`, which clamps.
class ImageTensor {
 public:
  ImageTensor(ImageShape shape, std::vector<double> values);

  /// Clamps every element into [0, 1]; NaN is rejected.
  static ImageTensor clipped(ImageShape shape, std::vector<double> values);
  static ImageTensor filled(ImageShape shape, double value);

  const ImageShape& shape() const { return shape_; }
  int height() const { return shape_.height; }
  int width() const { return shape_.width; }
  int channels() const { return shape_.channels; }
  std::size_t size() const { return values_.size(); }

  std::span<const double> values() const { return values_; }
  double at(int y, int x, int c) const {
    return values_[(static_cast<std::size_t>(y) * shape_.width + x) * shape_.channels + c];
  }

  ImageArray to_array() const { return ImageArray(shape_, values_); }

  bool operator==(const ImageTensor&) const = default;

 private:
  ImageShape shape_;
  std::vector<double> values_;
};

/// max_i |a_i - b_i|; shapes must match.
double linf_distance(const ImageTensor& a, const ImageTensor& b);

// ---------------------------------------------------------------------------
// Text

/// Ordered, non-empty sequence of non-empty tokens without whitespace.
class TextSample {
 public:
  explicit TextSample(std::vector<std::string> words);

  /// Lowercases, splits on whitespace and strips punctuation from token
  /// edges. Throws if nothing survives.
  static TextSample tokenize(std::string_view caption);

  const std::vector<std::string>& words() const { return words_; }
  std::size_t size() const { return words_.size(); }
  const std::string& operator[](std::size_t i) const { return words_[i]; }

  /// Copy with position `pos` replaced by `token`.
  TextSample with_word(std::size_t pos, std::string token) const;
  std::string join() const;

  bool operator==(const TextSample&) const = default;

 private:
  std::vector<std::string> words_;
};

// ---------------------------------------------------------------------------
// Configuration

struct AttackConfig {
  double eps_x = 2.0 / 255.0;  // l-inf image budget
  int eps_t = 1;               // max words changed per text-attack call
  double alpha = 0.5 / 255.0;  // PGD step size
  int iterations = 10;         // T
  int top_k = 10;              // important words examined
  int image_augmentations = 4; // A_x
  int text_augmentations = 4;  // A_t
  std::vector<double> scale_factors = {0.50, 0.75, 1.00, 1.25, 1.50};
  std::uint64_t seed = 0;
  /// Amplitude of the uniform initial perturbation; negative means eps_x.
  double init_amplitude = -1.0;
  /// Proposals scored per word position in the text attack; 0 means all.
  int candidates_per_position = 0;

  /// Throws ConfigError on the first violated invariant.
  void validate() const;
  double effective_init_amplitude() const {
    return init_amplitude < 0.0 ? eps_x : init_amplitude;
  }
  bool operator==(const AttackConfig&) const = default;
};

// ---------------------------------------------------------------------------
// Randomness

/// Seeded stream with a bit-exact, platform-independent draw sequence.
///
/// Not thread-safe; give each worker its own stream via `fork` or
/// `derive_seed`.
class RandomStream {
 public:
  explicit RandomStream(std::uint64_t seed);

  std::uint64_t seed() const { return seed_; }

  std::uint64_t next_u64();
  /// Uniform on [0, 1) with 53 random bits.
  double uniform();
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
  /// Uniform integer on [0, n); n must be > 0.
  std::size_t uniform_index(std::size_t n);
  /// Standard normal (Box-Muller, one value per call).
  double normal();

  /// Independent substream determined by (seed, tag) only.
  RandomStream fork(std::uint64_t tag) const;

 private:
  std::uint64_t seed_;
  std::uint64_t state_[4];
};

std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t tag);
/// FNV-1a; stable across platforms, unlike std::hash.
std::uint64_t stable_hash(std::string_view s);

// ---------------------------------------------------------------------------
// Budget primitives

/// Projects `x` onto B[ref, eps] intersected with [0, 1].
ImageTensor project_linf(const ImageTensor& x, const ImageTensor& ref, double eps);

/// Number of positions where the tokens differ. Substitution-only edit
/// model: unequal lengths are rejected.
int words_changed(const TextSample& a, const TextSample& b);

}  // namespace saattack
