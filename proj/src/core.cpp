#include "saattack/core.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <numbers>
#include <sstream>

namespace saattack {

std::string ImageShape::str() const {
  std::ostringstream os;
  os << height << "x" << width << "x" << channels;
  return os.str();
}

ImageArray::ImageArray(ImageShape s, std::vector<double> v)
    : shape(s), values(std::move(v)) {
  if (values.size() != shape.size()) {
    throw ShapeError("array of " + std::to_string(values.size()) +
                     " values does not match shape " + shape.str());
  }
}

namespace {

void check_shape(const ImageShape& s) {
  if (s.height < 1 || s.width < 1 || (s.channels != 1 && s.channels != 3)) {
    throw ShapeError("invalid image shape " + s.str());
  }
}

}  // namespace

ImageTensor::ImageTensor(ImageShape shape, std::vector<double> values)
    : shape_(shape), values_(std::move(values)) {
  check_shape(shape_);
  if (values_.size() != shape_.size()) {
    throw ShapeError("image of " + std::to_string(values_.size()) +
                     " values does not match shape " + shape_.str());
  }
  for (double v : values_) {
    if (!(v >= 0.0 && v <= 1.0)) {
      throw Error("image intensity " + std::to_string(v) + " outside [0,1]");
    }
  }
}

ImageTensor ImageTensor::clipped(ImageShape shape, std::vector<double> values) {
  for (double& v : values) {
    if (std::isnan(v)) throw Error("NaN image intensity");
    v = std::clamp(v, 0.0, 1.0);
  }
  return ImageTensor(shape, std::move(values));
}

ImageTensor ImageTensor::filled(ImageShape shape, double value) {
  check_shape(shape);
  return ImageTensor(shape, std::vector<double>(shape.size(), value));
}

double linf_distance(const ImageTensor& a, const ImageTensor& b) {
  if (a.shape() != b.shape()) {
    throw ShapeError("shape mismatch: " + a.shape().str() + " vs " + b.shape().str());
  }
  double m = 0.0;
  auto av = a.values();
  auto bv = b.values();
  for (std::size_t i = 0; i < av.size(); ++i) m = std::max(m, std::abs(av[i] - bv[i]));
  return m;
}

// ---------------------------------------------------------------------------

TextSample::TextSample(std::vector<std::string> words) : words_(std::move(words)) {
  if (words_.empty()) throw Error("text must contain at least one word");
  for (const auto& w : words_) {
    if (w.empty()) throw Error("text contains an empty token");
    for (unsigned char ch : w) {
      if (std::isspace(ch)) throw Error("token '" + w + "' contains whitespace");
    }
  }
}

TextSample TextSample::tokenize(std::string_view caption) {
  std::vector<std::string> out;
  std::string cur;
  auto flush = [&] {
    std::size_t b = 0, e = cur.size();
    while (b < e && std::ispunct(static_cast<unsigned char>(cur[b]))) ++b;
    while (e > b && std::ispunct(static_cast<unsigned char>(cur[e - 1]))) --e;
    if (e > b) out.push_back(cur.substr(b, e - b));
    cur.clear();
  };
  for (char c : caption) {
    auto uc = static_cast<unsigned char>(c);
    if (std::isspace(uc)) {
      flush();
    } else {
      cur.push_back(static_cast<char>(std::tolower(uc)));
    }
  }
  flush();
  if (out.empty()) throw Error("caption has no tokens: '" + std::string(caption) + "'");
  return TextSample(std::move(out));
}

TextSample TextSample::with_word(std::size_t pos, std::string token) const {
  if (pos >= words_.size()) throw Error("word position out of range");
  auto w = words_;
  w[pos] = std::move(token);
  return TextSample(std::move(w));
}

std::string TextSample::join() const {
  std::string s;
  for (std::size_t i = 0; i < words_.size(); ++i) {
    if (i) s += ' ';
    s += words_[i];
  }
  return s;
}

// ---------------------------------------------------------------------------

void AttackConfig::validate() const {
  auto fail = [](const std::string& m) { throw ConfigError("invalid attack config: " + m); };
  if (!(eps_x >= 0.0)) fail("eps_x must be >= 0");
  if (iterations < 0) fail("T must be >= 0");
  if (iterations > 0 && !(alpha > 0.0)) fail("alpha must be > 0 when T > 0");
  if (top_k < 1) fail("k must be >= 1");
  if (eps_t < 1) fail("eps_t must be >= 1");
  if (image_augmentations < 0) fail("A_x must be >= 0");
  if (text_augmentations < 0) fail("A_t must be >= 0");
  if (candidates_per_position < 0) fail("candidates_per_position must be >= 0");
  if (scale_factors.empty()) fail("scale_factors must be non-empty");
  for (double f : scale_factors) {
    if (!(f > 0.0) || !std::isfinite(f)) fail("scale factors must be finite and > 0");
  }
}

// ---------------------------------------------------------------------------

namespace {

std::uint64_t splitmix64(std::uint64_t& x) {
  std::uint64_t z = (x += 0x9e3779b97f4a7c15ULL);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

std::uint64_t rotl(std::uint64_t x, int k) { return (x << k) | (x >> (64 - k)); }

}  // namespace

RandomStream::RandomStream(std::uint64_t seed) : seed_(seed) {
  std::uint64_t s = seed;
  for (auto& w : state_) w = splitmix64(s);
}

// xoshiro256**
std::uint64_t RandomStream::next_u64() {
  const std::uint64_t result = rotl(state_[1] * 5, 7) * 9;
  const std::uint64_t t = state_[1] << 17;
  state_[2] ^= state_[0];
  state_[3] ^= state_[1];
  state_[1] ^= state_[2];
  state_[0] ^= state_[3];
  state_[2] ^= t;
  state_[3] = rotl(state_[3], 45);
  return result;
}

double RandomStream::uniform() {
  return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
}

std::size_t RandomStream::uniform_index(std::size_t n) {
  if (n == 0) throw Error("uniform_index over an empty range");
  const std::uint64_t bound = n;
  // Rejection keeps the draw unbiased.
  const std::uint64_t limit = UINT64_MAX - UINT64_MAX % bound;
  std::uint64_t r;
  do {
    r = next_u64();
  } while (r >= limit);
  return static_cast<std::size_t>(r % bound);
}

double RandomStream::normal() {
  double u1 = uniform();
  while (u1 <= 0.0) u1 = uniform();
  const double u2 = uniform();
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

RandomStream RandomStream::fork(std::uint64_t tag) const {
  return RandomStream(derive_seed(seed_, tag));
}

std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t tag) {
  std::uint64_t s = seed ^ (tag * 0xd1b54a32d192ed03ULL);
  splitmix64(s);
  return splitmix64(s);
}

std::uint64_t stable_hash(std::string_view s) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

// ---------------------------------------------------------------------------

namespace {

// Bounds are nudged inward so that the computed |bound - ref| never exceeds
// eps after rounding.
double upper_bound(double ref, double eps) {
  double hi = std::min(ref + eps, 1.0);
  while (hi - ref > eps) hi = std::nextafter(hi, ref);
  return hi;
}

double lower_bound(double ref, double eps) {
  double lo = std::max(ref - eps, 0.0);
  while (ref - lo > eps) lo = std::nextafter(lo, ref);
  return lo;
}

}  // namespace

ImageTensor project_linf(const ImageTensor& x, const ImageTensor& ref, double eps) {
  if (x.shape() != ref.shape()) {
    throw ShapeError("project_linf shape mismatch: " + x.shape().str() + " vs " +
                     ref.shape().str());
  }
  if (!(eps >= 0.0)) throw ConfigError("project_linf requires eps >= 0");
  auto xv = x.values();
  auto rv = ref.values();
  std::vector<double> out(xv.size());
  for (std::size_t i = 0; i < xv.size(); ++i) {
    out[i] = std::clamp(xv[i], lower_bound(rv[i], eps), upper_bound(rv[i], eps));
  }
  return ImageTensor(x.shape(), std::move(out));
}

int words_changed(const TextSample& a, const TextSample& b) {
  if (a.size() != b.size()) {
    throw Error("words_changed requires equal-length texts (got " +
                std::to_string(a.size()) + " and " + std::to_string(b.size()) + ")");
  }
  int n = 0;
  for (std::size_t i = 0; i < a.size(); ++i) n += a[i] != b[i];
  return n;
}

}  // namespace saattack
