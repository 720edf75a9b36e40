#include "saattack/encoders.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>
#include <unordered_set>

namespace saattack {

EmbeddingVector::EmbeddingVector(std::vector<double> values) : values_(std::move(values)) {
  if (values_.empty()) throw Error("embedding must have dimension >= 1");
  for (double v : values_) {
    if (!std::isfinite(v)) throw Error("embedding contains a non-finite entry");
  }
}

double EmbeddingVector::norm() const {
  double s = 0.0;
  for (double v : values_) s += v * v;
  return std::sqrt(s);
}

ImageArray DualEncoder::image_vjp(const ImageTensor&, std::span<const double>) const {
  throw CapabilityError("encoder '" + describe() + "' does not provide image gradients");
}

double cosine_similarity(const EmbeddingVector& u, const EmbeddingVector& v) {
  if (u.dim() != v.dim()) {
    throw ShapeError("cosine_similarity dimension mismatch: " + std::to_string(u.dim()) +
                     " vs " + std::to_string(v.dim()));
  }
  double dot = 0.0, uu = 0.0, vv = 0.0;
  for (std::size_t i = 0; i < u.dim(); ++i) {
    dot += u[i] * v[i];
    uu += u[i] * u[i];
    vv += v[i] * v[i];
  }
  const double nu = std::sqrt(uu);
  const double nv = std::sqrt(vv);
  if (nu <= kNormTolerance || nv <= kNormTolerance) {
    throw DegenerateInputError("cosine similarity of a zero-norm embedding");
  }
  return std::clamp(dot / (nu * nv), -1.0, 1.0);
}

ImageArray weighted_cosine_gradient(const DualEncoder& enc, const ImageTensor& x,
                                    std::span<const EmbeddingVector> targets,
                                    std::span<const double> weights) {
  if (!enc.supports_image_gradients()) {
    throw CapabilityError("encoder '" + enc.describe() + "' does not provide image gradients");
  }
  if (targets.empty() || targets.size() != weights.size()) {
    throw Error("weighted_cosine_gradient needs equally many (>= 1) targets and weights");
  }
  const EmbeddingVector e = enc.encode_image(x);
  const double ne = e.norm();
  if (ne <= kNormTolerance) throw DegenerateInputError("image embedding has zero norm");

  // d cos(e, v) / de = v / (|e||v|) - cos(e, v) e / |e|^2
  std::vector<double> cot(e.dim(), 0.0);
  for (std::size_t j = 0; j < targets.size(); ++j) {
    const auto& v = targets[j];
    if (v.dim() != e.dim()) throw ShapeError("target embedding dimension mismatch");
    if (weights[j] == 0.0) continue;
    const double nv = v.norm();
    if (nv <= kNormTolerance) throw DegenerateInputError("target embedding has zero norm");
    double dot = 0.0;
    for (std::size_t i = 0; i < e.dim(); ++i) dot += e[i] * v[i];
    const double c = dot / (ne * nv);
    for (std::size_t i = 0; i < e.dim(); ++i) {
      cot[i] += weights[j] * (v[i] / (ne * nv) - c * e[i] / (ne * ne));
    }
  }
  return enc.image_vjp(x, cot);
}

// ---------------------------------------------------------------------------

void ToyEncoderSpec::validate() const {
  if (patch_size < 1) throw ConfigError("toy encoder patch size must be >= 1");
  if (embedding_dim < 1) throw ConfigError("toy encoder embedding_dim must be >= 1");
  const auto& s = image_shape;
  if (s.height < 1 || s.width < 1 || (s.channels != 1 && s.channels != 3)) {
    throw ConfigError("toy encoder image shape " + s.str() + " is invalid");
  }
  if (s.height % patch_size != 0 || s.width % patch_size != 0) {
    throw ConfigError("toy encoder image shape " + s.str() + " is not divisible by patch size " +
                      std::to_string(patch_size));
  }
}

std::size_t ToyEncoderSpec::feature_dim() const {
  return static_cast<std::size_t>(image_shape.height / patch_size) *
         (image_shape.width / patch_size) * image_shape.channels;
}

ToyImageEncoder::ToyImageEncoder(const ToyEncoderSpec& spec) : spec_(spec) {
  spec_.validate();
  const std::size_t f = spec_.feature_dim();
  RandomStream rng(derive_seed(spec_.seed, stable_hash("toy-image-projection")));
  projection_.resize(static_cast<std::size_t>(spec_.embedding_dim) * f);
  const double scale = 1.0 / std::sqrt(static_cast<double>(f));
  for (double& w : projection_) w = rng.normal() * scale;
}

void ToyImageEncoder::check_input(const ImageTensor& x) const {
  if (x.shape() != spec_.image_shape) {
    throw ShapeError("toy encoder expects images of shape " + spec_.image_shape.str() +
                      ", got " + x.shape().str());
  }
}

std::vector<double> ToyImageEncoder::pool(const ImageTensor& x) const {
  check_input(x);
  const int p = spec_.patch_size;
  const int gh = x.height() / p, gw = x.width() / p, c = x.channels();
  std::vector<double> feats(spec_.feature_dim(), 0.0);
  const double inv = 1.0 / (static_cast<double>(p) * p);
  for (int py = 0; py < gh; ++py) {
    for (int px = 0; px < gw; ++px) {
      for (int ch = 0; ch < c; ++ch) {
        double s = 0.0;
        for (int y = py * p; y < (py + 1) * p; ++y) {
          for (int xx = px * p; xx < (px + 1) * p; ++xx) s += x.at(y, xx, ch);
        }
        feats[(static_cast<std::size_t>(py) * gw + px) * c + ch] = s * inv;
      }
    }
  }
  return feats;
}

std::vector<double> ToyImageEncoder::project(std::span<const double> features) const {
  const std::size_t f = spec_.feature_dim();
  if (features.size() != f) throw ShapeError("pooled feature length mismatch");
  std::vector<double> e(spec_.embedding_dim, 0.0);
  for (int i = 0; i < spec_.embedding_dim; ++i) {
    const double* row = projection_.data() + static_cast<std::size_t>(i) * f;
    double s = 0.0;
    for (std::size_t j = 0; j < f; ++j) s += row[j] * (features[j] - 0.5);
    e[i] = s;
  }
  return e;
}

EmbeddingVector ToyImageEncoder::encode(const ImageTensor& x) const {
  return EmbeddingVector(project(pool(x)));
}

ImageArray ToyImageEncoder::vjp(const ImageTensor& x, std::span<const double> cotangent) const {
  check_input(x);
  if (cotangent.size() != static_cast<std::size_t>(spec_.embedding_dim)) {
    throw ShapeError("cotangent dimension mismatch");
  }
  const std::size_t f = spec_.feature_dim();
  std::vector<double> gfeat(f, 0.0);
  for (int i = 0; i < spec_.embedding_dim; ++i) {
    const double* row = projection_.data() + static_cast<std::size_t>(i) * f;
    for (std::size_t j = 0; j < f; ++j) gfeat[j] += row[j] * cotangent[i];
  }
  const int p = spec_.patch_size;
  const int gw = x.width() / p, c = x.channels();
  const double inv = 1.0 / (static_cast<double>(p) * p);
  ImageArray g(x.shape());
  for (int y = 0; y < x.height(); ++y) {
    for (int xx = 0; xx < x.width(); ++xx) {
      for (int ch = 0; ch < c; ++ch) {
        g.at(y, xx, ch) = gfeat[(static_cast<std::size_t>(y / p) * gw + xx / p) * c + ch] * inv;
      }
    }
  }
  return g;
}

// ---------------------------------------------------------------------------

ToyTextEncoder::ToyTextEncoder(std::map<std::string, std::vector<double>> rows,
                               std::vector<double> oov_row)
    : rows_(std::move(rows)), oov_row_(std::move(oov_row)) {
  if (oov_row_.empty()) throw ConfigError("toy text encoder needs a non-empty OOV row");
  for (const auto& [tok, row] : rows_) {
    if (row.size() != oov_row_.size()) {
      throw ConfigError("toy text encoder row for '" + tok + "' has the wrong dimension");
    }
  }
}

const std::vector<double>& ToyTextEncoder::row(const std::string& token) const {
  auto it = rows_.find(token);
  return it == rows_.end() ? oov_row_ : it->second;
}

EmbeddingVector ToyTextEncoder::encode(const TextSample& t) const {
  std::vector<double> acc(dim(), 0.0);
  for (const auto& w : t.words()) {
    const auto& r = row(w);
    for (std::size_t i = 0; i < acc.size(); ++i) acc[i] += r[i];
  }
  const double inv = 1.0 / static_cast<double>(t.size());
  for (double& v : acc) v *= inv;
  return EmbeddingVector(std::move(acc));
}

std::vector<double> toy_concept(const ToyEncoderSpec& spec, const std::string& token) {
  RandomStream rng(derive_seed(spec.concept_seed, stable_hash(token)));
  std::vector<double> c(spec.feature_dim());
  for (double& v : c) v = rng.uniform();
  return c;
}

namespace {

ToyTextEncoder build_text_encoder(const ToyImageEncoder& img,
                                  const std::vector<std::string>& vocabulary) {
  std::map<std::string, std::vector<double>> rows;
  for (const auto& w : vocabulary) {
    if (w == kMaskToken) throw ConfigError("vocabulary must not contain the mask token");
    rows.emplace(w, img.project(toy_concept(img.spec(), w)));
  }
  return ToyTextEncoder(std::move(rows), img.project(toy_concept(img.spec(), kMaskToken)));
}

}  // namespace

ToyDualEncoder::ToyDualEncoder(const ToyEncoderSpec& spec,
                               const std::vector<std::string>& vocabulary)
    : image_(spec), text_(build_text_encoder(image_, vocabulary)), vocabulary_(vocabulary) {}

std::size_t ToyDualEncoder::embedding_dim() const {
  return static_cast<std::size_t>(image_.spec().embedding_dim);
}

std::string ToyDualEncoder::describe() const {
  const auto& s = image_.spec();
  std::ostringstream os;
  os << "toy(seed=" << s.seed << ",patch=" << s.patch_size << ",dim=" << s.embedding_dim
     << ",shape=" << s.image_shape.str() << ",concept_seed=" << s.concept_seed << ")";
  return os.str();
}

EmbeddingVector ToyDualEncoder::encode_image(const ImageTensor& x) const {
  return image_.encode(x);
}

EmbeddingVector ToyDualEncoder::encode_text(const TextSample& t) const {
  return text_.encode(t);
}

ImageArray ToyDualEncoder::image_vjp(const ImageTensor& x,
                                     std::span<const double> cotangent) const {
  return image_.vjp(x, cotangent);
}

ImageTensor render_toy_image(const ToyEncoderSpec& spec, const TextSample& caption,
                             double noise, RandomStream& rng) {
  spec.validate();
  std::vector<double> mean(spec.feature_dim(), 0.0);
  for (const auto& w : caption.words()) {
    const auto c = toy_concept(spec, w);
    for (std::size_t i = 0; i < mean.size(); ++i) mean[i] += c[i];
  }
  for (double& v : mean) v /= static_cast<double>(caption.size());

  const auto& s = spec.image_shape;
  const int p = spec.patch_size;
  const int gw = s.width / p;
  std::vector<double> px(s.size());
  std::size_t idx = 0;
  for (int y = 0; y < s.height; ++y) {
    for (int x = 0; x < s.width; ++x) {
      for (int ch = 0; ch < s.channels; ++ch) {
        const double base = mean[(static_cast<std::size_t>(y / p) * gw + x / p) * s.channels + ch];
        px[idx++] = base + rng.uniform(-noise, noise);
      }
    }
  }
  return ImageTensor::clipped(s, std::move(px));
}

std::vector<std::string> parse_vocabulary(const std::string& text) {
  std::vector<std::string> out;
  std::unordered_set<std::string> seen;
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) {
    if (auto h = line.find('#'); h != std::string::npos) line.erase(h);
    std::istringstream ls(line);
    std::string tok;
    while (ls >> tok) {
      if (seen.insert(tok).second) out.push_back(tok);
    }
  }
  return out;
}

std::vector<std::string> load_vocabulary(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read vocabulary file " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_vocabulary(ss.str());
}

}  // namespace saattack
