#include "saattack/io.hpp"

#include <png.h>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>

#include <nlohmann/json.hpp>

namespace saattack {

namespace {

// Releases libpng's simplified-API state on every exit path.
struct PngImage {
  png_image img{};
  PngImage() {
    img.version = PNG_IMAGE_VERSION;
  }
  ~PngImage() { png_image_free(&img); }
  PngImage(const PngImage&) = delete;
  PngImage& operator=(const PngImage&) = delete;
};

std::uint8_t to_byte(double v) {
  return static_cast<std::uint8_t>(std::lround(std::clamp(v, 0.0, 1.0) * 255.0));
}

}  // namespace

ImageTensor read_png(const std::filesystem::path& path) {
  PngImage p;
  if (!png_image_begin_read_from_file(&p.img, path.string().c_str())) {
    throw ConfigError("cannot decode PNG " + path.string() + ": " + p.img.message);
  }
  const bool color = (p.img.format & PNG_FORMAT_FLAG_COLOR) != 0;
  p.img.format = color ? PNG_FORMAT_RGB : PNG_FORMAT_GRAY;
  const int channels = color ? 3 : 1;
  std::vector<std::uint8_t> buf(PNG_IMAGE_SIZE(p.img));
  if (!png_image_finish_read(&p.img, nullptr, buf.data(), 0, nullptr)) {
    throw ConfigError("cannot decode PNG " + path.string() + ": " + p.img.message);
  }
  const ImageShape shape{static_cast<int>(p.img.height), static_cast<int>(p.img.width), channels};
  std::vector<double> v(buf.size());
  for (std::size_t i = 0; i < buf.size(); ++i) v[i] = buf[i] / 255.0;
  return ImageTensor(shape, std::move(v));
}

void write_png(const std::filesystem::path& path, const ImageTensor& x) {
  PngImage p;
  p.img.width = static_cast<png_uint_32>(x.width());
  p.img.height = static_cast<png_uint_32>(x.height());
  p.img.format = x.channels() == 3 ? PNG_FORMAT_RGB : PNG_FORMAT_GRAY;
  std::vector<std::uint8_t> buf(x.size());
  auto v = x.values();
  for (std::size_t i = 0; i < buf.size(); ++i) buf[i] = to_byte(v[i]);
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  if (!png_image_write_to_file(&p.img, path.string().c_str(), 0, buf.data(), 0, nullptr)) {
    throw Error("cannot write PNG " + path.string() + ": " + p.img.message);
  }
}

ImageTensor quantize(const ImageTensor& x) {
  std::vector<double> v(x.size());
  auto in = x.values();
  for (std::size_t i = 0; i < v.size(); ++i) v[i] = to_byte(in[i]) / 255.0;
  return ImageTensor(x.shape(), std::move(v));
}

std::vector<ManifestEntry> parse_manifest(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read manifest " + path.string());
  std::vector<ManifestEntry> out;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    const auto where = path.string() + ":" + std::to_string(lineno);
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(line);
    } catch (const nlohmann::json::exception& e) {
      throw ConfigError(where + ": invalid JSON: " + e.what());
    }
    if (!j.is_object() || !j.contains("id") || !j["id"].is_string() || !j.contains("image") ||
        !j["image"].is_string() || !j.contains("captions") || !j["captions"].is_array()) {
      throw ConfigError(where + ": expected {\"id\": str, \"image\": str, \"captions\": [str]}");
    }
    ManifestEntry e;
    e.id = j["id"].get<std::string>();
    e.image = j["image"].get<std::string>();
    for (const auto& c : j["captions"]) {
      if (!c.is_string()) throw ConfigError(where + " (entry '" + e.id + "'): caption is not a string");
      e.captions.push_back(c.get<std::string>());
    }
    out.push_back(std::move(e));
  }
  return out;
}

void write_manifest(const std::filesystem::path& path, const std::vector<ManifestEntry>& entries) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path);
  if (!out) throw Error("cannot write manifest " + path.string());
  for (const auto& e : entries) {
    nlohmann::ordered_json j;
    j["id"] = e.id;
    j["image"] = e.image.generic_string();
    j["captions"] = e.captions;
    out << j.dump() << '\n';
  }
}

std::vector<EvalSample> ingest_dataset(const std::filesystem::path& manifest) {
  const auto entries = parse_manifest(manifest);
  if (entries.empty()) throw ConfigError("manifest " + manifest.string() + " has no entries");
  const auto base = manifest.parent_path();
  std::set<std::string> ids;
  std::vector<EvalSample> out;
  out.reserve(entries.size());
  for (const auto& e : entries) {
    auto fail = [&](const std::string& m) -> void {
      throw ConfigError("dataset entry '" + e.id + "': " + m);
    };
    if (e.id.empty()) fail("empty id");
    if (!ids.insert(e.id).second) fail("duplicate id");
    if (e.captions.empty()) fail("no captions");
    const auto img_path = e.image.is_absolute() ? e.image : base / e.image;
    if (!std::filesystem::exists(img_path)) fail("image file " + img_path.string() + " not found");
    std::vector<TextSample> caps;
    for (const auto& c : e.captions) {
      try {
        caps.push_back(TextSample::tokenize(c));
      } catch (const Error&) {
        fail("empty caption");
      }
    }
    try {
      out.push_back({e.id, read_png(img_path), std::move(caps)});
    } catch (const Error& err) {
      fail(err.what());
    }
  }
  return out;
}

}  // namespace saattack
