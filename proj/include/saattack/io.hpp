#pragma once

// On-disk formats: 8-bit PNG images, JSON-lines dataset manifests.

#include <filesystem>
#include <string>
#include <vector>

#include "saattack/core.hpp"
#include "saattack/retrieval.hpp"

namespace saattack {

/// Decodes an 8-bit gray or RGB PNG into intensities v / 255. Alpha is
/// composited away; palette images are expanded to RGB.
ImageTensor read_png(const std::filesystem::path& path);

/// Quantizes to round(255 v) and writes an 8-bit gray or RGB PNG.
void write_png(const std::filesystem::path& path, const ImageTensor& x);

/// round(255 v) / 255 per element, i.e. what write-then-read produces.
ImageTensor quantize(const ImageTensor& x);

struct ManifestEntry {
  std::string id;
  std::filesystem::path image;  // as written in the manifest
  std::vector<std::string> captions;
};

/// One JSON object per non-blank line:
///   {"id": "...", "image": "relative/path.png", "captions": ["...", ...]}
std::vector<ManifestEntry> parse_manifest(const std::filesystem::path& path);

void write_manifest(const std::filesystem::path& path, const std::vector<ManifestEntry>& entries);

/// Parses the manifest and decodes every entry. Images resolve relative to
/// the manifest's directory; captions are tokenized. Any bad entry aborts
/// with a ConfigError naming the entry id.
std::vector<EvalSample> ingest_dataset(const std::filesystem::path& manifest);

}  // namespace saattack
