// Copyright 2026 The qtab Authors. All Rights Reserved.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef QTAB_DATA_H_
#define QTAB_DATA_H_

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "qtab/image.h"

namespace qtab {

struct LabeledImage {
  RawImage image;
  int label = 0;
  std::string path;  // informational; empty for in-memory images
};

class Dataset {
 public:
  // class_count < 0 infers max(label) + 1. Throws DatasetError when empty or
  // when a label falls outside [0, class_count).
  explicit Dataset(std::vector<LabeledImage> items, int class_count = -1);

  const std::vector<LabeledImage>& items() const { return items_; }
  const LabeledImage& operator[](std::size_t i) const { return items_[i]; }
  std::size_t size() const { return items_.size(); }
  int class_count() const { return class_count_; }
  // Sum of width * height * 3 over all images.
  std::uint64_t raw_bytes() const { return raw_bytes_; }
  // FNV-1a over dimensions, pixels and labels, as 16 hex digits.
  const std::string& hash() const { return hash_; }

  Dataset subset(std::span<const std::size_t> indices) const;

 private:
  std::vector<LabeledImage> items_;
  int class_count_ = 0;
  std::uint64_t raw_bytes_ = 0;
  std::string hash_;
};

// PPM (P6) or JPEG, sniffed from the leading bytes. JPEG inputs are decoded
// with the toolkit decoder and treated as ground-truth pixels.
RawImage load_image(const std::filesystem::path& path);

struct ManifestEntry {
  std::string path;
  int label = 0;
};

struct Manifest {
  std::filesystem::path root;
  std::vector<ManifestEntry> entries;
};

// JSON lines {"path": str, "label": int}; relative paths resolve against the
// manifest's directory. Blank lines are skipped. Throws DatasetError with the
// 1-based line number on malformed input.
Manifest read_manifest(const std::filesystem::path& path);
void write_manifest(const std::filesystem::path& path, const Manifest& manifest);

// Reads the manifest and decodes every image (in parallel).
Dataset load_manifest(const std::filesystem::path& path, int threads = 0);

struct SyntheticCorpusSpec {
  int n_classes = 20;
  int images_per_class = 10;
  int width = 64;
  int height = 64;
  std::uint64_t seed = 1;

  void validate() const;
};

// Class-conditional images for the proxy classifier: each class has its own
// low/mid band energy split, plus class-independent high band texture,
// per-block DC drift and a constant colour tint. Every image is regenerated
// until the proxy labels it correctly, so uncompressed proxy accuracy is 1.
Dataset synthesize_dataset(const SyntheticCorpusSpec& spec);

// Writes root/class_<label>/<n>.ppm and root/manifest.jsonl. Returns the
// manifest path.
std::filesystem::path generate_synthetic(const SyntheticCorpusSpec& spec,
                                         const std::filesystem::path& root);

}  // namespace qtab

#endif  // QTAB_DATA_H_
