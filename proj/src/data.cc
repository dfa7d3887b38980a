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

#include "qtab/data.h"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <json.hpp>
#include <random>
#include <sstream>

#include "qtab/dct.h"
#include "qtab/error.h"
#include "qtab/jpeg.h"
#include "qtab/parallel.h"
#include "qtab/proxy_classifier.h"

namespace qtab {
namespace {

constexpr std::uint64_t kFnvOffset = 0xcbf29ce484222325ULL;
constexpr std::uint64_t kFnvPrime = 0x100000001b3ULL;

void fnv(std::uint64_t& h, const void* data, std::size_t n) {
  const auto* p = static_cast<const std::uint8_t*>(data);
  for (std::size_t i = 0; i < n; ++i) {
    h ^= p[i];
    h *= kFnvPrime;
  }
}

void fnv_u32(std::uint64_t& h, std::uint32_t v) {
  std::uint8_t b[4] = {static_cast<std::uint8_t>(v), static_cast<std::uint8_t>(v >> 8),
                       static_cast<std::uint8_t>(v >> 16), static_cast<std::uint8_t>(v >> 24)};
  fnv(h, b, 4);
}

// Mean of an exponential magnitude after the proxy's soft floor:
// E[max(X - f, 0)] = mu * exp(-f / mu). Solved for mu by bisection.
double exponential_scale_for(double target, double floor) {
  if (target <= 0.0) return 0.0;
  double lo = 0.0, hi = target + floor + 1.0;
  while (hi * std::exp(-floor / hi) < target) hi *= 2.0;
  for (int it = 0; it < 100; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (mid * std::exp(-floor / mid) < target) lo = mid; else hi = mid;
  }
  return 0.5 * (lo + hi);
}

// Texture level of the informative bands, the high-band nuisance scale and the
// DC random-walk step.
constexpr double kLevelMin = 40.0;
constexpr double kLevelSpan = 20.0;
constexpr double kHighMin = 30.0;
constexpr double kHighSpan = 20.0;
constexpr double kDcStep = 4.0;

RawImage synthesize_image(const SyntheticCorpusSpec& spec, const ProxyClassifier& proxy,
                          int label, int index, int attempt) {
  std::seed_seq seq{static_cast<std::uint32_t>(spec.seed), static_cast<std::uint32_t>(spec.seed >> 32),
                    static_cast<std::uint32_t>(label), static_cast<std::uint32_t>(index),
                    static_cast<std::uint32_t>(attempt)};
  std::mt19937_64 rng(seq);
  std::uniform_real_distribution<double> unit(0.0, 1.0);

  const ProxyConfig& cfg = proxy.config();
  std::array<double, 3> scale{};
  if (label != ProxyClassifier::kFlatClass) {
    const double level = kLevelMin + kLevelSpan * unit(rng);
    const auto& centroid = proxy.centroids()[label];
    for (int b = 0; b < 2; ++b) scale[b] = exponential_scale_for(level * centroid[b], cfg.noise_floor);
  }
  scale[2] = kHighMin + kHighSpan * unit(rng);
  std::array<double, 3> tint;
  for (double& t : tint) t = -20.0 + 40.0 * unit(rng);

  const int bw = spec.width / 8;
  const int bh = spec.height / 8;
  RawImage image(spec.width, spec.height);
  double level = 128.0;
  for (int by = 0; by < bh; ++by) {
    for (int bx = 0; bx < bw; ++bx) {
      level = std::clamp(level + (unit(rng) - 0.5) * kDcStep, 80.0, 176.0);
      Block coef{};
      for (int i = 1; i < kBlockSize; ++i) {
        const double mu = scale[static_cast<int>(cfg.bands.band_of_natural(i))];
        if (mu <= 0.0) continue;
        const double magnitude = -mu * std::log(1.0 - unit(rng));
        coef[i] = unit(rng) < 0.5 ? -magnitude : magnitude;
      }
      const Block spatial = inverse_dct(coef);
      for (int y = 0; y < 8; ++y) {
        std::uint8_t* px = image.row(8 * by + y) + 3 * 8 * bx;
        for (int x = 0; x < 8; ++x) {
          for (int ch = 0; ch < 3; ++ch) {
            const double v = std::round(level + spatial[8 * y + x] + tint[ch]);
            px[3 * x + ch] = static_cast<std::uint8_t>(std::clamp(v, 0.0, 255.0));
          }
        }
      }
    }
  }
  return image;
}

}  // namespace

Dataset::Dataset(std::vector<LabeledImage> items, int class_count) : items_(std::move(items)) {
  if (items_.empty()) throw DatasetError("dataset is empty");
  int max_label = 0;
  for (const auto& it : items_) {
    if (it.label < 0) throw DatasetError("negative label in dataset");
    validate(it.image);
    max_label = std::max(max_label, it.label);
  }
  class_count_ = class_count < 0 ? max_label + 1 : class_count;
  if (max_label >= class_count_) {
    throw DatasetError("label " + std::to_string(max_label) + " outside class count " +
                       std::to_string(class_count_));
  }
  std::uint64_t h = kFnvOffset;
  fnv_u32(h, static_cast<std::uint32_t>(items_.size()));
  for (const auto& it : items_) {
    raw_bytes_ += it.image.raw_bytes();
    fnv_u32(h, static_cast<std::uint32_t>(it.image.width));
    fnv_u32(h, static_cast<std::uint32_t>(it.image.height));
    fnv_u32(h, static_cast<std::uint32_t>(it.label));
    fnv(h, it.image.pixels.data(), it.image.pixels.size());
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  hash_ = buf;
}

Dataset Dataset::subset(std::span<const std::size_t> indices) const {
  std::vector<LabeledImage> picked;
  picked.reserve(indices.size());
  for (std::size_t i : indices) {
    if (i >= items_.size()) throw InvalidArgument("subset index out of range");
    picked.push_back(items_[i]);
  }
  return Dataset(std::move(picked), class_count_);
}

RawImage load_image(const std::filesystem::path& path) {
  const std::vector<std::uint8_t> bytes = read_file(path);
  try {
    if (bytes.size() >= 2 && bytes[0] == 'P' && bytes[1] == '6') return parse_ppm(bytes);
    if (bytes.size() >= 2 && bytes[0] == 0xFF && bytes[1] == 0xD8) return decode(bytes);
  } catch (const Error& e) {
    throw IoError(path.string() + ": " + e.what());
  }
  throw IoError(path.string() + ": not a binary PPM or JPEG file");
}

Manifest read_manifest(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DatasetError("cannot open manifest " + path.string());
  Manifest m;
  m.root = path.parent_path();
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(line);
    } catch (const nlohmann::json::parse_error& e) {
      throw DatasetError(std::string("malformed JSON: ") + e.what(), line_no);
    }
    if (!j.is_object() || !j.contains("path") || !j["path"].is_string() || !j.contains("label") ||
        !j["label"].is_number_integer()) {
      throw DatasetError("expected {\"path\": string, \"label\": integer}", line_no);
    }
    const auto label = j["label"].get<long long>();
    if (label < 0 || label > 1'000'000'000) throw DatasetError("label out of range", line_no);
    m.entries.push_back({j["path"].get<std::string>(), static_cast<int>(label)});
  }
  if (m.entries.empty()) throw DatasetError("manifest " + path.string() + " has no entries");
  return m;
}

void write_manifest(const std::filesystem::path& path, const Manifest& manifest) {
  std::ostringstream out;
  for (const auto& e : manifest.entries) {
    out << nlohmann::json{{"path", e.path}, {"label", e.label}}.dump() << '\n';
  }
  const std::string s = out.str();
  write_file(path, {reinterpret_cast<const std::uint8_t*>(s.data()), s.size()});
}

Dataset load_manifest(const std::filesystem::path& path, int threads) {
  const Manifest m = read_manifest(path);
  std::vector<LabeledImage> items(m.entries.size());
  parallel_for(items.size(), threads, [&](std::size_t i) {
    std::filesystem::path p = m.entries[i].path;
    if (p.is_relative()) p = m.root / p;
    if (!std::filesystem::exists(p)) throw DatasetError("missing image " + p.string(), i + 1);
    items[i] = {load_image(p), m.entries[i].label, m.entries[i].path};
  });
  return Dataset(std::move(items));
}

void SyntheticCorpusSpec::validate() const {
  if (n_classes < 3) throw InvalidArgument("synthetic corpus needs at least 3 classes");
  if (images_per_class < 1) throw InvalidArgument("images_per_class must be positive");
  if (width < 8 || height < 8 || width % 8 || height % 8) {
    throw InvalidArgument("synthetic image dimensions must be positive multiples of 8");
  }
}

Dataset synthesize_dataset(const SyntheticCorpusSpec& spec) {
  spec.validate();
  ProxyConfig cfg;
  cfg.class_count = spec.n_classes;
  const ProxyClassifier proxy(cfg);
  const std::size_t n = static_cast<std::size_t>(spec.n_classes) * spec.images_per_class;
  std::vector<LabeledImage> items(n);
  parallel_for(n, 0, [&](std::size_t i) {
    const int label = static_cast<int>(i) / spec.images_per_class;
    const int index = static_cast<int>(i) % spec.images_per_class;
    for (int attempt = 0;; ++attempt) {
      if (attempt == 1000) throw Error("synthetic corpus generation did not converge");
      RawImage img = synthesize_image(spec, proxy, label, index, attempt);
      if (proxy.classify(img) == label) {
        items[i] = {std::move(img), label, ""};
        break;
      }
    }
  });
  return Dataset(std::move(items), spec.n_classes);
}

std::filesystem::path generate_synthetic(const SyntheticCorpusSpec& spec,
                                         const std::filesystem::path& root) {
  Dataset ds = synthesize_dataset(spec);
  Manifest m;
  m.root = root;
  std::error_code ec;
  for (std::size_t i = 0; i < ds.size(); ++i) {
    const int label = ds[i].label;
    const int index = static_cast<int>(i) % spec.images_per_class;
    const std::string rel = "class_" + std::to_string(label) + "/" + std::to_string(index) + ".ppm";
    std::filesystem::create_directories(root / ("class_" + std::to_string(label)), ec);
    if (ec) throw IoError("cannot create " + (root / rel).string() + ": " + ec.message());
    write_ppm(root / rel, ds[i].image);
    m.entries.push_back({rel, label});
  }
  const auto manifest = root / "manifest.jsonl";
  write_manifest(manifest, m);
  return manifest;
}

}  // namespace qtab
