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

#include "qtab/proxy_classifier.h"

#include <cmath>
#include <limits>

#include "qtab/color.h"
#include "qtab/dct.h"
#include "qtab/error.h"

namespace qtab {

ProxyClassifier::ProxyClassifier(ProxyConfig config) : config_(std::move(config)) {
  if (config_.class_count < 3) throw InvalidArgument("proxy classifier needs at least 3 classes");
  if (!(config_.lf_min >= 0.0 && config_.lf_min < config_.lf_max && config_.lf_max <= 1.0)) {
    throw InvalidArgument("proxy classifier needs 0 <= lf_min < lf_max <= 1");
  }
  if (!(config_.hf_share >= 0.0) || !(config_.hf_weight >= 0.0)) {
    throw InvalidArgument("proxy hf_share and hf_weight must be non-negative");
  }
  for (int i = 0; i < kBlockSize; ++i) band_of_natural_[i] = config_.bands.band_of_natural(i);

  const int k = config_.class_count;
  centroids_.assign(k, {0.0, 0.0, 0.0});
  for (int c = 1; c < k; ++c) {
    const double share =
        config_.lf_min + (config_.lf_max - config_.lf_min) * (c - 1) / static_cast<double>(k - 2);
    centroids_[c] = {share, 1.0 - share, config_.hf_share};
  }
}

BandEnergy ProxyClassifier::band_energy(const RawImage& image) const {
  validate(image);
  if (image.width < 8 || image.height < 8) {
    throw InvalidArgument("proxy classifier needs images of at least 8x8 pixels");
  }
  const int bw = image.width / 8;
  const int bh = image.height / 8;
  std::array<double, 3> sums{};
  std::array<int, 3> counts{};
  for (int i = 1; i < kBlockSize; ++i) ++counts[static_cast<int>(band_of_natural_[i])];

  Block spatial;
  for (int by = 0; by < bh; ++by) {
    for (int bx = 0; bx < bw; ++bx) {
      for (int y = 0; y < 8; ++y) {
        const std::uint8_t* px = image.row(8 * by + y) + 3 * 8 * bx;
        for (int x = 0; x < 8; ++x, px += 3) spatial[8 * y + x] = luma(px[0], px[1], px[2]) - 128.0;
      }
      const Block coef = forward_dct(spatial);
      for (int i = 1; i < kBlockSize; ++i) {
        const double e = std::abs(coef[i]) - config_.noise_floor;
        if (e > 0.0) sums[static_cast<int>(band_of_natural_[i])] += e;
      }
    }
  }
  const double blocks = static_cast<double>(bw) * bh;
  auto mean = [&](int b) { return counts[b] ? sums[b] / (blocks * counts[b]) : 0.0; };
  return {mean(0), mean(1), mean(2)};
}

int ProxyClassifier::classify(const BandEnergy& energy) const {
  const double total = energy.informative();
  if (total < config_.flat_threshold) return kFlatClass;
  const std::array<double, 3> r{energy.lf / total, energy.mf / total, energy.hf / total};
  const std::array<double, 3> w{1.0, 1.0, config_.hf_weight};
  int best = 1;
  double best_d = std::numeric_limits<double>::infinity();
  for (int c = 1; c < config_.class_count; ++c) {
    double d = 0.0;
    for (int j = 0; j < 3; ++j) d += w[j] * (r[j] - centroids_[c][j]) * (r[j] - centroids_[c][j]);
    if (d < best_d) {
      best_d = d;
      best = c;
    }
  }
  return best;
}

}  // namespace qtab
