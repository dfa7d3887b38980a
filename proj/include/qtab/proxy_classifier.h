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

#ifndef QTAB_PROXY_CLASSIFIER_H_
#define QTAB_PROXY_CLASSIFIER_H_

#include <array>
#include <vector>

#include "qtab/image.h"
#include "qtab/qtable.h"

namespace qtab {

// Per-coefficient mean of max(|c| - noise_floor, 0) over the AC coefficients
// of each band, averaged over all full 8x8 luma blocks.
struct BandEnergy {
  double lf = 0.0;
  double mf = 0.0;
  double hf = 0.0;
  double informative() const { return lf + mf; }
};

struct ProxyConfig {
  int class_count = 20;
  FrequencyBands bands = default_bands();
  double noise_floor = 1.0;
  double flat_threshold = 6.0;
  // Class k >= 1 has low-band share lf_min + (lf_max - lf_min) * (k-1)/(K-2)
  // of the non-high energy.
  double lf_min = 0.1;
  double lf_max = 0.9;
  // High-band energy relative to low+mid energy, shared by every centroid.
  double hf_share = 0.0;
  // Weight of the high-band coordinate in the centroid distance.
  double hf_weight = 0.0;
};

// Deterministic frequency-sensitive classifier. Band energies are divided by
// the low+mid energy and the resulting ratio vector is snapped to the nearest
// of a fixed set of centroids. Label 0 is reserved for images whose low+mid
// energy is below the flat threshold.
class ProxyClassifier {
 public:
  explicit ProxyClassifier(ProxyConfig config = {});

  static constexpr int kFlatClass = 0;

  const ProxyConfig& config() const { return config_; }
  int class_count() const { return config_.class_count; }
  // The class whose centroid has the largest low-band share.
  int lf_dominant_class() const { return config_.class_count - 1; }
  // The class whose centroid has the smallest low-band share.
  int mf_dominant_class() const { return 1; }
  const std::vector<std::array<double, 3>>& centroids() const { return centroids_; }

  // Requires width, height >= 8; throws InvalidArgument otherwise.
  BandEnergy band_energy(const RawImage& image) const;
  int classify(const BandEnergy& energy) const;
  int classify(const RawImage& image) const { return classify(band_energy(image)); }

 private:
  ProxyConfig config_;
  std::array<Band, 64> band_of_natural_{};
  std::vector<std::array<double, 3>> centroids_;  // index = class label; [0] unused
};

}  // namespace qtab

#endif  // QTAB_PROXY_CLASSIFIER_H_
