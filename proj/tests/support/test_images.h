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

#ifndef QTAB_TESTS_SUPPORT_TEST_IMAGES_H_
#define QTAB_TESTS_SUPPORT_TEST_IMAGES_H_

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <random>

#include "qtab/image.h"
#include "qtab/qtable.h"

namespace qtab::testing {

// Smooth colour gradients plus uniform noise of amplitude `noise`.
inline RawImage textured_image(int width, int height, std::uint64_t seed, int noise = 40) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> phase(0.0, 6.283185307179586);
  std::uniform_int_distribution<int> jitter(-noise, noise);
  const double p[3] = {phase(rng), phase(rng), phase(rng)};
  RawImage img(width, height);
  for (int y = 0; y < height; ++y) {
    for (int x = 0; x < width; ++x) {
      for (int c = 0; c < 3; ++c) {
        const double base = 128.0 + 90.0 * std::sin(0.11 * x + 0.07 * y * (c + 1) + p[c]);
        img.row(y)[3 * x + c] = static_cast<std::uint8_t>(std::clamp(base + jitter(rng), 0.0, 255.0));
      }
    }
  }
  return img;
}

inline RawImage constant_image(int width, int height, std::uint8_t r, std::uint8_t g, std::uint8_t b) {
  RawImage img(width, height);
  for (std::size_t i = 0; i < img.pixels.size(); i += 3) {
    img.pixels[i] = r;
    img.pixels[i + 1] = g;
    img.pixels[i + 2] = b;
  }
  return img;
}

inline QTable random_table(std::mt19937_64& rng, int lo = 1, int hi = 255) {
  std::uniform_int_distribution<int> d(lo, hi);
  std::array<int, kBlockSize> v;
  for (int& x : v) x = d(rng);
  return QTable(v);
}

}  // namespace qtab::testing

#endif  // QTAB_TESTS_SUPPORT_TEST_IMAGES_H_
