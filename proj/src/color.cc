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

#include "qtab/color.h"

#include <algorithm>
#include <cmath>

namespace qtab {
namespace {

std::uint8_t clamp_round(double v) {
  return static_cast<std::uint8_t>(std::clamp(std::floor(v + 0.5), 0.0, 255.0));
}

std::uint8_t clamp_int(int v) { return static_cast<std::uint8_t>(std::clamp(v, 0, 255)); }

constexpr int kScaleBits = 16;
constexpr std::int32_t kOneHalf = std::int32_t{1} << (kScaleBits - 1);
constexpr std::int32_t fix(double x) {
  return static_cast<std::int32_t>(x * (1 << kScaleBits) + 0.5);
}

struct YccTables {
  int cr_r[256], cb_b[256];
  std::int32_t cr_g[256], cb_g[256];
  YccTables() {
    for (int i = 0; i < 256; ++i) {
      const std::int32_t x = i - 128;
      cr_r[i] = static_cast<int>((fix(1.40200) * x + kOneHalf) >> kScaleBits);
      cb_b[i] = static_cast<int>((fix(1.77200) * x + kOneHalf) >> kScaleBits);
      cr_g[i] = -fix(0.71414) * x;
      cb_g[i] = -fix(0.34414) * x + kOneHalf;
    }
  }
};

const YccTables& ycc_tables() {
  static const YccTables t;
  return t;
}

}  // namespace

std::array<std::uint8_t, 3> rgb_to_ycbcr(std::uint8_t r, std::uint8_t g, std::uint8_t b) {
  const double y = luma(r, g, b);
  const double cb = -0.168735892 * r - 0.331264108 * g + 0.5 * b + 128.0;
  const double cr = 0.5 * r - 0.418687589 * g - 0.081312411 * b + 128.0;
  return {clamp_round(y), clamp_round(cb), clamp_round(cr)};
}

std::array<std::uint8_t, 3> ycbcr_to_rgb(std::uint8_t y, std::uint8_t cb, std::uint8_t cr) {
  const auto& t = ycc_tables();
  const int r = y + t.cr_r[cr];
  const int g = y + static_cast<int>((t.cb_g[cb] + t.cr_g[cr]) >> kScaleBits);
  const int b = y + t.cb_b[cb];
  return {clamp_int(r), clamp_int(g), clamp_int(b)};
}

PlanarImage rgb_to_ycbcr(const RawImage& image) {
  validate(image);
  PlanarImage out;
  out.width = image.width;
  out.height = image.height;
  const std::size_t n = static_cast<std::size_t>(image.width) * image.height;
  out.y.resize(n);
  out.cb.resize(n);
  out.cr.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    const auto* p = &image.pixels[3 * i];
    const auto ycc = rgb_to_ycbcr(p[0], p[1], p[2]);
    out.y[i] = ycc[0];
    out.cb[i] = ycc[1];
    out.cr[i] = ycc[2];
  }
  return out;
}

RawImage ycbcr_to_rgb(const PlanarImage& planes) {
  RawImage out(planes.width, planes.height);
  const std::size_t n = static_cast<std::size_t>(planes.width) * planes.height;
  for (std::size_t i = 0; i < n; ++i) {
    const auto rgb = ycbcr_to_rgb(planes.y[i], planes.cb[i], planes.cr[i]);
    out.pixels[3 * i] = rgb[0];
    out.pixels[3 * i + 1] = rgb[1];
    out.pixels[3 * i + 2] = rgb[2];
  }
  return out;
}

}  // namespace qtab
