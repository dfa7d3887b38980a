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

#ifndef QTAB_COLOR_H_
#define QTAB_COLOR_H_

#include <array>
#include <cstdint>
#include <vector>

#include "qtab/image.h"

namespace qtab {

// Full-resolution planar YCbCr (BT.601 full range, as in JFIF).
struct PlanarImage {
  int width = 0;
  int height = 0;
  std::vector<std::uint8_t> y, cb, cr;
};

// Rounded, clamped BT.601 full-range conversion of one pixel.
std::array<std::uint8_t, 3> rgb_to_ycbcr(std::uint8_t r, std::uint8_t g, std::uint8_t b);

// Inverse conversion in 16-bit fixed point, matching the IJG/libjpeg tables.
std::array<std::uint8_t, 3> ycbcr_to_rgb(std::uint8_t y, std::uint8_t cb, std::uint8_t cr);

PlanarImage rgb_to_ycbcr(const RawImage& image);
RawImage ycbcr_to_rgb(const PlanarImage& planes);

// Unrounded luma of one pixel.
inline double luma(std::uint8_t r, std::uint8_t g, std::uint8_t b) {
  return 0.299 * r + 0.587 * g + 0.114 * b;
}

}  // namespace qtab

#endif  // QTAB_COLOR_H_
