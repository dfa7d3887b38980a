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

#ifndef QTAB_BLOCK_H_
#define QTAB_BLOCK_H_

#include <array>
#include <cstdint>

namespace qtab {

inline constexpr int kBlockSize = 64;

// 8x8 block of reals, row-major (index = 8 * row + col). Holds level-shifted
// spatial samples or DCT coefficients; row is the vertical frequency.
using Block = std::array<double, kBlockSize>;

// Quantized DCT levels, row-major.
using QuantizedBlock = std::array<int, kBlockSize>;

// kZigzagToNatural[k] is the row-major index of the k-th coefficient in
// zig-zag order.
inline constexpr std::array<std::uint8_t, kBlockSize> kZigzagToNatural = {
    0,  1,  8,  16, 9,  2,  3,  10, 17, 24, 32, 25, 18, 11, 4,  5,
    12, 19, 26, 33, 40, 48, 41, 34, 27, 20, 13, 6,  7,  14, 21, 28,
    35, 42, 49, 56, 57, 50, 43, 36, 29, 22, 15, 23, 30, 37, 44, 51,
    58, 59, 52, 45, 38, 31, 39, 46, 53, 60, 61, 54, 47, 55, 62, 63};

inline constexpr std::array<std::uint8_t, kBlockSize> kNaturalToZigzag = [] {
  std::array<std::uint8_t, kBlockSize> inv{};
  for (int k = 0; k < kBlockSize; ++k) inv[kZigzagToNatural[k]] = static_cast<std::uint8_t>(k);
  return inv;
}();

template <typename T>
std::array<T, kBlockSize> zigzag(const std::array<T, kBlockSize>& natural) {
  std::array<T, kBlockSize> out{};
  for (int k = 0; k < kBlockSize; ++k) out[k] = natural[kZigzagToNatural[k]];
  return out;
}

template <typename T>
std::array<T, kBlockSize> unzigzag(const std::array<T, kBlockSize>& sequence) {
  std::array<T, kBlockSize> out{};
  for (int k = 0; k < kBlockSize; ++k) out[kZigzagToNatural[k]] = sequence[k];
  return out;
}

}  // namespace qtab

#endif  // QTAB_BLOCK_H_
