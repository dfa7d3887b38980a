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

#ifndef QTAB_JPEG_H_
#define QTAB_JPEG_H_

#include <array>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "qtab/block.h"
#include "qtab/image.h"
#include "qtab/qtable.h"

namespace qtab {

enum class Subsampling { k444, k420 };

std::string to_string(Subsampling s);
Subsampling parse_subsampling(std::string_view s);

// level = round_half_away_from_zero(coefficient / q)
QuantizedBlock quantize(const Block& coefficients, const QTable& table);

struct JpegStream {
  std::vector<std::uint8_t> bytes;
  std::size_t size_bytes() const { return bytes.size(); }
};

// Baseline sequential JFIF with the Annex K typical Huffman tables. Images
// are edge-replicated up to the MCU grid. Deterministic.
JpegStream encode(const RawImage& image, const QTable& luma, const QTable& chroma,
                  Subsampling subsampling = Subsampling::k420);

// Baseline/extended-sequential Huffman decoder. Integer IDCT, colour
// conversion and fancy upsampling follow the IJG reference decoder so that
// results match libjpeg's defaults. Throws DecodeError.
RawImage decode(std::span<const std::uint8_t> stream);

struct JpegComponentInfo {
  int id;
  int h_sampling;
  int v_sampling;
  int quant_table;
};

struct JpegInfo {
  int width = 0;
  int height = 0;
  bool progressive = false;
  std::vector<JpegComponentInfo> components;
  // Quantization tables by slot, row-major; 16-bit to hold 16-bit DQT.
  std::array<std::array<std::uint16_t, kBlockSize>, 4> quant_tables{};
  std::array<bool, 4> quant_present{};
};

// Parses markers up to the first scan.
JpegInfo inspect(std::span<const std::uint8_t> stream);

}  // namespace qtab

#endif  // QTAB_JPEG_H_
