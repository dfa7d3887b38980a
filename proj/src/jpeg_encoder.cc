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

#include <algorithm>
#include <cmath>

#include "huffman.h"
#include "qtab/color.h"
#include "qtab/dct.h"
#include "qtab/error.h"
#include "qtab/jpeg.h"

namespace qtab {

std::string to_string(Subsampling s) { return s == Subsampling::k420 ? "420" : "444"; }

Subsampling parse_subsampling(std::string_view s) {
  if (s == "420" || s == "4:2:0") return Subsampling::k420;
  if (s == "444" || s == "4:4:4") return Subsampling::k444;
  throw InvalidArgument("unknown subsampling '" + std::string(s) + "'");
}

QuantizedBlock quantize(const Block& coefficients, const QTable& table) {
  QuantizedBlock levels;
  for (int i = 0; i < kBlockSize; ++i) {
    levels[i] = static_cast<int>(std::round(coefficients[i] / table[i]));
  }
  return levels;
}

namespace {

using internal::BitWriter;
using internal::HuffmanCode;
using internal::HuffmanSpec;

// Plane of 8-bit samples whose dimensions are multiples of 8.
struct Plane {
  int width = 0;
  int height = 0;
  std::vector<std::uint8_t> samples;
  std::uint8_t at(int x, int y) const { return samples[static_cast<std::size_t>(y) * width + x]; }
};

// Edge-replicates `src` (src_w x src_h) to padded_w x padded_h.
Plane pad_plane(const std::vector<std::uint8_t>& src, int src_w, int src_h, int padded_w,
                int padded_h) {
  Plane p{padded_w, padded_h, std::vector<std::uint8_t>(static_cast<std::size_t>(padded_w) * padded_h)};
  for (int y = 0; y < padded_h; ++y) {
    const int sy = std::min(y, src_h - 1);
    for (int x = 0; x < padded_w; ++x) {
      const int sx = std::min(x, src_w - 1);
      p.samples[static_cast<std::size_t>(y) * padded_w + x] =
          src[static_cast<std::size_t>(sy) * src_w + sx];
    }
  }
  return p;
}

Plane downsample_2x2(const Plane& full) {
  Plane half{full.width / 2, full.height / 2, {}};
  half.samples.resize(static_cast<std::size_t>(half.width) * half.height);
  for (int y = 0; y < half.height; ++y) {
    for (int x = 0; x < half.width; ++x) {
      const int sum = full.at(2 * x, 2 * y) + full.at(2 * x + 1, 2 * y) +
                      full.at(2 * x, 2 * y + 1) + full.at(2 * x + 1, 2 * y + 1);
      half.samples[static_cast<std::size_t>(y) * half.width + x] =
          static_cast<std::uint8_t>((sum + 2) >> 2);
    }
  }
  return half;
}

void put_u16(std::vector<std::uint8_t>& out, int v) {
  out.push_back(static_cast<std::uint8_t>(v >> 8));
  out.push_back(static_cast<std::uint8_t>(v & 0xFF));
}

void put_marker(std::vector<std::uint8_t>& out, std::uint8_t marker) {
  out.push_back(0xFF);
  out.push_back(marker);
}

void write_headers(std::vector<std::uint8_t>& out, int width, int height, const QTable& luma,
                   const QTable& chroma, Subsampling subsampling) {
  put_marker(out, 0xD8);

  // APP0 / JFIF 1.01, no density units, no thumbnail
  put_marker(out, 0xE0);
  put_u16(out, 16);
  for (char c : {'J', 'F', 'I', 'F', '\0'}) out.push_back(static_cast<std::uint8_t>(c));
  out.insert(out.end(), {1, 1, 0});
  put_u16(out, 1);
  put_u16(out, 1);
  out.insert(out.end(), {0, 0});

  put_marker(out, 0xDB);
  put_u16(out, 2 + 2 * 65);
  for (int slot = 0; slot < 2; ++slot) {
    const QTable& t = slot == 0 ? luma : chroma;
    out.push_back(static_cast<std::uint8_t>(slot));
    for (int k = 0; k < kBlockSize; ++k) out.push_back(static_cast<std::uint8_t>(t.zigzag_at(k)));
  }

  put_marker(out, 0xC0);
  put_u16(out, 17);
  out.push_back(8);
  put_u16(out, height);
  put_u16(out, width);
  out.push_back(3);
  const std::uint8_t luma_sampling = subsampling == Subsampling::k420 ? 0x22 : 0x11;
  out.insert(out.end(), {1, luma_sampling, 0, 2, 0x11, 1, 3, 0x11, 1});

  const std::pair<std::uint8_t, const HuffmanSpec*> tables[] = {
      {0x00, &internal::std_dc_luma()},
      {0x10, &internal::std_ac_luma()},
      {0x01, &internal::std_dc_chroma()},
      {0x11, &internal::std_ac_chroma()}};
  int length = 2;
  for (const auto& [cls, spec] : tables) length += 17 + static_cast<int>(spec->values.size());
  put_marker(out, 0xC4);
  put_u16(out, length);
  for (const auto& [cls, spec] : tables) {
    out.push_back(cls);
    out.insert(out.end(), spec->bits.begin(), spec->bits.end());
    out.insert(out.end(), spec->values.begin(), spec->values.end());
  }

  put_marker(out, 0xDA);
  put_u16(out, 12);
  out.push_back(3);
  out.insert(out.end(), {1, 0x00, 2, 0x11, 3, 0x11});
  out.insert(out.end(), {0, 63, 0});
}

struct EntropyTables {
  std::array<HuffmanCode, 256> dc, ac;
};

const EntropyTables& luma_tables() {
  static const EntropyTables t{build_encoder_table(internal::std_dc_luma()),
                               build_encoder_table(internal::std_ac_luma())};
  return t;
}

const EntropyTables& chroma_tables() {
  static const EntropyTables t{build_encoder_table(internal::std_dc_chroma()),
                               build_encoder_table(internal::std_ac_chroma())};
  return t;
}

void put_value(BitWriter& w, int value, int category) {
  if (category == 0) return;
  const int bits = value < 0 ? value - 1 : value;  // one's complement for negatives
  w.put(static_cast<std::uint32_t>(bits) & ((1u << category) - 1), category);
}

void encode_block(BitWriter& w, const Plane& plane, int bx, int by, const QTable& table,
                  const EntropyTables& codes, int& dc_pred) {
  Block spatial;
  for (int y = 0; y < 8; ++y)
    for (int x = 0; x < 8; ++x)
      spatial[8 * y + x] = static_cast<double>(plane.at(8 * bx + x, 8 * by + y)) - 128.0;
  const QuantizedBlock levels = quantize(forward_dct(spatial), table);

  const int dc = std::clamp(levels[0], -2047, 2047);
  const int diff = std::clamp(dc - dc_pred, -2047, 2047);
  dc_pred = dc_pred + diff;
  const int dc_cat = internal::bit_category(diff);
  w.put(codes.dc[dc_cat].code, codes.dc[dc_cat].length);
  put_value(w, diff, dc_cat);

  int run = 0;
  for (int k = 1; k < kBlockSize; ++k) {
    const int v = std::clamp(levels[kZigzagToNatural[k]], -1023, 1023);
    if (v == 0) {
      ++run;
      continue;
    }
    while (run >= 16) {
      w.put(codes.ac[0xF0].code, codes.ac[0xF0].length);
      run -= 16;
    }
    const int cat = internal::bit_category(v);
    const int symbol = (run << 4) | cat;
    w.put(codes.ac[symbol].code, codes.ac[symbol].length);
    put_value(w, v, cat);
    run = 0;
  }
  if (run > 0) w.put(codes.ac[0x00].code, codes.ac[0x00].length);
}

}  // namespace

JpegStream encode(const RawImage& image, const QTable& luma, const QTable& chroma,
                  Subsampling subsampling) {
  validate(image);
  if (image.width > 65535 || image.height > 65535) {
    throw InvalidArgument("image too large for baseline JPEG");
  }
  const PlanarImage ycc = rgb_to_ycbcr(image);
  const int mcu = subsampling == Subsampling::k420 ? 16 : 8;
  const int pw = (image.width + mcu - 1) / mcu * mcu;
  const int ph = (image.height + mcu - 1) / mcu * mcu;

  const Plane y = pad_plane(ycc.y, image.width, image.height, pw, ph);
  Plane cb = pad_plane(ycc.cb, image.width, image.height, pw, ph);
  Plane cr = pad_plane(ycc.cr, image.width, image.height, pw, ph);
  if (subsampling == Subsampling::k420) {
    cb = downsample_2x2(cb);
    cr = downsample_2x2(cr);
  }

  JpegStream stream;
  auto& out = stream.bytes;
  out.reserve(1024 + static_cast<std::size_t>(pw) * ph / 2);
  write_headers(out, image.width, image.height, luma, chroma, subsampling);

  BitWriter w(out);
  int pred_y = 0, pred_cb = 0, pred_cr = 0;
  const int mcus_x = pw / mcu;
  const int mcus_y = ph / mcu;
  const int luma_per_mcu = mcu / 8;
  for (int my = 0; my < mcus_y; ++my) {
    for (int mx = 0; mx < mcus_x; ++mx) {
      for (int v = 0; v < luma_per_mcu; ++v)
        for (int h = 0; h < luma_per_mcu; ++h)
          encode_block(w, y, mx * luma_per_mcu + h, my * luma_per_mcu + v, luma, luma_tables(),
                       pred_y);
      encode_block(w, cb, mx, my, chroma, chroma_tables(), pred_cb);
      encode_block(w, cr, mx, my, chroma, chroma_tables(), pred_cr);
    }
  }
  w.flush();
  put_marker(out, 0xD9);
  return stream;
}

}  // namespace qtab
