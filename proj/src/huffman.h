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

// Huffman tables and bit-level I/O shared by the encoder and decoder.

#ifndef QTAB_SRC_HUFFMAN_H_
#define QTAB_SRC_HUFFMAN_H_

#include <array>
#include <cstdint>
#include <span>
#include <vector>

namespace qtab::internal {

// BITS/HUFFVAL pair as carried by a DHT segment.
struct HuffmanSpec {
  std::array<std::uint8_t, 16> bits{};  // bits[l] = number of codes of length l+1
  std::vector<std::uint8_t> values;
};

const HuffmanSpec& std_dc_luma();
const HuffmanSpec& std_ac_luma();
const HuffmanSpec& std_dc_chroma();
const HuffmanSpec& std_ac_chroma();

struct HuffmanCode {
  std::uint16_t code = 0;
  std::uint8_t length = 0;
};

// Symbol -> code lookup for encoding.
std::array<HuffmanCode, 256> build_encoder_table(const HuffmanSpec& spec);

class BitWriter {
 public:
  explicit BitWriter(std::vector<std::uint8_t>& out) : out_(out) {}
  void put(std::uint32_t bits, int count);
  // Pads the last byte with 1-bits.
  void flush();

 private:
  std::vector<std::uint8_t>& out_;
  std::uint32_t acc_ = 0;
  int count_ = 0;
};

// Magnitude category (number of bits) of a coefficient value.
inline int bit_category(int v) {
  unsigned a = static_cast<unsigned>(v < 0 ? -v : v);
  int n = 0;
  while (a) {
    ++n;
    a >>= 1;
  }
  return n;
}

class BitReader;

// Canonical-code decoder with an 8-bit lookahead.
class HuffmanDecoder {
 public:
  HuffmanDecoder() = default;
  explicit HuffmanDecoder(const HuffmanSpec& spec);
  bool valid() const { return valid_; }
  int decode(BitReader& reader) const;

 private:
  bool valid_ = false;
  std::array<std::int32_t, 18> maxcode_{};
  std::array<std::int32_t, 17> valoffset_{};
  std::vector<std::uint8_t> values_;
  // lookahead: (length << 8) | value, 0 when the code is longer than 8 bits
  std::array<std::uint16_t, 256> lookup_{};
};

// Entropy-coded segment reader. Stops at markers; reading past the end of
// the segment data throws DecodeError.
class BitReader {
 public:
  BitReader(std::span<const std::uint8_t> data, std::size_t pos) : data_(data), pos_(pos) {}

  int bit();
  int bits(int count);
  int peek8();
  void skip(int count);
  // Signed value from `count` raw bits (JPEG EXTEND).
  int receive_extend(int count);
  // Discards buffered bits and consumes an expected RSTn marker.
  void restart(int expected_index);
  // Position of the first byte after the entropy data (at a marker).
  std::size_t marker_position();

 private:
  void fill();
  std::span<const std::uint8_t> data_;
  std::size_t pos_;
  std::uint32_t acc_ = 0;
  int count_ = 0;
  bool at_marker_ = false;
  int padding_bits_ = 0;
};

}  // namespace qtab::internal

#endif  // QTAB_SRC_HUFFMAN_H_
