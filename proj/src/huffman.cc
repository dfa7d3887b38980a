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

#include "huffman.h"

#include "qtab/error.h"

namespace qtab::internal {
namespace {

HuffmanSpec make_spec(std::array<std::uint8_t, 16> bits, std::vector<std::uint8_t> values) {
  HuffmanSpec s;
  s.bits = bits;
  s.values = std::move(values);
  return s;
}

}  // namespace

const HuffmanSpec& std_dc_luma() {
  static const HuffmanSpec s =
      make_spec({0, 1, 5, 1, 1, 1, 1, 1, 1, 0, 0, 0, 0, 0, 0, 0},
                {0, 1, 2, 3, 4, 5, 6, 7, 8, 9, 10, 11});
  return s;
}

const HuffmanSpec& std_dc_chroma() {
  static const HuffmanSpec s =
      make_spec({0, 3, 1, 1, 1, 1, 1, 1, 1, 1, 1, 0, 0, 0, 0, 0},
                {0, 1, 2, 3, 4, 5, 6, 7, 8, 9, 10, 11});
  return s;
}

const HuffmanSpec& std_ac_luma() {
  static const HuffmanSpec s = make_spec(
      {0, 2, 1, 3, 3, 2, 4, 3, 5, 5, 4, 4, 0, 0, 1, 0x7d},
      {0x01, 0x02, 0x03, 0x00, 0x04, 0x11, 0x05, 0x12, 0x21, 0x31, 0x41, 0x06, 0x13, 0x51,
       0x61, 0x07, 0x22, 0x71, 0x14, 0x32, 0x81, 0x91, 0xa1, 0x08, 0x23, 0x42, 0xb1, 0xc1,
       0x15, 0x52, 0xd1, 0xf0, 0x24, 0x33, 0x62, 0x72, 0x82, 0x09, 0x0a, 0x16, 0x17, 0x18,
       0x19, 0x1a, 0x25, 0x26, 0x27, 0x28, 0x29, 0x2a, 0x34, 0x35, 0x36, 0x37, 0x38, 0x39,
       0x3a, 0x43, 0x44, 0x45, 0x46, 0x47, 0x48, 0x49, 0x4a, 0x53, 0x54, 0x55, 0x56, 0x57,
       0x58, 0x59, 0x5a, 0x63, 0x64, 0x65, 0x66, 0x67, 0x68, 0x69, 0x6a, 0x73, 0x74, 0x75,
       0x76, 0x77, 0x78, 0x79, 0x7a, 0x83, 0x84, 0x85, 0x86, 0x87, 0x88, 0x89, 0x8a, 0x92,
       0x93, 0x94, 0x95, 0x96, 0x97, 0x98, 0x99, 0x9a, 0xa2, 0xa3, 0xa4, 0xa5, 0xa6, 0xa7,
       0xa8, 0xa9, 0xaa, 0xb2, 0xb3, 0xb4, 0xb5, 0xb6, 0xb7, 0xb8, 0xb9, 0xba, 0xc2, 0xc3,
       0xc4, 0xc5, 0xc6, 0xc7, 0xc8, 0xc9, 0xca, 0xd2, 0xd3, 0xd4, 0xd5, 0xd6, 0xd7, 0xd8,
       0xd9, 0xda, 0xe1, 0xe2, 0xe3, 0xe4, 0xe5, 0xe6, 0xe7, 0xe8, 0xe9, 0xea, 0xf1, 0xf2,
       0xf3, 0xf4, 0xf5, 0xf6, 0xf7, 0xf8, 0xf9, 0xfa});
  return s;
}

const HuffmanSpec& std_ac_chroma() {
  static const HuffmanSpec s = make_spec(
      {0, 2, 1, 2, 4, 4, 3, 4, 7, 5, 4, 4, 0, 1, 2, 0x77},
      {0x00, 0x01, 0x02, 0x03, 0x11, 0x04, 0x05, 0x21, 0x31, 0x06, 0x12, 0x41, 0x51, 0x07,
       0x61, 0x71, 0x13, 0x22, 0x32, 0x81, 0x08, 0x14, 0x42, 0x91, 0xa1, 0xb1, 0xc1, 0x09,
       0x23, 0x33, 0x52, 0xf0, 0x15, 0x62, 0x72, 0xd1, 0x0a, 0x16, 0x24, 0x34, 0xe1, 0x25,
       0xf1, 0x17, 0x18, 0x19, 0x1a, 0x26, 0x27, 0x28, 0x29, 0x2a, 0x35, 0x36, 0x37, 0x38,
       0x39, 0x3a, 0x43, 0x44, 0x45, 0x46, 0x47, 0x48, 0x49, 0x4a, 0x53, 0x54, 0x55, 0x56,
       0x57, 0x58, 0x59, 0x5a, 0x63, 0x64, 0x65, 0x66, 0x67, 0x68, 0x69, 0x6a, 0x73, 0x74,
       0x75, 0x76, 0x77, 0x78, 0x79, 0x7a, 0x82, 0x83, 0x84, 0x85, 0x86, 0x87, 0x88, 0x89,
       0x8a, 0x92, 0x93, 0x94, 0x95, 0x96, 0x97, 0x98, 0x99, 0x9a, 0xa2, 0xa3, 0xa4, 0xa5,
       0xa6, 0xa7, 0xa8, 0xa9, 0xaa, 0xb2, 0xb3, 0xb4, 0xb5, 0xb6, 0xb7, 0xb8, 0xb9, 0xba,
       0xc2, 0xc3, 0xc4, 0xc5, 0xc6, 0xc7, 0xc8, 0xc9, 0xca, 0xd2, 0xd3, 0xd4, 0xd5, 0xd6,
       0xd7, 0xd8, 0xd9, 0xda, 0xe2, 0xe3, 0xe4, 0xe5, 0xe6, 0xe7, 0xe8, 0xe9, 0xea, 0xf2,
       0xf3, 0xf4, 0xf5, 0xf6, 0xf7, 0xf8, 0xf9, 0xfa});
  return s;
}

std::array<HuffmanCode, 256> build_encoder_table(const HuffmanSpec& spec) {
  std::array<HuffmanCode, 256> table{};
  std::uint32_t code = 0;
  std::size_t k = 0;
  for (int len = 1; len <= 16; ++len) {
    for (int i = 0; i < spec.bits[len - 1]; ++i) {
      table[spec.values.at(k++)] = {static_cast<std::uint16_t>(code),
                                    static_cast<std::uint8_t>(len)};
      ++code;
    }
    code <<= 1;
  }
  return table;
}

void BitWriter::put(std::uint32_t bits, int count) {
  acc_ = (acc_ << count) | (bits & ((1u << count) - 1));
  count_ += count;
  while (count_ >= 8) {
    const auto byte = static_cast<std::uint8_t>(acc_ >> (count_ - 8));
    out_.push_back(byte);
    if (byte == 0xFF) out_.push_back(0x00);
    count_ -= 8;
  }
  acc_ &= (1u << count_) - 1;
}

void BitWriter::flush() {
  if (count_ > 0) put((1u << (8 - count_)) - 1, 8 - count_);
}

HuffmanDecoder::HuffmanDecoder(const HuffmanSpec& spec) : values_(spec.values) {
  std::int32_t code = 0;
  std::int32_t p = 0;
  for (int len = 1; len <= 16; ++len) {
    const int n = spec.bits[len - 1];
    if (n) {
      valoffset_[len] = p - code;
      p += n;
      code += n;
      if (code > (1 << len)) throw DecodeError("invalid Huffman table");
      maxcode_[len] = code - 1;
    } else {
      maxcode_[len] = -1;
    }
    code <<= 1;
  }
  maxcode_[17] = 0x7fffffff;
  if (static_cast<std::size_t>(p) > values_.size()) throw DecodeError("Huffman table too short");

  // fill the 8-bit lookahead
  code = 0;
  p = 0;
  for (int len = 1; len <= 8; ++len) {
    for (int i = 0; i < spec.bits[len - 1]; ++i, ++p, ++code) {
      const int shift = 8 - len;
      for (int suffix = 0; suffix < (1 << shift); ++suffix) {
        lookup_[(code << shift) | suffix] =
            static_cast<std::uint16_t>((len << 8) | values_[p]);
      }
    }
    code <<= 1;
  }
  valid_ = true;
}

int HuffmanDecoder::decode(BitReader& reader) const {
  const int look = reader.peek8();
  const int entry = lookup_[look];
  if (entry) {
    reader.skip(entry >> 8);
    return entry & 0xFF;
  }
  reader.skip(8);
  std::int32_t code = look;
  for (int len = 9; len <= 16; ++len) {
    code = (code << 1) | reader.bit();
    if (code <= maxcode_[len]) return values_[valoffset_[len] + code];
  }
  throw DecodeError("corrupt Huffman code");
}

void BitReader::fill() {
  while (count_ <= 24) {
    std::uint32_t byte = 0;
    if (!at_marker_ && pos_ < data_.size()) {
      byte = data_[pos_];
      if (byte == 0xFF) {
        if (pos_ + 1 < data_.size() && data_[pos_ + 1] == 0x00) {
          pos_ += 2;
        } else {
          at_marker_ = true;  // leave pos_ on the marker
          byte = 0;
          padding_bits_ += 8;
        }
      } else {
        ++pos_;
      }
    } else {
      padding_bits_ += 8;
    }
    acc_ = (acc_ << 8) | byte;
    count_ += 8;
  }
}

int BitReader::peek8() {
  if (count_ < 8) fill();
  return static_cast<int>((acc_ >> (count_ - 8)) & 0xFF);
}

void BitReader::skip(int count) {
  if (count_ < count) fill();
  count_ -= count;
  if (count_ < padding_bits_) throw DecodeError("entropy-coded data ended prematurely");
}

int BitReader::bit() { return bits(1); }

int BitReader::bits(int count) {
  if (count == 0) return 0;
  if (count_ < count) fill();
  const int v = static_cast<int>((acc_ >> (count_ - count)) & ((1u << count) - 1));
  skip(count);
  return v;
}

int BitReader::receive_extend(int count) {
  if (count == 0) return 0;
  const int v = bits(count);
  return v < (1 << (count - 1)) ? v - (1 << count) + 1 : v;
}

void BitReader::restart(int expected_index) {
  acc_ = 0;
  count_ = 0;
  padding_bits_ = 0;
  at_marker_ = false;
  if (pos_ + 1 >= data_.size() || data_[pos_] != 0xFF ||
      data_[pos_ + 1] != 0xD0 + (expected_index & 7)) {
    throw DecodeError("missing restart marker");
  }
  pos_ += 2;
}

std::size_t BitReader::marker_position() {
  std::size_t p = pos_;
  while (p + 1 < data_.size()) {
    if (data_[p] == 0xFF && data_[p + 1] != 0x00 && data_[p + 1] != 0xFF &&
        !(data_[p + 1] >= 0xD0 && data_[p + 1] <= 0xD7)) {
      return p;
    }
    ++p;
  }
  return data_.size();
}

}  // namespace qtab::internal
