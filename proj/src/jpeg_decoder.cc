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
#include <optional>

#include "huffman.h"
#include "qtab/color.h"
#include "qtab/error.h"
#include "qtab/jpeg.h"

namespace qtab {
namespace {

using internal::BitReader;
using internal::HuffmanDecoder;
using internal::HuffmanSpec;

// ---------------------------------------------------------------------------
// Integer inverse DCT, a transcription of the IJG "islow" algorithm
// (jidctint.c): 13-bit fixed-point constants, two passes, 10-bit range
// limiting.

constexpr int kConstBits = 13;
constexpr int kPass1Bits = 2;

constexpr std::int32_t kFix_0_298631336 = 2446;
constexpr std::int32_t kFix_0_390180644 = 3196;
constexpr std::int32_t kFix_0_541196100 = 4433;
constexpr std::int32_t kFix_0_765366865 = 6270;
constexpr std::int32_t kFix_0_899976223 = 7373;
constexpr std::int32_t kFix_1_175875602 = 9633;
constexpr std::int32_t kFix_1_501321110 = 12299;
constexpr std::int32_t kFix_1_847759065 = 15137;
constexpr std::int32_t kFix_1_961570560 = 16069;
constexpr std::int32_t kFix_2_053119869 = 16819;
constexpr std::int32_t kFix_2_562915447 = 20995;
constexpr std::int32_t kFix_3_072711026 = 25172;

constexpr std::int32_t descale(std::int64_t x, int n) {
  return static_cast<std::int32_t>((x + (std::int64_t{1} << (n - 1))) >> n);
}

// Post-IDCT range limit: wraps to 10 bits, then clamps the level-shifted
// value, exactly as the IJG lookup table does.
inline std::uint8_t range_limit(std::int32_t x) {
  const int s = ((x & 1023) ^ 512) - 512;
  return static_cast<std::uint8_t>(std::clamp(s + 128, 0, 255));
}

void idct_islow(const std::int16_t* coef, const std::uint16_t* quant, std::uint8_t* out,
                int stride) {
  std::int32_t ws[64];
  for (int col = 0; col < 8; ++col) {
    const std::int16_t* in = coef + col;
    const std::uint16_t* q = quant + col;
    std::int32_t* w = ws + col;
    auto deq = [&](int row) { return static_cast<std::int64_t>(in[8 * row]) * q[8 * row]; };

    std::int64_t z2 = deq(2), z3 = deq(6);
    std::int64_t z1 = (z2 + z3) * kFix_0_541196100;
    std::int64_t tmp2 = z1 + z3 * -kFix_1_847759065;
    std::int64_t tmp3 = z1 + z2 * kFix_0_765366865;
    z2 = deq(0);
    z3 = deq(4);
    std::int64_t tmp0 = (z2 + z3) * (1 << kConstBits);
    std::int64_t tmp1 = (z2 - z3) * (1 << kConstBits);
    const std::int64_t tmp10 = tmp0 + tmp3, tmp13 = tmp0 - tmp3;
    const std::int64_t tmp11 = tmp1 + tmp2, tmp12 = tmp1 - tmp2;

    tmp0 = deq(7);
    tmp1 = deq(5);
    tmp2 = deq(3);
    tmp3 = deq(1);
    z1 = tmp0 + tmp3;
    z2 = tmp1 + tmp2;
    z3 = tmp0 + tmp2;
    std::int64_t z4 = tmp1 + tmp3;
    const std::int64_t z5 = (z3 + z4) * kFix_1_175875602;
    tmp0 *= kFix_0_298631336;
    tmp1 *= kFix_2_053119869;
    tmp2 *= kFix_3_072711026;
    tmp3 *= kFix_1_501321110;
    z1 *= -kFix_0_899976223;
    z2 *= -kFix_2_562915447;
    z3 *= -kFix_1_961570560;
    z4 *= -kFix_0_390180644;
    z3 += z5;
    z4 += z5;
    tmp0 += z1 + z3;
    tmp1 += z2 + z4;
    tmp2 += z2 + z3;
    tmp3 += z1 + z4;

    constexpr int s = kConstBits - kPass1Bits;
    w[8 * 0] = descale(tmp10 + tmp3, s);
    w[8 * 7] = descale(tmp10 - tmp3, s);
    w[8 * 1] = descale(tmp11 + tmp2, s);
    w[8 * 6] = descale(tmp11 - tmp2, s);
    w[8 * 2] = descale(tmp12 + tmp1, s);
    w[8 * 5] = descale(tmp12 - tmp1, s);
    w[8 * 3] = descale(tmp13 + tmp0, s);
    w[8 * 4] = descale(tmp13 - tmp0, s);
  }

  for (int row = 0; row < 8; ++row) {
    const std::int32_t* w = ws + 8 * row;
    std::uint8_t* o = out + row * stride;

    std::int64_t z2 = w[2], z3 = w[6];
    std::int64_t z1 = (z2 + z3) * kFix_0_541196100;
    std::int64_t tmp2 = z1 + z3 * -kFix_1_847759065;
    std::int64_t tmp3 = z1 + z2 * kFix_0_765366865;
    std::int64_t tmp0 = (std::int64_t{w[0]} + w[4]) * (1 << kConstBits);
    std::int64_t tmp1 = (std::int64_t{w[0]} - w[4]) * (1 << kConstBits);
    const std::int64_t tmp10 = tmp0 + tmp3, tmp13 = tmp0 - tmp3;
    const std::int64_t tmp11 = tmp1 + tmp2, tmp12 = tmp1 - tmp2;

    tmp0 = w[7];
    tmp1 = w[5];
    tmp2 = w[3];
    tmp3 = w[1];
    z1 = tmp0 + tmp3;
    z2 = tmp1 + tmp2;
    z3 = tmp0 + tmp2;
    std::int64_t z4 = tmp1 + tmp3;
    const std::int64_t z5 = (z3 + z4) * kFix_1_175875602;
    tmp0 *= kFix_0_298631336;
    tmp1 *= kFix_2_053119869;
    tmp2 *= kFix_3_072711026;
    tmp3 *= kFix_1_501321110;
    z1 *= -kFix_0_899976223;
    z2 *= -kFix_2_562915447;
    z3 *= -kFix_1_961570560;
    z4 *= -kFix_0_390180644;
    z3 += z5;
    z4 += z5;
    tmp0 += z1 + z3;
    tmp1 += z2 + z4;
    tmp2 += z2 + z3;
    tmp3 += z1 + z4;

    constexpr int s = kConstBits + kPass1Bits + 3;
    o[0] = range_limit(descale(tmp10 + tmp3, s));
    o[7] = range_limit(descale(tmp10 - tmp3, s));
    o[1] = range_limit(descale(tmp11 + tmp2, s));
    o[6] = range_limit(descale(tmp11 - tmp2, s));
    o[2] = range_limit(descale(tmp12 + tmp1, s));
    o[5] = range_limit(descale(tmp12 - tmp1, s));
    o[3] = range_limit(descale(tmp13 + tmp0, s));
    o[4] = range_limit(descale(tmp13 - tmp0, s));
  }
}

// ---------------------------------------------------------------------------
// Stream parsing.

struct Component {
  int id = 0;
  int h = 1;
  int v = 1;
  int tq = 0;
  int blocks_w = 0;      // allocated, MCU-padded
  int blocks_h = 0;
  int comp_w = 0;        // downsampled dimensions
  int comp_h = 0;
  std::vector<std::int16_t> coefs;  // natural order per block
  int dc_pred = 0;
  int dc_table = 0;
  int ac_table = 0;
};

class Parser {
 public:
  explicit Parser(std::span<const std::uint8_t> data) : data_(data) {}

  JpegInfo inspect_only() {
    expect_soi();
    while (true) {
      const int marker = next_marker();
      if (marker == 0xDA || marker == 0xD9) break;
      handle_segment(marker);
    }
    if (!frame_seen_) throw DecodeError("no frame header before first scan");
    return info_;
  }

  RawImage decode() {
    expect_soi();
    bool scanned = false;
    while (true) {
      const int marker = next_marker();
      if (marker == 0xD9) break;
      if (marker == 0xDA) {
        if (!frame_seen_) throw DecodeError("scan before frame header");
        if (info_.progressive) throw DecodeError("progressive JPEG is not supported");
        decode_scan();
        scanned = true;
        continue;
      }
      handle_segment(marker);
    }
    if (!scanned) throw DecodeError("no scan data");
    return reconstruct();
  }

 private:
  std::uint8_t byte_at(std::size_t p) const {
    if (p >= data_.size()) throw DecodeError("unexpected end of stream");
    return data_[p];
  }
  int u16_at(std::size_t p) const { return (byte_at(p) << 8) | byte_at(p + 1); }

  void expect_soi() {
    if (data_.size() < 2 || data_[0] != 0xFF || data_[1] != 0xD8) {
      throw DecodeError("missing SOI marker");
    }
    pos_ = 2;
  }

  int next_marker() {
    if (byte_at(pos_) != 0xFF) throw DecodeError("expected marker");
    while (byte_at(pos_) == 0xFF) ++pos_;
    return byte_at(pos_++);
  }

  // Returns the payload span of a length-prefixed segment and advances.
  std::span<const std::uint8_t> segment() {
    const int len = u16_at(pos_);
    if (len < 2 || pos_ + len > data_.size()) throw DecodeError("segment length out of range");
    auto payload = data_.subspan(pos_ + 2, len - 2);
    pos_ += len;
    return payload;
  }

  void handle_segment(int marker) {
    if (marker == 0xDB) {
      parse_dqt(segment());
    } else if (marker == 0xC4) {
      parse_dht(segment());
    } else if (marker == 0xC0 || marker == 0xC1) {
      parse_sof(segment());
    } else if (marker == 0xC2) {
      info_.progressive = true;
      parse_sof(segment());
    } else if ((marker >= 0xC3 && marker <= 0xCF) && marker != 0xC4 && marker != 0xC8 &&
               marker != 0xCC) {
      throw DecodeError("unsupported JPEG process (SOF marker 0x" + hex_byte(marker) + ")");
    } else if (marker == 0xDD) {
      auto p = segment();
      if (p.size() < 2) throw DecodeError("bad DRI segment");
      restart_interval_ = (p[0] << 8) | p[1];
    } else if (marker >= 0xD0 && marker <= 0xD7) {
      // stray RST outside a scan; ignore
    } else if (marker == 0x01) {
      // TEM, no payload
    } else {
      segment();  // APPn, COM and anything else we do not interpret
    }
  }

  static std::string hex_byte(int b) {
    static constexpr char d[] = "0123456789abcdef";
    return {d[(b >> 4) & 15], d[b & 15]};
  }

  void parse_dqt(std::span<const std::uint8_t> p) {
    std::size_t i = 0;
    while (i < p.size()) {
      const int pq = p[i] >> 4;
      const int tq = p[i] & 15;
      ++i;
      if (tq > 3 || pq > 1) throw DecodeError("bad DQT table header");
      const std::size_t need = pq ? 128 : 64;
      if (i + need > p.size()) throw DecodeError("DQT segment truncated");
      for (int k = 0; k < kBlockSize; ++k) {
        const int v = pq ? (p[i + 2 * k] << 8) | p[i + 2 * k + 1] : p[i + k];
        info_.quant_tables[tq][kZigzagToNatural[k]] = static_cast<std::uint16_t>(v);
      }
      info_.quant_present[tq] = true;
      i += need;
    }
  }

  void parse_dht(std::span<const std::uint8_t> p) {
    std::size_t i = 0;
    while (i < p.size()) {
      const int tc = p[i] >> 4;
      const int th = p[i] & 15;
      ++i;
      if (tc > 1 || th > 3) throw DecodeError("bad DHT table header");
      if (i + 16 > p.size()) throw DecodeError("DHT segment truncated");
      HuffmanSpec spec;
      int count = 0;
      for (int l = 0; l < 16; ++l) {
        spec.bits[l] = p[i + l];
        count += p[i + l];
      }
      i += 16;
      if (count > 256 || i + count > p.size()) throw DecodeError("DHT segment truncated");
      spec.values.assign(p.begin() + i, p.begin() + i + count);
      i += count;
      (tc == 0 ? dc_tables_ : ac_tables_)[th] = HuffmanDecoder(spec);
    }
  }

  void parse_sof(std::span<const std::uint8_t> p) {
    if (frame_seen_) throw DecodeError("multiple frame headers");
    if (p.size() < 6) throw DecodeError("SOF segment truncated");
    if (p[0] != 8) throw DecodeError("only 8-bit sample precision is supported");
    info_.height = (p[1] << 8) | p[2];
    info_.width = (p[3] << 8) | p[4];
    const int n = p[5];
    if (info_.height == 0) throw DecodeError("DNL-defined height is not supported");
    if (info_.width == 0) throw DecodeError("zero image width");
    if (n != 1 && n != 3) throw DecodeError("only 1- or 3-component images are supported");
    if (p.size() < 6 + 3 * static_cast<std::size_t>(n)) throw DecodeError("SOF segment truncated");
    for (int c = 0; c < n; ++c) {
      Component comp;
      comp.id = p[6 + 3 * c];
      comp.h = p[7 + 3 * c] >> 4;
      comp.v = p[7 + 3 * c] & 15;
      comp.tq = p[8 + 3 * c];
      if (comp.h < 1 || comp.h > 4 || comp.v < 1 || comp.v > 4 || comp.tq > 3) {
        throw DecodeError("bad component parameters");
      }
      components_.push_back(comp);
      info_.components.push_back({comp.id, comp.h, comp.v, comp.tq});
    }
    for (const auto& c : components_) {
      hmax_ = std::max(hmax_, c.h);
      vmax_ = std::max(vmax_, c.v);
    }
    mcus_x_ = (info_.width + 8 * hmax_ - 1) / (8 * hmax_);
    mcus_y_ = (info_.height + 8 * vmax_ - 1) / (8 * vmax_);
    for (auto& c : components_) {
      if (hmax_ % c.h || vmax_ % c.v) throw DecodeError("non-integral sampling ratio");
      c.blocks_w = mcus_x_ * c.h;
      c.blocks_h = mcus_y_ * c.v;
      c.comp_w = (info_.width * c.h + hmax_ - 1) / hmax_;
      c.comp_h = (info_.height * c.v + vmax_ - 1) / vmax_;
      c.coefs.assign(static_cast<std::size_t>(c.blocks_w) * c.blocks_h * kBlockSize, 0);
    }
    frame_seen_ = true;
  }

  void decode_block(BitReader& reader, Component& c, int bx, int by) {
    const HuffmanDecoder& dc = dc_tables_[c.dc_table];
    const HuffmanDecoder& ac = ac_tables_[c.ac_table];
    std::int16_t* block =
        c.coefs.data() + (static_cast<std::size_t>(by) * c.blocks_w + bx) * kBlockSize;
    const int t = dc.decode(reader);
    if (t > 11) throw DecodeError("bad DC magnitude category");
    c.dc_pred += reader.receive_extend(t);
    block[0] = static_cast<std::int16_t>(c.dc_pred);
    for (int k = 1; k < kBlockSize;) {
      const int rs = ac.decode(reader);
      const int r = rs >> 4;
      const int s = rs & 15;
      if (s == 0) {
        if (r == 15) {
          k += 16;
          continue;
        }
        break;  // EOB
      }
      k += r;
      if (k > 63) throw DecodeError("AC coefficient index out of range");
      block[kZigzagToNatural[k]] = static_cast<std::int16_t>(reader.receive_extend(s));
      ++k;
    }
  }

  void decode_scan() {
    auto p = segment();
    if (p.empty()) throw DecodeError("empty SOS segment");
    const int ns = p[0];
    if (ns < 1 || ns > 4 || p.size() < 1 + 2 * static_cast<std::size_t>(ns) + 3) {
      throw DecodeError("bad SOS segment");
    }
    std::vector<Component*> scan;
    for (int i = 0; i < ns; ++i) {
      const int id = p[1 + 2 * i];
      auto it = std::find_if(components_.begin(), components_.end(),
                             [&](const Component& c) { return c.id == id; });
      if (it == components_.end()) throw DecodeError("scan references unknown component");
      it->dc_table = p[2 + 2 * i] >> 4;
      it->ac_table = p[2 + 2 * i] & 15;
      if (it->dc_table > 3 || it->ac_table > 3 || !dc_tables_[it->dc_table].valid() ||
          !ac_tables_[it->ac_table].valid()) {
        throw DecodeError("scan references undefined Huffman table");
      }
      it->dc_pred = 0;
      scan.push_back(&*it);
    }
    const std::size_t tail = 1 + 2 * ns;
    if (p[tail] != 0 || p[tail + 1] != 63 || p[tail + 2] != 0) {
      throw DecodeError("spectral selection / successive approximation not supported");
    }

    BitReader reader(data_, pos_);
    int restarts_left = restart_interval_;
    int next_rst = 0;
    auto handle_restart = [&](bool more) {
      if (restart_interval_ == 0 || !more) return;
      if (--restarts_left == 0) {
        reader.restart(next_rst);
        next_rst = (next_rst + 1) & 7;
        restarts_left = restart_interval_;
        for (auto* c : scan) c->dc_pred = 0;
      }
    };

    if (ns == 1) {
      Component& c = *scan[0];
      const int bw = (c.comp_w + 7) / 8;
      const int bh = (c.comp_h + 7) / 8;
      for (int by = 0; by < bh; ++by)
        for (int bx = 0; bx < bw; ++bx) {
          decode_block(reader, c, bx, by);
          handle_restart(by != bh - 1 || bx != bw - 1);
        }
    } else {
      for (int my = 0; my < mcus_y_; ++my)
        for (int mx = 0; mx < mcus_x_; ++mx) {
          for (auto* c : scan)
            for (int v = 0; v < c->v; ++v)
              for (int h = 0; h < c->h; ++h)
                decode_block(reader, *c, mx * c->h + h, my * c->v + v);
          handle_restart(my != mcus_y_ - 1 || mx != mcus_x_ - 1);
        }
    }
    pos_ = reader.marker_position();
    if (pos_ >= data_.size()) throw DecodeError("missing EOI marker");
  }

  struct SamplePlane {
    int width = 0;   // allocated (block-padded)
    int height = 0;
    std::vector<std::uint8_t> s;
    std::uint8_t at(int x, int y) const { return s[static_cast<std::size_t>(y) * width + x]; }
  };

  SamplePlane inverse_transform(const Component& c) {
    if (!info_.quant_present[c.tq]) throw DecodeError("component uses undefined quantization table");
    SamplePlane plane{c.blocks_w * 8, c.blocks_h * 8, {}};
    plane.s.resize(static_cast<std::size_t>(plane.width) * plane.height);
    const std::uint16_t* q = info_.quant_tables[c.tq].data();
    for (int by = 0; by < c.blocks_h; ++by)
      for (int bx = 0; bx < c.blocks_w; ++bx) {
        const std::int16_t* coef =
            c.coefs.data() + (static_cast<std::size_t>(by) * c.blocks_w + bx) * kBlockSize;
        idct_islow(coef, q, plane.s.data() + static_cast<std::size_t>(8 * by) * plane.width + 8 * bx,
                   plane.width);
      }
    return plane;
  }

  // Upsamples a component to full resolution following the IJG rules: fancy
  // (triangle) filters for 2x horizontal and 2x2, plain replication otherwise.
  std::vector<std::uint8_t> upsample(const Component& c, const SamplePlane& plane) {
    const int W = info_.width;
    const int H = info_.height;
    const int fx = hmax_ / c.h;
    const int fy = vmax_ / c.v;
    const int dw = c.comp_w;
    const int dh = c.comp_h;
    std::vector<std::uint8_t> out(static_cast<std::size_t>(W) * H);
    auto put = [&](int x, int y, int v) {
      if (x < W && y < H) out[static_cast<std::size_t>(y) * W + x] = static_cast<std::uint8_t>(v);
    };
    auto row_at = [&](int r) { return std::clamp(r, 0, dh - 1); };

    if (fx == 1 && fy == 1) {
      for (int y = 0; y < H; ++y)
        for (int x = 0; x < W; ++x) put(x, y, plane.at(x, y));
    } else if (fx == 2 && fy == 2 && dw > 2) {
      for (int r = 0; r < dh; ++r) {
        for (int half = 0; half < 2; ++half) {
          const int near = r;
          const int far = row_at(half == 0 ? r - 1 : r + 1);
          const int y = 2 * r + half;
          auto colsum = [&](int col) { return plane.at(col, near) * 3 + plane.at(col, far); };
          int this_sum = colsum(0);
          int next_sum = colsum(1);
          put(0, y, (this_sum * 4 + 8) >> 4);
          put(1, y, (this_sum * 3 + next_sum + 7) >> 4);
          int last_sum = this_sum;
          this_sum = next_sum;
          for (int col = 1; col < dw - 1; ++col) {
            next_sum = colsum(col + 1);
            put(2 * col, y, (this_sum * 3 + last_sum + 8) >> 4);
            put(2 * col + 1, y, (this_sum * 3 + next_sum + 7) >> 4);
            last_sum = this_sum;
            this_sum = next_sum;
          }
          put(2 * (dw - 1), y, (this_sum * 3 + last_sum + 8) >> 4);
          put(2 * (dw - 1) + 1, y, (this_sum * 4 + 7) >> 4);
        }
      }
    } else if (fx == 2 && fy == 1 && dw > 2) {
      for (int y = 0; y < std::min(dh, H); ++y) {
        int v = plane.at(0, y);
        put(0, y, v);
        put(1, y, (v * 3 + plane.at(1, y) + 2) >> 2);
        for (int col = 1; col < dw - 1; ++col) {
          v = plane.at(col, y) * 3;
          put(2 * col, y, (v + plane.at(col - 1, y) + 1) >> 2);
          put(2 * col + 1, y, (v + plane.at(col + 1, y) + 2) >> 2);
        }
        v = plane.at(dw - 1, y);
        put(2 * (dw - 1), y, (v * 3 + plane.at(dw - 2, y) + 1) >> 2);
        put(2 * (dw - 1) + 1, y, v);
      }
    } else if (fx == 1 && fy == 2) {
      for (int r = 0; r < dh; ++r)
        for (int half = 0; half < 2; ++half) {
          const int far = row_at(half == 0 ? r - 1 : r + 1);
          const int bias = half == 0 ? 1 : 2;
          for (int x = 0; x < std::min(dw, W); ++x)
            put(x, 2 * r + half, (plane.at(x, r) * 3 + plane.at(x, far) + bias) >> 2);
        }
    } else {
      for (int y = 0; y < H; ++y)
        for (int x = 0; x < W; ++x) put(x, y, plane.at(x / fx, y / fy));
    }
    return out;
  }

  RawImage reconstruct() {
    std::vector<std::vector<std::uint8_t>> full;
    for (const auto& c : components_) full.push_back(upsample(c, inverse_transform(c)));
    if (full.size() == 1) {
      RawImage gray(info_.width, info_.height);
      for (std::size_t i = 0; i < full[0].size(); ++i) {
        gray.pixels[3 * i] = gray.pixels[3 * i + 1] = gray.pixels[3 * i + 2] = full[0][i];
      }
      return gray;
    }
    PlanarImage planes;
    planes.width = info_.width;
    planes.height = info_.height;
    planes.y = std::move(full[0]);
    planes.cb = std::move(full[1]);
    planes.cr = std::move(full[2]);
    return ycbcr_to_rgb(planes);
  }

  std::span<const std::uint8_t> data_;
  std::size_t pos_ = 0;
  JpegInfo info_;
  bool frame_seen_ = false;
  std::vector<Component> components_;
  std::array<HuffmanDecoder, 4> dc_tables_;
  std::array<HuffmanDecoder, 4> ac_tables_;
  int restart_interval_ = 0;
  int hmax_ = 1;
  int vmax_ = 1;
  int mcus_x_ = 0;
  int mcus_y_ = 0;
};

}  // namespace

RawImage decode(std::span<const std::uint8_t> stream) { return Parser(stream).decode(); }

JpegInfo inspect(std::span<const std::uint8_t> stream) {
  Parser parser(stream);
  return parser.inspect_only();
}

}  // namespace qtab
