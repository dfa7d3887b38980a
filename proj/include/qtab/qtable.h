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

#ifndef QTAB_QTABLE_H_
#define QTAB_QTABLE_H_

#include <algorithm>
#include <array>
#include <compare>
#include <cstdint>
#include <filesystem>
#include <random>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "qtab/block.h"

namespace qtab {

// 8x8 quantization table; every entry in [1, 255]. Stored row-major.
class QTable {
 public:
  QTable() { entries_.fill(1); }

  // Row-major values; throws InvalidArgument on any entry outside [1, 255].
  explicit QTable(std::span<const int> row_major);

  static QTable filled(int value);
  static QTable from_zigzag(std::span<const int> sequence);

  int operator()(int row, int col) const { return entries_[8 * row + col]; }
  int operator[](int natural_index) const { return entries_[natural_index]; }
  int zigzag_at(int k) const { return entries_[kZigzagToNatural[k]]; }

  std::array<int, kBlockSize> values() const;
  std::array<int, kBlockSize> zigzag_values() const;
  QTable transposed() const;
  bool is_symmetric() const { return *this == transposed(); }

  // Eight lines of eight integers, row-major.
  std::string to_text() const;
  // JSON array of eight arrays of eight integers.
  std::string to_json() const;
  // Compact lowercase hex of the 64 bytes, used in cache keys.
  std::string hex() const;

  static QTable parse_text(std::string_view text);
  static QTable parse_json(std::string_view text);

  auto operator<=>(const QTable&) const = default;

 private:
  std::array<std::uint8_t, kBlockSize> entries_{};
};

// Accepts either the text or the JSON layout.
QTable load_qtable(const std::filesystem::path& path);
void save_qtable(const std::filesystem::path& path, const QTable& table);

enum class Channel { kLuma, kChroma };

// Typical tables from the JPEG standard (ITU T.81 Annex K).
QTable standard_table(Channel channel);

struct QualityFactor {
  int value;
  explicit QualityFactor(int q);
};

// IJG scaling: scale = 5000/q for q < 50, 200 - 2q otherwise;
// entry' = clamp((entry * scale + 50) / 100, 1, 255).
QTable scale_by_quality(const QTable& base, QualityFactor quality);

// Integer range [start, end] with 1 <= start < end <= 255.
struct SampleRange {
  int start;
  int end;
  SampleRange(int s, int e);
};

enum class SortOrder {
  kAscending,   // small quantizers at low frequencies
  kDescending,
};

// 64 uniform draws from `range`, sorted and laid out along the zig-zag path.
template <typename Urbg>
QTable sorted_random_sample(const SampleRange& range, Urbg& rng,
                            SortOrder order = SortOrder::kAscending) {
  std::uniform_int_distribution<int> draw(range.start, range.end);
  std::array<int, kBlockSize> seq;
  for (int& v : seq) v = draw(rng);
  std::sort(seq.begin(), seq.end());
  if (order == SortOrder::kDescending) std::reverse(seq.begin(), seq.end());
  return QTable::from_zigzag(seq);
}

QTable sorted_random_sample(const SampleRange& range, std::uint64_t seed,
                            SortOrder order = SortOrder::kAscending);

// Draws (s, e) uniformly over all pairs with 1 <= s < e <= 255.
template <typename Urbg>
SampleRange random_sample_range(Urbg& rng) {
  // 255 * 254 / 2 ordered pairs; index them to keep the draw uniform.
  std::uniform_int_distribution<int> pick(0, 255 * 254 / 2 - 1);
  int idx = pick(rng);
  int s = 1;
  while (idx >= 255 - s) {
    idx -= 255 - s;
    ++s;
  }
  return SampleRange(s, s + 1 + idx);
}

// Elementwise box for bounded search. Values are kept as reals.
struct Bounds {
  std::array<double, kBlockSize> lower{};
  std::array<double, kBlockSize> upper{};

  // Throws InvalidArgument unless lower <= upper and both lie in [1, 255].
  void validate() const;

  // Integer interval of entry i: [ceil(lower), floor(upper)], or the nearest
  // integer to the midpoint when that interval is empty.
  int lower_int(int i) const;
  int upper_int(int i) const;
  bool contains(const QTable& table) const;

  static Bounds from_table(const QTable& table);
};

template <typename Urbg>
QTable sample_within(const Bounds& bounds, Urbg& rng) {
  std::array<int, kBlockSize> v;
  for (int i = 0; i < kBlockSize; ++i) {
    std::uniform_int_distribution<int> draw(bounds.lower_int(i), bounds.upper_int(i));
    v[i] = draw(rng);
  }
  return QTable(v);
}

// Boundary matrices over a set of tables P': with P'' = P' plus transposes,
// lower = min - sigma/2 and upper = max + sigma/2 per cell, sigma being the
// population standard deviation over P''. Clamped into [1, 255].
// Throws InvalidArgument on an empty set.
Bounds bounds_from_tables(std::span<const QTable> tables);

enum class Band : std::uint8_t { kLow = 0, kMid = 1, kHigh = 2 };

// Partition of zig-zag positions: LF = [0, lf_end), MF = [lf_end, mf_end),
// HF = [mf_end, 64).
class FrequencyBands {
 public:
  FrequencyBands(int lf_end, int mf_end);

  Band band_of_zigzag(int k) const;
  Band band_of_natural(int index) const { return band_of_zigzag(kNaturalToZigzag[index]); }
  int lf_end() const { return lf_end_; }
  int mf_end() const { return mf_end_; }
  std::vector<int> zigzag_positions(Band band) const;
  // Row-major indices of the LF and MF bands.
  std::vector<int> area_of_interest() const;

 private:
  int lf_end_;
  int mf_end_;
};

FrequencyBands default_bands();

}  // namespace qtab

#endif  // QTAB_QTABLE_H_
