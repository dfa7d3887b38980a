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

#include "qtab/qtable.h"

#include <cmath>
#include <sstream>

#include "json.hpp"
#include "qtab/error.h"
#include "qtab/image.h"

namespace qtab {
namespace {

constexpr std::array<int, kBlockSize> kLumaAnnexK = {
    16, 11, 10, 16, 24,  40,  51,  61,  12, 12, 14, 19, 26,  58,  60,  55,
    14, 13, 16, 24, 40,  57,  69,  56,  14, 17, 22, 29, 51,  87,  80,  62,
    18, 22, 37, 56, 68,  109, 103, 77,  24, 35, 55, 64, 81,  104, 113, 92,
    49, 64, 78, 87, 103, 121, 120, 101, 72, 92, 95, 98, 112, 100, 103, 99};

constexpr std::array<int, kBlockSize> kChromaAnnexK = {
    17, 18, 24, 47, 99, 99, 99, 99, 18, 21, 26, 66, 99, 99, 99, 99,
    24, 26, 56, 99, 99, 99, 99, 99, 47, 66, 99, 99, 99, 99, 99, 99,
    99, 99, 99, 99, 99, 99, 99, 99, 99, 99, 99, 99, 99, 99, 99, 99,
    99, 99, 99, 99, 99, 99, 99, 99, 99, 99, 99, 99, 99, 99, 99, 99};

void check_entry(long v, int index) {
  if (v < 1 || v > 255) {
    throw InvalidArgument("quantization entry " + std::to_string(index) + " = " +
                          std::to_string(v) + " outside [1, 255]");
  }
}

}  // namespace

QTable::QTable(std::span<const int> row_major) {
  if (row_major.size() != kBlockSize) {
    throw InvalidArgument("quantization table needs 64 entries, got " +
                          std::to_string(row_major.size()));
  }
  for (int i = 0; i < kBlockSize; ++i) {
    check_entry(row_major[i], i);
    entries_[i] = static_cast<std::uint8_t>(row_major[i]);
  }
}

QTable QTable::filled(int value) {
  std::array<int, kBlockSize> v;
  v.fill(value);
  return QTable(v);
}

QTable QTable::from_zigzag(std::span<const int> sequence) {
  if (sequence.size() != kBlockSize) {
    throw InvalidArgument("zig-zag sequence needs 64 entries");
  }
  std::array<int, kBlockSize> natural;
  for (int k = 0; k < kBlockSize; ++k) natural[kZigzagToNatural[k]] = sequence[k];
  return QTable(natural);
}

std::array<int, kBlockSize> QTable::values() const {
  std::array<int, kBlockSize> v;
  std::copy(entries_.begin(), entries_.end(), v.begin());
  return v;
}

std::array<int, kBlockSize> QTable::zigzag_values() const { return zigzag(values()); }

QTable QTable::transposed() const {
  QTable t;
  for (int r = 0; r < 8; ++r)
    for (int c = 0; c < 8; ++c) t.entries_[8 * c + r] = entries_[8 * r + c];
  return t;
}

std::string QTable::to_text() const {
  std::ostringstream os;
  for (int r = 0; r < 8; ++r) {
    for (int c = 0; c < 8; ++c) {
      if (c) os << ' ';
      os << static_cast<int>(entries_[8 * r + c]);
    }
    os << '\n';
  }
  return os.str();
}

std::string QTable::to_json() const {
  nlohmann::json rows = nlohmann::json::array();
  for (int r = 0; r < 8; ++r) {
    nlohmann::json row = nlohmann::json::array();
    for (int c = 0; c < 8; ++c) row.push_back(static_cast<int>(entries_[8 * r + c]));
    rows.push_back(std::move(row));
  }
  return rows.dump();
}

std::string QTable::hex() const {
  static constexpr char kDigits[] = "0123456789abcdef";
  std::string s;
  s.reserve(2 * kBlockSize);
  for (auto e : entries_) {
    s.push_back(kDigits[e >> 4]);
    s.push_back(kDigits[e & 15]);
  }
  return s;
}

QTable QTable::parse_text(std::string_view text) {
  std::istringstream is{std::string(text)};
  std::vector<int> v;
  std::string token;
  while (is >> token) {
    std::size_t used = 0;
    long value = 0;
    try {
      value = std::stol(token, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used != token.size()) throw InvalidArgument("not an integer in Q-table: '" + token + "'");
    check_entry(value, static_cast<int>(v.size()));
    v.push_back(static_cast<int>(value));
  }
  if (v.size() != kBlockSize) {
    throw InvalidArgument("Q-table text must hold 64 integers, found " + std::to_string(v.size()));
  }
  return QTable(v);
}

QTable QTable::parse_json(std::string_view text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw InvalidArgument(std::string("Q-table JSON: ") + e.what());
  }
  std::vector<int> v;
  auto take = [&](const nlohmann::json& x) {
    if (!x.is_number_integer()) throw InvalidArgument("Q-table JSON entries must be integers");
    check_entry(x.get<long>(), static_cast<int>(v.size()));
    v.push_back(x.get<int>());
  };
  if (!j.is_array()) throw InvalidArgument("Q-table JSON must be an array");
  if (j.size() == 8 && j[0].is_array()) {
    for (const auto& row : j) {
      if (!row.is_array() || row.size() != 8) {
        throw InvalidArgument("Q-table JSON must be 8 arrays of 8 integers");
      }
      for (const auto& x : row) take(x);
    }
  } else {
    for (const auto& x : j) take(x);
  }
  if (v.size() != kBlockSize) throw InvalidArgument("Q-table JSON must hold 64 integers");
  return QTable(v);
}

QTable load_qtable(const std::filesystem::path& path) {
  const auto bytes = read_file(path);
  const std::string text(bytes.begin(), bytes.end());
  const auto first = text.find_first_not_of(" \t\r\n");
  try {
    if (first != std::string::npos && text[first] == '[') return QTable::parse_json(text);
    return QTable::parse_text(text);
  } catch (const InvalidArgument& e) {
    throw InvalidArgument(path.string() + ": " + e.what());
  }
}

void save_qtable(const std::filesystem::path& path, const QTable& table) {
  const std::string text = path.extension() == ".json" ? table.to_json() + "\n" : table.to_text();
  write_file(path, std::span(reinterpret_cast<const std::uint8_t*>(text.data()), text.size()));
}

QTable standard_table(Channel channel) {
  return QTable(channel == Channel::kLuma ? kLumaAnnexK : kChromaAnnexK);
}

QualityFactor::QualityFactor(int q) : value(q) {
  if (q < 1 || q > 100) {
    throw InvalidArgument("quality factor must be in [1, 100], got " + std::to_string(q));
  }
}

QTable scale_by_quality(const QTable& base, QualityFactor quality) {
  const long q = quality.value;
  const long scale = q < 50 ? 5000 / q : 200 - 2 * q;
  std::array<int, kBlockSize> v;
  for (int i = 0; i < kBlockSize; ++i) {
    const long scaled = (base[i] * scale + 50) / 100;
    v[i] = static_cast<int>(std::clamp(scaled, 1L, 255L));
  }
  return QTable(v);
}

SampleRange::SampleRange(int s, int e) : start(s), end(e) {
  if (!(1 <= s && s < e && e <= 255)) {
    throw InvalidArgument("sample range needs 1 <= s < e <= 255, got [" + std::to_string(s) +
                          ", " + std::to_string(e) + "]");
  }
}

QTable sorted_random_sample(const SampleRange& range, std::uint64_t seed, SortOrder order) {
  std::mt19937_64 rng(seed);
  return sorted_random_sample(range, rng, order);
}

void Bounds::validate() const {
  for (int i = 0; i < kBlockSize; ++i) {
    if (!(lower[i] <= upper[i]) || lower[i] < 1.0 || upper[i] > 255.0) {
      throw InvalidArgument("invalid bounds at entry " + std::to_string(i));
    }
  }
}

namespace {

constexpr double kIntSlack = 1e-9;

int nearest_mid(double lo, double hi) {
  return static_cast<int>(std::clamp(std::round(0.5 * (lo + hi)), 1.0, 255.0));
}

}  // namespace

int Bounds::lower_int(int i) const {
  const int lo = static_cast<int>(std::ceil(lower[i] - kIntSlack));
  const int hi = static_cast<int>(std::floor(upper[i] + kIntSlack));
  return lo <= hi ? std::max(lo, 1) : nearest_mid(lower[i], upper[i]);
}

int Bounds::upper_int(int i) const {
  const int lo = static_cast<int>(std::ceil(lower[i] - kIntSlack));
  const int hi = static_cast<int>(std::floor(upper[i] + kIntSlack));
  return lo <= hi ? std::min(hi, 255) : nearest_mid(lower[i], upper[i]);
}

bool Bounds::contains(const QTable& table) const {
  for (int i = 0; i < kBlockSize; ++i) {
    if (table[i] < lower_int(i) || table[i] > upper_int(i)) return false;
  }
  return true;
}

Bounds Bounds::from_table(const QTable& table) {
  Bounds b;
  for (int i = 0; i < kBlockSize; ++i) b.lower[i] = b.upper[i] = table[i];
  return b;
}

Bounds bounds_from_tables(std::span<const QTable> tables) {
  if (tables.empty()) throw InvalidArgument("cannot bound an empty set of tables");
  std::vector<QTable> all(tables.begin(), tables.end());
  for (const auto& t : tables) all.push_back(t.transposed());
  const auto n = static_cast<std::int64_t>(all.size());

  Bounds b;
  for (int i = 0; i < kBlockSize; ++i) {
    int lo = 255, hi = 1;
    std::int64_t sum = 0, sum_sq = 0;
    for (const auto& t : all) {
      lo = std::min(lo, t[i]);
      hi = std::max(hi, t[i]);
      sum += t[i];
      sum_sq += t[i] * t[i];
    }
    // Population sigma from exact integer moments: n^2 var = n sum_sq - sum^2.
    const double sigma = std::sqrt(static_cast<double>(n * sum_sq - sum * sum)) / static_cast<double>(n);
    b.lower[i] = std::clamp(lo - 0.5 * sigma, 1.0, 255.0);
    b.upper[i] = std::clamp(hi + 0.5 * sigma, 1.0, 255.0);
  }
  return b;
}

FrequencyBands::FrequencyBands(int lf_end, int mf_end) : lf_end_(lf_end), mf_end_(mf_end) {
  if (!(0 < lf_end && lf_end < mf_end && mf_end < kBlockSize)) {
    throw InvalidArgument("band cut points need 0 < lf_end < mf_end < 64");
  }
}

Band FrequencyBands::band_of_zigzag(int k) const {
  if (k < lf_end_) return Band::kLow;
  if (k < mf_end_) return Band::kMid;
  return Band::kHigh;
}

std::vector<int> FrequencyBands::zigzag_positions(Band band) const {
  std::vector<int> out;
  for (int k = 0; k < kBlockSize; ++k)
    if (band_of_zigzag(k) == band) out.push_back(k);
  return out;
}

std::vector<int> FrequencyBands::area_of_interest() const {
  std::vector<int> out;
  for (int k = 0; k < mf_end_; ++k) out.push_back(kZigzagToNatural[k]);
  return out;
}

FrequencyBands default_bands() { return FrequencyBands(10, 36); }

}  // namespace qtab
