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

#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <map>
#include <random>
#include <set>

#include "oracles.h"
#include "qtab/error.h"
#include "qtab/pareto.h"
#include "qtab/qtable.h"
#include "test_images.h"

namespace qtab {
namespace {

using testing::random_table;

TEST(QTable, RejectsOutOfRangeEntries) {
  std::array<int, kBlockSize> v;
  v.fill(10);
  EXPECT_NO_THROW(QTable{v});
  v[5] = 0;
  EXPECT_THROW(QTable{v}, InvalidArgument);
  v[5] = 256;
  EXPECT_THROW(QTable{v}, InvalidArgument);
  EXPECT_THROW(QTable::filled(0), InvalidArgument);
  EXPECT_THROW(QTable::from_zigzag(std::vector<int>(63, 1)), InvalidArgument);
}

TEST(QTable, ZigzagLayoutAndTranspose) {
  std::vector<int> seq(kBlockSize);
  for (int k = 0; k < kBlockSize; ++k) seq[k] = k + 1;
  const QTable t = QTable::from_zigzag(seq);
  EXPECT_EQ(t(0, 0), 1);
  EXPECT_EQ(t(0, 1), 2);
  EXPECT_EQ(t(1, 0), 3);
  EXPECT_EQ(t(2, 0), 4);
  EXPECT_EQ(t(7, 7), 64);
  for (int k = 0; k < kBlockSize; ++k) EXPECT_EQ(t.zigzag_at(k), k + 1);
  const QTable tt = t.transposed();
  for (int r = 0; r < 8; ++r) {
    for (int c = 0; c < 8; ++c) EXPECT_EQ(tt(r, c), t(c, r));
  }
  EXPECT_EQ(tt.transposed(), t);
}

TEST(QTable, TextJsonAndFileRoundTrip) {
  std::mt19937_64 rng(4);
  const QTable t = random_table(rng);
  EXPECT_EQ(QTable::parse_text(t.to_text()), t);
  EXPECT_EQ(QTable::parse_json(t.to_json()), t);
  EXPECT_EQ(t.hex().size(), 128u);
  EXPECT_THROW(QTable::parse_text("1 2 3"), InvalidArgument);
  EXPECT_THROW(QTable::parse_json("[[1,2],[3]]"), InvalidArgument);
  EXPECT_THROW(QTable::parse_text(std::string(64 * 2, ' ') + "x"), InvalidArgument);

  const auto dir = std::filesystem::temp_directory_path() / "qtab_qtable_test";
  std::filesystem::create_directories(dir);
  save_qtable(dir / "t.txt", t);
  EXPECT_EQ(load_qtable(dir / "t.txt"), t);
  {
    std::ofstream(dir / "t.json") << t.to_json();
  }
  EXPECT_EQ(load_qtable(dir / "t.json"), t);
  std::filesystem::remove_all(dir);
}

TEST(StandardTable, AnnexKValues) {
  const QTable luma = standard_table(Channel::kLuma);
  const QTable chroma = standard_table(Channel::kChroma);
  EXPECT_EQ(luma(0, 0), 16);
  EXPECT_EQ(luma(7, 7), 99);
  EXPECT_EQ(luma(0, 1), 11);
  EXPECT_EQ(luma(1, 0), 12);
  EXPECT_EQ(chroma(0, 0), 17);
  EXPECT_EQ(chroma(7, 7), 99);
  EXPECT_EQ(chroma(0, 4), 99);
}

TEST(QualityScaling, FormulaExamples) {
  const QTable luma = standard_table(Channel::kLuma);
  EXPECT_EQ(scale_by_quality(luma, QualityFactor(50)), luma);
  EXPECT_EQ(scale_by_quality(luma, QualityFactor(100)), QTable::filled(1));
  EXPECT_EQ(scale_by_quality(luma, QualityFactor(25))(0, 0), 32);
  // scale 5000/1 = 5000: 16 * 5000 clamps to 255.
  EXPECT_EQ(scale_by_quality(luma, QualityFactor(1))(0, 0), 255);
  EXPECT_THROW(QualityFactor(0), InvalidArgument);
  EXPECT_THROW(QualityFactor(101), InvalidArgument);
}

TEST(QualityScaling, MatchesScalarOracleAndIsAntitone) {
  std::mt19937_64 rng(2);
  for (int t = 0; t < 50; ++t) {
    const QTable base = random_table(rng);
    EXPECT_EQ(scale_by_quality(base, QualityFactor(50)), base);
    for (int q = 1; q <= 100; ++q) {
      const int scale = q < 50 ? 5000 / q : 200 - 2 * q;
      const QTable s = scale_by_quality(base, QualityFactor(q));
      for (int i = 0; i < kBlockSize; ++i) {
        const long v = (static_cast<long>(base[i]) * scale + 50) / 100;
        ASSERT_EQ(s[i], std::clamp<long>(v, 1, 255));
        if (q > 1) {
          ASSERT_LE(s[i], scale_by_quality(base, QualityFactor(q - 1))[i]);
        }
      }
    }
  }
}

TEST(SortedRandom, DegenerateDrawGivesConstantTable) {
  // With s = 7 and e = 8 some draws are 8; the sorted layout puts every 7
  // before every 8, and a fixed range of one value is constant.
  std::mt19937_64 rng(1);
  const QTable t = sorted_random_sample(SampleRange(7, 8), rng);
  int sevens = 0;
  for (int k = 0; k < kBlockSize; ++k) sevens += t.zigzag_at(k) == 7;
  for (int k = 0; k < kBlockSize; ++k) EXPECT_EQ(t.zigzag_at(k), k < sevens ? 7 : 8);
  EXPECT_THROW(SampleRange(8, 8), InvalidArgument);
  EXPECT_THROW(SampleRange(0, 8), InvalidArgument);
  EXPECT_THROW(SampleRange(3, 256), InvalidArgument);
}

TEST(SortedRandom, NonDecreasingAlongZigzagForManySeeds) {
  for (std::uint64_t seed = 0; seed < 10000; ++seed) {
    std::mt19937_64 rng(seed);
    const SampleRange range = random_sample_range(rng);
    const QTable t = sorted_random_sample(range, rng);
    for (int k = 0; k < kBlockSize; ++k) {
      ASSERT_GE(t.zigzag_at(k), range.start);
      ASSERT_LE(t.zigzag_at(k), range.end);
      if (k) {
        ASSERT_LE(t.zigzag_at(k - 1), t.zigzag_at(k)) << "seed " << seed;
      }
    }
  }
}

TEST(SortedRandom, DescendingFlagAndDeterminism) {
  const QTable a = sorted_random_sample(SampleRange(3, 90), 42);
  EXPECT_EQ(a, sorted_random_sample(SampleRange(3, 90), 42));
  const QTable d = sorted_random_sample(SampleRange(3, 90), 42, SortOrder::kDescending);
  for (int k = 1; k < kBlockSize; ++k) EXPECT_GE(d.zigzag_at(k - 1), d.zigzag_at(k));
}

TEST(SortedRandom, RangePairsAreUniform) {
  std::mt19937_64 rng(9);
  std::map<int, int> starts;
  const int n = 200000;
  for (int i = 0; i < n; ++i) {
    const SampleRange r = random_sample_range(rng);
    ASSERT_GE(r.start, 1);
    ASSERT_LT(r.start, r.end);
    ASSERT_LE(r.end, 255);
    ++starts[r.start];
  }
  // P(s) = (255 - s) / (255 * 254 / 2); check s = 1 and s = 128.
  const double pairs = 255.0 * 254.0 / 2.0;
  for (int s : {1, 128}) {
    const double p = (255.0 - s) / pairs;
    EXPECT_NEAR(starts[s] / static_cast<double>(n), p, 5.0 * std::sqrt(p * (1 - p) / n)) << s;
  }
}

TEST(Bounds, SingleSymmetricMemberCollapses) {
  std::array<int, kBlockSize> v;
  for (int r = 0; r < 8; ++r) {
    for (int c = 0; c < 8; ++c) v[8 * r + c] = 10 + r + c;
  }
  const QTable t(v);
  const QTable one[] = {t};
  const Bounds b = bounds_from_tables(one);
  for (int i = 0; i < kBlockSize; ++i) {
    EXPECT_EQ(b.lower[i], t[i]);
    EXPECT_EQ(b.upper[i], t[i]);
  }
}

TEST(Bounds, SingleAsymmetricMemberUsesTwoElementStatistics) {
  std::array<int, kBlockSize> v;
  v.fill(50);
  v[8 * 1 + 3] = 40;  // (1,3) = a
  v[8 * 3 + 1] = 60;  // (3,1) = b
  const QTable one[] = {QTable(v)};
  const Bounds b = bounds_from_tables(one);
  // sigma = |a-b|/2 = 10: lower = min - 5, upper = max + 5
  for (int idx : {8 * 1 + 3, 8 * 3 + 1}) {
    EXPECT_EQ(b.lower[idx], 35.0);
    EXPECT_EQ(b.upper[idx], 65.0);
  }
  EXPECT_EQ(b.lower[0], 50.0);
  EXPECT_THROW(bounds_from_tables({}), InvalidArgument);
}

TEST(Bounds, ClampedIntoValidRange) {
  std::array<int, kBlockSize> lo, hi;
  lo.fill(1);
  hi.fill(255);
  lo[2] = 255;
  hi[2] = 1;
  const QTable tables[] = {QTable(lo), QTable(hi)};
  const Bounds b = bounds_from_tables(tables);
  for (int i = 0; i < kBlockSize; ++i) {
    EXPECT_GE(b.lower[i], 1.0);
    EXPECT_LE(b.upper[i], 255.0);
    EXPECT_LE(b.lower[i], b.upper[i]);
  }
  EXPECT_NO_THROW(b.validate());
}

TEST(Bounds, ComputeBoundsMatchesBruteForce) {
  std::mt19937_64 rng(31);
  std::uniform_real_distribution<double> rate(2.0, 30.0), acc(0.0, 1.0);
  for (int trial = 0; trial < 200; ++trial) {
    std::vector<EvalPoint> pts(60);
    for (auto& p : pts) {
      p.qtable = random_table(rng);
      p.compression_rate = rate(rng);
      p.accuracy = acc(rng);
    }
    const ParetoFrontier f = build_frontier(pts);
    const double lo = rate(rng);
    const double hi = lo + 8.0;
    const auto want = testing::brute_force_bounds(f.points(), lo, hi);
    if (want.empty()) {
      EXPECT_THROW(compute_bounds(f, lo, hi), InvalidArgument);
      continue;
    }
    const Bounds got = compute_bounds(f, lo, hi);
    for (int i = 0; i < kBlockSize; ++i) {
      ASSERT_EQ(got.lower[i], want[0].lower[i]);
      ASSERT_EQ(got.upper[i], want[0].upper[i]);
      const int j = 8 * (i % 8) + i / 8;
      ASSERT_EQ(got.lower[i], got.lower[j]);
      ASSERT_EQ(got.upper[i], got.upper[j]);
      ASSERT_LE(got.lower[i], got.upper[i]);
    }
  }
}

TEST(Bounds, IntegerIntervalsStayInsideRealBox) {
  Bounds b;
  b.lower.fill(3.4);
  b.upper.fill(7.6);
  b.lower[1] = 5.2;
  b.upper[1] = 5.7;  // no integer inside: nearest to the midpoint
  EXPECT_EQ(b.lower_int(0), 4);
  EXPECT_EQ(b.upper_int(0), 7);
  EXPECT_EQ(b.lower_int(1), 5);
  EXPECT_EQ(b.upper_int(1), 5);
  std::mt19937_64 rng(1);
  for (int t = 0; t < 1000; ++t) {
    const QTable s = sample_within(b, rng);
    ASSERT_TRUE(b.contains(s));
    for (int i = 0; i < kBlockSize; ++i) {
      if (i == 1) continue;
      ASSERT_GE(s[i], b.lower[i]);
      ASSERT_LE(s[i], b.upper[i]);
    }
  }
  const QTable t = random_table(rng);
  const Bounds point = Bounds::from_table(t);
  EXPECT_EQ(sample_within(point, rng), t);
}

TEST(Bands, DefaultPartition) {
  const FrequencyBands bands = default_bands();
  EXPECT_EQ(bands.band_of_zigzag(0), Band::kLow);
  EXPECT_EQ(bands.band_of_zigzag(9), Band::kLow);
  EXPECT_EQ(bands.band_of_zigzag(10), Band::kMid);
  EXPECT_EQ(bands.band_of_zigzag(35), Band::kMid);
  EXPECT_EQ(bands.band_of_zigzag(36), Band::kHigh);
  EXPECT_EQ(bands.band_of_zigzag(63), Band::kHigh);
  const auto lf = bands.zigzag_positions(Band::kLow);
  const auto mf = bands.zigzag_positions(Band::kMid);
  const auto hf = bands.zigzag_positions(Band::kHigh);
  EXPECT_EQ(lf.size() + mf.size() + hf.size(), 64u);
  std::set<int> all(lf.begin(), lf.end());
  all.insert(mf.begin(), mf.end());
  all.insert(hf.begin(), hf.end());
  EXPECT_EQ(all.size(), 64u);
  EXPECT_LT(lf.back(), mf.front());
  EXPECT_LT(mf.back(), hf.front());
  const auto aoi = bands.area_of_interest();
  EXPECT_EQ(aoi.size(), 36u);
  for (int idx : aoi) EXPECT_NE(bands.band_of_natural(idx), Band::kHigh);
  EXPECT_THROW(FrequencyBands(0, 10), InvalidArgument);
  EXPECT_THROW(FrequencyBands(10, 10), InvalidArgument);
  EXPECT_THROW(FrequencyBands(10, 64), InvalidArgument);
}

}  // namespace
}  // namespace qtab
