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
#include <signal.h>
#include <sys/wait.h>
#include <unistd.h>

#include <cmath>
#include <filesystem>
#include <random>
#include <thread>

#include "oracle_evaluator.h"
#include "qtab/dct.h"
#include "qtab/error.h"
#include "qtab/eval.h"
#include "qtab/evaluator.h"
#include "qtab/jpeg.h"
#include "qtab/proxy_classifier.h"
#include "test_images.h"

namespace qtab {
namespace {

using testing::constant_image;
using testing::textured_image;

Dataset textured_dataset(int n, int classes = 4) {
  std::vector<LabeledImage> items;
  for (int i = 0; i < n; ++i) items.push_back({textured_image(64, 64, 100 + i), i % classes, ""});
  return Dataset(std::move(items), classes);
}

// Grayscale image whose every block is the inverse DCT of random AC content
// confined to the zig-zag positions [first, last).
RawImage band_image(int first, int last, double amplitude, std::uint64_t seed, int size = 64) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> coef(-amplitude, amplitude);
  RawImage img(size, size);
  for (int by = 0; by < size; by += 8) {
    for (int bx = 0; bx < size; bx += 8) {
      Block c{};
      for (int k = first; k < last; ++k) c[kZigzagToNatural[k]] = coef(rng);
      const Block s = inverse_dct(c);
      for (int y = 0; y < 8; ++y) {
        for (int x = 0; x < 8; ++x) {
          const auto v = static_cast<std::uint8_t>(std::clamp(std::lround(s[8 * y + x] + 128.0), 0L, 255L));
          std::uint8_t* px = img.row(by + y) + 3 * (bx + x);
          px[0] = px[1] = px[2] = v;
        }
      }
    }
  }
  return img;
}

TEST(CompressionRate, ByteCountArithmetic) {
  const RawImage img = textured_image(64, 64, 1);
  const Dataset ds({{img, 0, ""}});
  EXPECT_EQ(ds.raw_bytes(), 12288u);
  const TableSet tables = standard_tables(50);
  const EncodeConfig config;
  const std::size_t encoded = encode(img, tables.luma, tables.chroma, config.subsampling).size_bytes();
  EXPECT_DOUBLE_EQ(compression_rate(ds, tables, config), 12288.0 / static_cast<double>(encoded));
}

TEST(CompressionRate, CoarserTableCompressesMore) {
  const Dataset ds = textured_dataset(4);
  EXPECT_GT(compression_rate(ds, QTable::filled(255)), compression_rate(ds, QTable::filled(1)));
}

TEST(CompressionRate, InvariantUnderReplicationAndPermutation) {
  const Dataset ds = textured_dataset(5);
  std::vector<LabeledImage> doubled = ds.items();
  doubled.insert(doubled.end(), ds.items().begin(), ds.items().end());
  std::vector<LabeledImage> reversed(ds.items().rbegin(), ds.items().rend());
  std::mt19937_64 rng(3);
  const QTable t = testing::random_table(rng, 2, 60);
  const double base = compression_rate(ds, t);
  EXPECT_DOUBLE_EQ(compression_rate(Dataset(doubled), t), base);
  EXPECT_DOUBLE_EQ(compression_rate(Dataset(reversed), t), base);
}

TEST(Evaluate, AllOnesTableKeepsUncompressedProxyAccuracy) {
  SyntheticCorpusSpec spec;
  spec.n_classes = 20;
  spec.images_per_class = 3;
  const Dataset ds = synthesize_dataset(spec);
  ProxyEvaluator proxy;
  std::vector<RawImage> originals;
  std::vector<std::size_t> idx;
  for (std::size_t i = 0; i < ds.size(); ++i) {
    originals.push_back(ds[i].image);
    idx.push_back(i);
  }
  const auto correct = proxy.judge(ds, idx, originals, 1);
  const double uncompressed =
      static_cast<double>(std::count(correct.begin(), correct.end(), 1)) / static_cast<double>(ds.size());
  EvalOptions options;
  options.encode.subsampling = Subsampling::k444;
  EXPECT_DOUBLE_EQ(evaluate(ds, QTable::filled(1), proxy, options).point.accuracy, uncompressed);
}

TEST(Evaluate, ConstantClassifierScoresClassShare) {
  std::vector<LabeledImage> items;
  for (int i = 0; i < 20; ++i) items.push_back({constant_image(16, 16, 9, 9, 9), i < 2 ? 0 : 1 + i % 9, ""});
  const Dataset ds(std::move(items), 10);
  testing::ConstantEvaluator zero(0);
  EXPECT_DOUBLE_EQ(evaluate(ds, QTable::filled(4), zero).point.accuracy, 0.1);
}

TEST(Evaluate, LabelOracleGivesPerfectAccuracyAndBoundsHold) {
  const Dataset ds = textured_dataset(6);
  testing::LabelOracleEvaluator oracle;
  ProxyEvaluator proxy;
  std::mt19937_64 rng(5);
  for (int t = 0; t < 5; ++t) {
    const QTable q = testing::random_table(rng);
    EXPECT_EQ(evaluate(ds, q, oracle).point.accuracy, 1.0);
    const EvalPoint p = evaluate(ds, q, proxy).point;
    EXPECT_GE(p.accuracy, 0.0);
    EXPECT_LE(p.accuracy, 1.0);
    EXPECT_GT(p.compression_rate, 0.0);
  }
}

TEST(Evaluate, PsnrIsReportedOnRequest) {
  const Dataset ds = textured_dataset(3);
  testing::LabelOracleEvaluator oracle;
  EvalOptions options;
  options.compute_psnr = true;
  const EvalOutcome a = evaluate(ds, standard_tables(90), oracle, options);
  const EvalOutcome b = evaluate(ds, standard_tables(20), oracle, options);
  ASSERT_TRUE(a.point.mean_psnr && b.point.mean_psnr);
  EXPECT_GT(*a.point.mean_psnr, *b.point.mean_psnr);
  EXPECT_FALSE(evaluate(ds, standard_tables(90), oracle).point.mean_psnr);
}

TEST(Evaluate, DeterministicAcrossThreadCounts) {
  const Dataset ds = textured_dataset(9);
  ProxyEvaluator proxy;
  EvalOptions one, many;
  one.threads = 1;
  many.threads = 4;
  many.chunk = 2;
  const EvalOutcome a = evaluate(ds, standard_tables(30), proxy, one);
  const EvalOutcome b = evaluate(ds, standard_tables(30), proxy, many);
  EXPECT_EQ(a.point.compression_rate, b.point.compression_rate);
  EXPECT_EQ(a.correct, b.correct);
}

TEST(Evaluate, GoldenQuality50OnProxyCorpus) {
  SyntheticCorpusSpec spec;
  spec.n_classes = 20;
  spec.images_per_class = 25;
  const Dataset ds = synthesize_dataset(spec);
  ASSERT_EQ(ds.size(), 500u);
  ProxyEvaluator proxy;
  const EvalPoint p = evaluate(ds, standard_tables(50), proxy).point;
  EXPECT_DOUBLE_EQ(p.compression_rate, 6.7981822829013101);
  EXPECT_DOUBLE_EQ(p.accuracy, 257.0 / 500.0);
}

TEST(Proxy, ConstantImageIsFlat) {
  const ProxyClassifier proxy;
  for (int v : {0, 37, 128, 255}) {
    const auto img = constant_image(32, 24, v, 255 - v, v / 2);
    const BandEnergy e = proxy.band_energy(img);
    EXPECT_EQ(e.lf + e.mf + e.hf, 0.0);
    EXPECT_EQ(proxy.classify(img), ProxyClassifier::kFlatClass);
  }
  EXPECT_THROW(proxy.band_energy(constant_image(7, 32, 0, 0, 0)), InvalidArgument);
}

TEST(Proxy, LowFrequencyContentIsLfDominant) {
  const ProxyClassifier proxy;
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    const RawImage img = band_image(1, 10, 200.0, seed);
    EXPECT_EQ(proxy.classify(img), proxy.lf_dominant_class()) << seed;
    EXPECT_EQ(proxy.classify(img), proxy.classify(img));
  }
  const RawImage sine = [] {
    RawImage img(64, 64);
    for (int y = 0; y < 64; ++y) {
      for (int x = 0; x < 64; ++x) {
        const auto v = static_cast<std::uint8_t>(std::lround(128.0 + 100.0 * std::cos((2 * (x % 8) + 1) * M_PI / 16.0)));
        std::uint8_t* px = img.row(y) + 3 * x;
        px[0] = px[1] = px[2] = v;
      }
    }
    return img;
  }();
  EXPECT_EQ(proxy.classify(sine), proxy.lf_dominant_class());
  const RawImage mf = band_image(10, 36, 120.0, 3);
  EXPECT_EQ(proxy.classify(mf), proxy.mf_dominant_class());
}

// Quantizing the content band harder never helps the proxy on images whose
// whole signal lives in that band.
TEST(Proxy, MonotoneDamageWithinSignatureBand) {
  ProxyEvaluator proxy;
  struct Case {
    int first, last, label;
    double amplitude;
  };
  const Case cases[] = {{1, 10, proxy.proxy().lf_dominant_class(), 60.0},
                        {10, 36, proxy.proxy().mf_dominant_class(), 40.0}};
  EvalOptions options;
  options.encode.subsampling = Subsampling::k444;
  for (const Case& c : cases) {
    std::vector<LabeledImage> items;
    for (std::uint64_t s = 0; s < 24; ++s) items.push_back({band_image(c.first, c.last, c.amplitude, 50 + s), c.label, ""});
    const Dataset ds(std::move(items), proxy.proxy().class_count());
    double previous = 2.0;
    for (int step = 1; step <= 255; step += 6) {
      std::array<int, kBlockSize> v;
      v.fill(1);
      for (int k = c.first; k < c.last; ++k) v[kZigzagToNatural[k]] = step;
      const double acc = evaluate(ds, QTable(v), proxy, options).point.accuracy;
      EXPECT_LE(acc, previous) << "band [" << c.first << "," << c.last << ") step " << step;
      previous = acc;
    }
    EXPECT_EQ(previous, 0.0);
  }
}

TEST(EvaluatorSpec, ParseAndPrint) {
  EXPECT_EQ(EvaluatorSpec::parse("proxy").kind, EvaluatorKind::kProxyClassifier);
  const EvaluatorSpec psnr = EvaluatorSpec::parse("psnr:threshold_db=32");
  EXPECT_EQ(psnr.kind, EvaluatorKind::kPsnrThreshold);
  EXPECT_EQ(psnr.config.at("threshold_db"), "32");
  const EvaluatorSpec tcp = EvaluatorSpec::parse("external:host=127.0.0.1,port=9000");
  EXPECT_EQ(tcp.config.at("port"), "9000");
  EXPECT_EQ(EvaluatorSpec::parse(tcp.to_string()).config, tcp.config);
  EXPECT_THROW(EvaluatorSpec::parse("resnet"), InvalidArgument);
  EXPECT_THROW(make_evaluator(EvaluatorSpec::parse("psnr"), 10), InvalidArgument);
  EXPECT_THROW(make_evaluator(EvaluatorSpec::parse("external"), 10), InvalidArgument);
  EXPECT_NE(make_evaluator(EvaluatorSpec::parse("proxy:classes=5"), 10)->id(),
            make_evaluator(EvaluatorSpec::parse("proxy"), 10)->id());
}

TEST(PsnrThreshold, CountsImagesAboveThreshold) {
  const Dataset ds = textured_dataset(4);
  PsnrThresholdEvaluator low(10.0), high(200.0);
  EXPECT_EQ(evaluate(ds, standard_tables(75), low).point.accuracy, 1.0);
  EXPECT_EQ(evaluate(ds, standard_tables(75), high).point.accuracy, 0.0);
}

std::string stub(const std::string& args) { return std::string(QTAB_STUB_CLASSIFIER) + " " + args; }

TEST(External, ProxyStubMatchesInProcessProxy) {
  SyntheticCorpusSpec spec;
  spec.images_per_class = 2;
  const Dataset ds = synthesize_dataset(spec);
  ProxyEvaluator local;
  ExternalOptions opts;
  opts.connections = 2;
  ExternalEvaluator remote({stub("--proxy --classes 20"), "", 0}, opts);
  EXPECT_EQ(remote.class_count(), 20);
  for (int q : {15, 60}) {
    const EvalOutcome a = evaluate(ds, standard_tables(q), local);
    const EvalOutcome b = evaluate(ds, standard_tables(q), remote);
    EXPECT_EQ(a.correct, b.correct) << q;
  }
}

TEST(External, ConstantStubScoresClassShare) {
  std::vector<LabeledImage> items;
  for (int i = 0; i < 30; ++i) items.push_back({textured_image(16, 16, i), i % 10, ""});
  const Dataset ds(std::move(items), 10);
  ExternalEvaluator remote({stub("--constant 0 --classes 10"), "", 0});
  EXPECT_DOUBLE_EQ(evaluate(ds, standard_tables(50), remote).point.accuracy, 0.1);
}

TEST(External, CrashReportsPartialProgress) {
  const Dataset ds = textured_dataset(10);
  ExternalOptions opts;
  opts.max_in_flight = 1;
  ExternalEvaluator remote({stub("--constant 0 --die-after 4"), "", 0}, opts);
  try {
    evaluate(ds, standard_tables(50), remote);
    FAIL() << "expected EvaluatorError";
  } catch (const EvaluatorError& e) {
    EXPECT_EQ(e.completed(), 4u);
    EXPECT_EQ(e.total(), 10u);
  }
}

TEST(External, HangTimesOut) {
  const Dataset ds = textured_dataset(6);
  ExternalOptions opts;
  opts.timeout = std::chrono::milliseconds(300);
  opts.max_in_flight = 1;
  ExternalEvaluator remote({stub("--constant 0 --hang-after 2"), "", 0}, opts);
  try {
    evaluate(ds, standard_tables(50), remote);
    FAIL() << "expected EvaluatorError";
  } catch (const EvaluatorError& e) {
    EXPECT_EQ(e.completed(), 2u);
  }
}

TEST(External, BadHandshakeIsRejected) {
  EXPECT_THROW(ExternalEvaluator({stub("--bad-hello"), "", 0}), EvaluatorError);
  EXPECT_THROW(ExternalEvaluator({"exit 0", "", 0}), EvaluatorError);
  EXPECT_THROW(ExternalEvaluator({"", "", 0}), InvalidArgument);
}

TEST(External, TcpEndpoint) {
  pid_t child = -1;
  int port = 0;
  for (int attempt = 0; attempt < 20 && child < 0; ++attempt) {
    port = 20000 + static_cast<int>((::getpid() * 7 + attempt * 131) % 20000);
    int fds[2];
    ASSERT_EQ(::pipe(fds), 0);
    const pid_t pid = ::fork();
    if (pid == 0) {
      ::dup2(fds[1], 1);
      ::close(fds[0]);
      const std::string p = std::to_string(port);
      ::execl(QTAB_STUB_CLASSIFIER, QTAB_STUB_CLASSIFIER, "--constant", "1", "--classes", "4", "--tcp",
              p.c_str(), static_cast<char*>(nullptr));
      ::_exit(127);
    }
    ::close(fds[1]);
    char buf[32] = {};
    const ssize_t n = ::read(fds[0], buf, sizeof buf - 1);
    ::close(fds[0]);
    if (n > 0 && std::string(buf).rfind("listening", 0) == 0) {
      child = pid;
    } else {
      ::waitpid(pid, nullptr, 0);
    }
  }
  ASSERT_GT(child, 0);
  {
    const Dataset ds = textured_dataset(8);
    ExternalOptions opts;
    opts.connections = 3;
    ExternalEvaluator remote({"", "127.0.0.1", port}, opts);
    EXPECT_EQ(remote.class_count(), 4);
    EXPECT_DOUBLE_EQ(evaluate(ds, standard_tables(50), remote).point.accuracy, 0.25);
  }
  ::kill(child, SIGTERM);
  ::waitpid(child, nullptr, 0);
}

class CacheTest : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = std::filesystem::temp_directory_path() / ("qtab_cache_test_" + std::to_string(::getpid()));
    std::filesystem::remove_all(dir_);
  }
  void TearDown() override { std::filesystem::remove_all(dir_); }
  std::filesystem::path dir_;
};

TEST_F(CacheTest, SecondEvaluationIsServedFromDisk) {
  const Dataset ds = textured_dataset(4);
  ProxyEvaluator proxy;
  EvalOptions options;
  {
    EvalCache cache(dir_);
    options.cache = &cache;
    const EvalOutcome first = evaluate(ds, standard_tables(40), proxy, options);
    EXPECT_FALSE(first.from_cache);
    EXPECT_EQ(cache.size(), 1u);
  }
  EvalCache reopened(dir_);
  EXPECT_EQ(reopened.size(), 1u);
  options.cache = &reopened;
  const EvalOutcome again = evaluate(ds, standard_tables(40), proxy, options);
  EXPECT_TRUE(again.from_cache);
  const EvalOutcome fresh = evaluate(ds, standard_tables(40), proxy);
  EXPECT_EQ(again.point.compression_rate, fresh.point.compression_rate);
  EXPECT_EQ(again.point.accuracy, fresh.point.accuracy);
  EXPECT_EQ(again.correct, fresh.correct);
  // A different encode configuration is a different key.
  options.encode.subsampling = Subsampling::k444;
  EXPECT_FALSE(evaluate(ds, standard_tables(40), proxy, options).from_cache);
}

TEST_F(CacheTest, ConcurrentWritersKeepEveryEntry) {
  EvalCache cache(dir_);
  std::vector<std::thread> workers;
  for (int w = 0; w < 4; ++w) {
    workers.emplace_back([&cache, w] {
      for (int i = 0; i < 50; ++i) {
        CachedEval v;
        v.compression_rate = 1.0 + i;
        v.accuracy = 0.5;
        v.correct = {1, 0};
        // Keys overlap across workers; values for a key are identical.
        cache.store("k" + std::to_string((i + w * 25) % 100), v);
        (void)cache.lookup("k" + std::to_string(i));
      }
    });
  }
  for (auto& t : workers) t.join();
  EXPECT_EQ(cache.size(), 100u);
  EvalCache reopened(dir_);
  EXPECT_EQ(reopened.size(), 100u);
  const auto v = reopened.lookup("k7");
  ASSERT_TRUE(v);
  EXPECT_EQ(v->correct, (std::vector<std::uint8_t>{1, 0}));
}

}  // namespace
}  // namespace qtab
