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

#include "qtab/eval.h"

#include <cmath>

#include "qtab/error.h"
#include "qtab/parallel.h"

namespace qtab {

std::string to_string(ChromaPolicy p) {
  return p == ChromaPolicy::kSameTable ? "same" : "standard";
}

ChromaPolicy parse_chroma_policy(std::string_view s) {
  if (s == "same") return ChromaPolicy::kSameTable;
  if (s == "standard") return ChromaPolicy::kStandard;
  throw InvalidArgument("unknown chroma policy: " + std::string(s));
}

std::string EncodeConfig::id() const {
  return "subsampling=" + to_string(subsampling) + ",chroma=" + to_string(chroma);
}

TableSet tables_for(const QTable& table, const EncodeConfig& config) {
  return {table, config.chroma == ChromaPolicy::kSameTable ? table : standard_table(Channel::kChroma)};
}

TableSet standard_tables(int quality) {
  const QualityFactor q(quality);
  return {scale_by_quality(standard_table(Channel::kLuma), q),
          scale_by_quality(standard_table(Channel::kChroma), q)};
}

double compression_rate(const Dataset& dataset, const TableSet& tables, const EncodeConfig& config,
                        int threads) {
  if (dataset.size() == 0) throw DatasetError("dataset is empty");
  std::vector<std::size_t> sizes(dataset.size());
  parallel_for(dataset.size(), threads, [&](std::size_t i) {
    sizes[i] = encode(dataset[i].image, tables.luma, tables.chroma, config.subsampling).size_bytes();
  });
  std::uint64_t encoded = 0;
  for (std::size_t s : sizes) encoded += s;
  return static_cast<double>(dataset.raw_bytes()) / static_cast<double>(encoded);
}

double compression_rate(const Dataset& dataset, const QTable& table, const EncodeConfig& config,
                        int threads) {
  return compression_rate(dataset, tables_for(table, config), config, threads);
}

EvalOutcome evaluate(const Dataset& dataset, const TableSet& tables, Evaluator& evaluator,
                     const EvalOptions& options) {
  if (dataset.size() == 0) throw DatasetError("dataset is empty");
  std::string cache_key;
  if (options.cache) {
    cache_key = EvalCache::key(dataset, evaluator, options.encode, tables, options.compute_psnr);
    if (auto hit = options.cache->lookup(cache_key); hit && hit->correct.size() == dataset.size()) {
      EvalOutcome out;
      out.point.qtable = tables.luma;
      out.point.compression_rate = hit->compression_rate;
      out.point.accuracy = hit->accuracy;
      out.point.mean_psnr = hit->mean_psnr;
      out.correct = std::move(hit->correct);
      out.from_cache = true;
      return out;
    }
  }

  const std::size_t n = dataset.size();
  const std::size_t chunk = std::max<std::size_t>(options.chunk, 1);
  std::vector<std::uint64_t> encoded_bytes(n);
  std::vector<double> psnrs(options.compute_psnr ? n : 0);
  EvalOutcome out;
  out.correct.reserve(n);
  std::vector<std::size_t> indices;
  std::vector<RawImage> decoded;
  for (std::size_t begin = 0; begin < n; begin += chunk) {
    const std::size_t end = std::min(n, begin + chunk);
    indices.resize(end - begin);
    decoded.assign(end - begin, RawImage());
    parallel_for(end - begin, options.threads, [&](std::size_t k) {
      const std::size_t i = begin + k;
      indices[k] = i;
      const JpegStream s =
          encode(dataset[i].image, tables.luma, tables.chroma, options.encode.subsampling);
      encoded_bytes[i] = s.size_bytes();
      decoded[k] = decode(s.bytes);
      if (options.compute_psnr) psnrs[i] = psnr(dataset[i].image, decoded[k]);
    });
    std::vector<std::uint8_t> judged;
    try {
      judged = evaluator.judge(dataset, indices, decoded, options.threads);
    } catch (const EvaluatorError& e) {
      throw EvaluatorError(e.what(), begin + e.completed(), n);
    }
    if (judged.size() != indices.size()) throw Error("evaluator returned the wrong number of verdicts");
    out.correct.insert(out.correct.end(), judged.begin(), judged.end());
  }

  std::uint64_t total_encoded = 0;
  for (auto b : encoded_bytes) total_encoded += b;
  std::size_t hits = 0;
  for (auto c : out.correct) hits += c != 0;
  out.point.qtable = tables.luma;
  out.point.compression_rate = static_cast<double>(dataset.raw_bytes()) / static_cast<double>(total_encoded);
  out.point.accuracy = static_cast<double>(hits) / static_cast<double>(n);
  if (options.compute_psnr) {
    // Infinite PSNR (lossless) counts as 100 dB.
    double sum = 0.0;
    for (double p : psnrs) sum += std::isfinite(p) ? p : 100.0;
    out.point.mean_psnr = sum / static_cast<double>(n);
  }
  if (options.cache) {
    options.cache->store(cache_key, {out.point.compression_rate, out.point.accuracy,
                                     out.point.mean_psnr, out.correct});
  }
  return out;
}

EvalOutcome evaluate(const Dataset& dataset, const QTable& table, Evaluator& evaluator,
                     const EvalOptions& options) {
  return evaluate(dataset, tables_for(table, options.encode), evaluator, options);
}

std::vector<int> standard_sweep_qualities() {
  std::vector<int> q;
  for (int v = 10; v <= 100; v += 5) q.push_back(v);
  return q;
}

std::vector<EvalPoint> standard_sweep(const Dataset& dataset, Evaluator& evaluator,
                                      const EvalOptions& options) {
  std::vector<EvalPoint> points;
  for (int q : standard_sweep_qualities()) {
    EvalPoint p = evaluate(dataset, standard_tables(q), evaluator, options).point;
    p.strategy = Strategy::kStandard;
    p.trial_index = q;
    points.push_back(std::move(p));
  }
  return points;
}

}  // namespace qtab
