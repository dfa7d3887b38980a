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

#ifndef QTAB_EVAL_H_
#define QTAB_EVAL_H_

#include <cstdint>
#include <filesystem>
#include <mutex>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include "qtab/data.h"
#include "qtab/evaluator.h"
#include "qtab/jpeg.h"
#include "qtab/pareto.h"
#include "qtab/qtable.h"

namespace qtab {

// How a single tuned table maps onto the two JPEG channels.
enum class ChromaPolicy {
  kSameTable,  // the tuned table quantizes luma and chroma
  kStandard,   // chroma keeps the Annex K chroma table
};

std::string to_string(ChromaPolicy p);
ChromaPolicy parse_chroma_policy(std::string_view s);

struct EncodeConfig {
  Subsampling subsampling = Subsampling::k420;
  ChromaPolicy chroma = ChromaPolicy::kSameTable;
  std::string id() const;
};

struct TableSet {
  QTable luma;
  QTable chroma;
};

TableSet tables_for(const QTable& table, const EncodeConfig& config);
// Annex K luma and chroma tables, both scaled to `quality`.
TableSet standard_tables(int quality);

// Sum of raw bitmap bytes over sum of encoded bytes. Throws on an empty set.
double compression_rate(const Dataset& dataset, const TableSet& tables,
                        const EncodeConfig& config = {}, int threads = 0);
double compression_rate(const Dataset& dataset, const QTable& table,
                        const EncodeConfig& config = {}, int threads = 0);

class EvalCache;

struct EvalOptions {
  EncodeConfig encode;
  bool compute_psnr = false;
  int threads = 0;
  EvalCache* cache = nullptr;
  // Images held in decoded form at once.
  std::size_t chunk = 256;
};

struct EvalOutcome {
  EvalPoint point;
  std::vector<std::uint8_t> correct;  // per dataset item
  bool from_cache = false;
};

// Encodes and decodes every image, then asks the evaluator to score the
// reconstructions. `point.trial_index` and `point.strategy` are left at their
// defaults for the caller to fill in.
EvalOutcome evaluate(const Dataset& dataset, const TableSet& tables, Evaluator& evaluator,
                     const EvalOptions& options = {});
EvalOutcome evaluate(const Dataset& dataset, const QTable& table, Evaluator& evaluator,
                     const EvalOptions& options = {});

// Quality factors 10, 15, ..., 100.
std::vector<int> standard_sweep_qualities();

// Standard tables at every sweep quality. Points carry the scaled luma table,
// strategy kStandard and the quality factor as trial index.
std::vector<EvalPoint> standard_sweep(const Dataset& dataset, Evaluator& evaluator,
                                      const EvalOptions& options = {});

struct CachedEval {
  double compression_rate = 0.0;
  double accuracy = 0.0;
  std::optional<double> mean_psnr;
  std::vector<std::uint8_t> correct;
};

// Append-only JSON-lines store keyed by (dataset, evaluator, encode config,
// tables). Safe for concurrent use by threads; appends take an exclusive
// file lock so several processes can share a directory.
class EvalCache {
 public:
  explicit EvalCache(const std::filesystem::path& directory);

  static std::string key(const Dataset& dataset, const Evaluator& evaluator,
                         const EncodeConfig& config, const TableSet& tables, bool psnr);

  std::optional<CachedEval> lookup(const std::string& key) const;
  void store(const std::string& key, const CachedEval& value);
  std::size_t size() const;
  const std::filesystem::path& file() const { return file_; }

 private:
  std::filesystem::path file_;
  mutable std::mutex mu_;
  std::unordered_map<std::string, CachedEval> entries_;
};

}  // namespace qtab

#endif  // QTAB_EVAL_H_
