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

#ifndef QTAB_SEARCH_H_
#define QTAB_SEARCH_H_

#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "qtab/data.h"
#include "qtab/eval.h"
#include "qtab/pareto.h"
#include "qtab/qtable.h"

namespace qtab {

// Black box mapping a table to (compression rate, accuracy).
class Objective {
 public:
  virtual ~Objective() = default;
  virtual EvalPoint evaluate(const QTable& table) = 0;
  // Identifies what is being measured (dataset hash for image objectives).
  virtual std::string id() const = 0;
  // Whether evaluate() may be called from several threads at once.
  virtual bool thread_safe() const { return false; }
};

class DatasetObjective : public Objective {
 public:
  DatasetObjective(const Dataset& dataset, Evaluator& evaluator, EvalOptions options = {})
      : dataset_(dataset), evaluator_(evaluator), options_(options) {}
  EvalPoint evaluate(const QTable& table) override;
  std::string id() const override { return dataset_.hash(); }

 private:
  const Dataset& dataset_;
  Evaluator& evaluator_;
  EvalOptions options_;
};

// Ask/tell interface shared by every strategy.
class Proposer {
 public:
  virtual ~Proposer() = default;
  virtual Strategy strategy() const = 0;
  virtual QTable propose() = 0;
  virtual void observe(const QTable& table, const EvalPoint& point, bool improved_frontier) {
    (void)table;
    (void)point;
    (void)improved_frontier;
  }
  // Proposals are independent draws, so several may be outstanding.
  virtual bool supports_batch() const { return false; }
  // Free-form label of the component that made the last proposal.
  virtual std::string last_source() const { return {}; }
};

struct Trial {
  EvalPoint point;
  double decision_seconds = 0.0;  // wall clock spent in propose()
  std::optional<double> y;        // accuracy - fitness(rate), when a fitness is known
  std::string source;
  bool improved_frontier = false;
  bool good = false;
};

struct RunOptions {
  int n_trials = 100;
  std::optional<FitnessCurve> fitness;
  // Stop once this many good points were seen (0 = run the full budget).
  int stop_after_good = 0;
  // Proposals drawn at once; only for proposers that support batches.
  int batch = 1;
  int threads = 0;
};

struct RunResult {
  std::vector<Trial> trials;
  ParetoFrontier frontier;
  // 1-based trial index of the k-th good point, if reached.
  std::optional<int> trials_to_good;
};

using TrialSink = std::function<void(const Trial&)>;

// Runs the propose / evaluate / observe loop. Each finished trial is passed
// to `sink` before the next proposal, so a failing evaluator leaves a partial
// log behind; the failure then propagates.
RunResult run_search(Proposer& proposer, Objective& objective, const RunOptions& options,
                     const TrialSink& sink = {});

class SortedRandomProposer : public Proposer {
 public:
  explicit SortedRandomProposer(std::uint64_t seed, SortOrder order = SortOrder::kAscending,
                                std::optional<SampleRange> fixed_range = std::nullopt)
      : rng_(seed), order_(order), fixed_range_(fixed_range) {}
  Strategy strategy() const override { return Strategy::kSortedRandom; }
  QTable propose() override;
  bool supports_batch() const override { return true; }

 private:
  std::mt19937_64 rng_;
  SortOrder order_;
  std::optional<SampleRange> fixed_range_;
};

// 64 independent uniform entries in [1, 255]; no ordering constraint.
class UniformRandomProposer : public Proposer {
 public:
  explicit UniformRandomProposer(std::uint64_t seed) : rng_(seed) {}
  Strategy strategy() const override { return Strategy::kUniformRandom; }
  QTable propose() override;
  bool supports_batch() const override { return true; }

 private:
  std::mt19937_64 rng_;
};

class BoundedRandomProposer : public Proposer {
 public:
  BoundedRandomProposer(Bounds bounds, std::uint64_t seed);
  Strategy strategy() const override { return Strategy::kBoundedRandom; }
  QTable propose() override { return sample_within(bounds_, rng_); }
  bool supports_batch() const override { return true; }

 private:
  Bounds bounds_;
  std::mt19937_64 rng_;
};

}  // namespace qtab

#endif  // QTAB_SEARCH_H_
