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

#include "qtab/search.h"

#include <chrono>

#include "qtab/error.h"
#include "qtab/parallel.h"

namespace qtab {

EvalPoint DatasetObjective::evaluate(const QTable& table) {
  return qtab::evaluate(dataset_, table, evaluator_, options_).point;
}

QTable SortedRandomProposer::propose() {
  const SampleRange range = fixed_range_ ? *fixed_range_ : random_sample_range(rng_);
  return sorted_random_sample(range, rng_, order_);
}

QTable UniformRandomProposer::propose() {
  std::uniform_int_distribution<int> draw(1, 255);
  std::array<int, kBlockSize> v;
  for (int& x : v) x = draw(rng_);
  return QTable(v);
}

BoundedRandomProposer::BoundedRandomProposer(Bounds bounds, std::uint64_t seed)
    : bounds_(bounds), rng_(seed) {
  bounds_.validate();
}

RunResult run_search(Proposer& proposer, Objective& objective, const RunOptions& options,
                     const TrialSink& sink) {
  if (options.n_trials < 1) throw InvalidArgument("n_trials must be at least 1");
  if (options.batch < 1) throw InvalidArgument("batch must be at least 1");
  if (options.batch > 1 && !proposer.supports_batch()) {
    throw InvalidArgument(to_string(proposer.strategy()) + " proposes one table at a time");
  }
  if (options.stop_after_good > 0 && !options.fitness) {
    throw InvalidArgument("stopping on good points needs a fitness curve");
  }
  using Clock = std::chrono::steady_clock;

  RunResult result;
  int good = 0;
  int index = 0;
  while (index < options.n_trials) {
    const int k = std::min(options.batch, options.n_trials - index);
    std::vector<QTable> tables;
    std::vector<std::string> sources;
    std::vector<double> seconds;
    for (int b = 0; b < k; ++b) {
      const auto t0 = Clock::now();
      tables.push_back(proposer.propose());
      seconds.push_back(std::chrono::duration<double>(Clock::now() - t0).count());
      sources.push_back(proposer.last_source());
    }
    std::vector<EvalPoint> points(k);
    if (k > 1 && objective.thread_safe()) {
      parallel_for(k, options.threads, [&](std::size_t b) { points[b] = objective.evaluate(tables[b]); });
    } else {
      for (int b = 0; b < k; ++b) points[b] = objective.evaluate(tables[b]);
    }
    for (int b = 0; b < k; ++b, ++index) {
      Trial t;
      t.point = points[b];
      t.point.qtable = tables[b];
      t.point.trial_index = index;
      t.point.strategy = proposer.strategy();
      t.decision_seconds = seconds[b];
      t.source = sources[b];
      t.improved_frontier = result.frontier.insert(t.point) == InsertVerdict::kAdded;
      if (options.fitness) {
        t.y = fitness_residual(t.point, *options.fitness);
        t.good = good_point(t.point, *options.fitness);
      }
      proposer.observe(tables[b], t.point, t.improved_frontier);
      if (sink) sink(t);
      result.trials.push_back(std::move(t));
      if (result.trials.back().good && ++good == options.stop_after_good) {
        result.trials_to_good = index + 1;
        return result;
      }
    }
  }
  return result;
}

}  // namespace qtab
