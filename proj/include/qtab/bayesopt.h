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

#ifndef QTAB_BAYESOPT_H_
#define QTAB_BAYESOPT_H_

#include <cstdint>
#include <random>
#include <vector>

#include "qtab/gaussian_process.h"
#include "qtab/pareto.h"
#include "qtab/qtable.h"
#include "qtab/search.h"

namespace qtab {

struct BoConfig {
  int n_init = 100000;       // uniform in-bounds candidates per proposal
  int n_rounds = 20;         // local grid refinement rounds
  int n_indices = 5;         // table positions varied per round
  bool use_local_grid = true;
  int grid_levels = 9;       // evenly spaced values per varied position
  int refit_every = 10;      // observations between length-scale refits
  GpConfig gp;
  int batch_rows = 4096;     // candidates scored per GEMM

  void validate() const;
};

// GP over tables scaled to [0, 1] per entry by the integer bounds box.
class SurrogateModel {
 public:
  SurrogateModel(const Bounds& bounds, GpConfig gp, int refit_every);

  void add(const QTable& table, double y);
  std::size_t size() const { return tables_.size(); }
  double best_y() const { return best_y_; }
  const GaussianProcess& gp() const { return gp_; }
  const Bounds& bounds() const { return bounds_; }

  // Row vector of scaled entries.
  void scale_into(const std::array<int, kBlockSize>& values, double* out) const;

 private:
  Bounds bounds_;
  std::array<int, kBlockSize> lo_{};
  std::array<double, kBlockSize> inv_span_{};
  GaussianProcess gp_;
  int refit_every_;
  std::vector<QTable> tables_;
  std::vector<double> ys_;
  double best_y_ = 0.0;
};

// Maximizes expected improvement over n_init uniform candidates and, when
// enabled, n_rounds of grid refinement on random positions of the area of
// interest. Requires at least one observation.
QTable bo_propose(const SurrogateModel& model, const FrequencyBands& bands,
                  const BoConfig& config, std::mt19937_64& rng);

// Target y = accuracy - fitness(rate). The first proposal is a uniform draw
// within the bounds.
class BayesOptProposer : public Proposer {
 public:
  BayesOptProposer(const Bounds& bounds, FrequencyBands bands, FitnessCurve fitness,
                   BoConfig config, std::uint64_t seed);
  Strategy strategy() const override { return Strategy::kBayesOpt; }
  QTable propose() override;
  void observe(const QTable& table, const EvalPoint& point, bool improved) override;
  const SurrogateModel& model() const { return model_; }

 private:
  Bounds bounds_;
  FrequencyBands bands_;
  FitnessCurve fitness_;
  BoConfig config_;
  SurrogateModel model_;
  std::mt19937_64 rng_;
};

}  // namespace qtab

#endif  // QTAB_BAYESOPT_H_
