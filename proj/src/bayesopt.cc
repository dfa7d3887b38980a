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

#include "qtab/bayesopt.h"

#include <algorithm>
#include <limits>

#include "qtab/error.h"

namespace qtab {

void BoConfig::validate() const {
  if (n_init < 1) throw InvalidArgument("n_init must be positive");
  if (n_rounds < 0) throw InvalidArgument("n_rounds must be non-negative");
  if (n_indices < 1) throw InvalidArgument("n_indices must be positive");
  if (grid_levels < 1) throw InvalidArgument("grid_levels must be positive");
  if (refit_every < 1) throw InvalidArgument("refit_every must be positive");
  if (batch_rows < 1) throw InvalidArgument("batch_rows must be positive");
  if (!(gp.noise > 0.0)) throw InvalidArgument("GP noise must be positive");
}

SurrogateModel::SurrogateModel(const Bounds& bounds, GpConfig gp, int refit_every)
    : bounds_(bounds), gp_(std::move(gp)), refit_every_(refit_every) {
  bounds_.validate();
  for (int i = 0; i < kBlockSize; ++i) {
    lo_[i] = bounds_.lower_int(i);
    const int span = bounds_.upper_int(i) - lo_[i];
    inv_span_[i] = span > 0 ? 1.0 / span : 0.0;
  }
}

void SurrogateModel::scale_into(const std::array<int, kBlockSize>& values, double* out) const {
  for (int i = 0; i < kBlockSize; ++i) out[i] = (values[i] - lo_[i]) * inv_span_[i];
}

void SurrogateModel::add(const QTable& table, double y) {
  tables_.push_back(table);
  ys_.push_back(y);
  best_y_ = ys_.size() == 1 ? y : std::max(best_y_, y);
  const Eigen::Index n = static_cast<Eigen::Index>(tables_.size());
  Eigen::MatrixXd x(n, kBlockSize);
  Eigen::VectorXd yv(n);
  for (Eigen::Index r = 0; r < n; ++r) {
    const auto v = tables_[r].values();
    for (int i = 0; i < kBlockSize; ++i) x(r, i) = (v[i] - lo_[i]) * inv_span_[i];
    yv(r) = ys_[r];
  }
  gp_.fit(x, yv);
  if (n % refit_every_ == 0) gp_.refit_lengthscale();
}

namespace {

// Scores candidate rows in batches and keeps the arg-max (first on ties).
class EiScorer {
 public:
  EiScorer(const SurrogateModel& model, int batch_rows)
      : model_(model), rows_(batch_rows), x_(batch_rows, kBlockSize) {
    pending_.reserve(batch_rows);
  }

  void add(const std::array<int, kBlockSize>& values) {
    model_.scale_into(values, row_buffer_.data());
    for (int i = 0; i < kBlockSize; ++i) x_(static_cast<Eigen::Index>(pending_.size()), i) = row_buffer_[i];
    pending_.push_back(values);
    if (static_cast<int>(pending_.size()) == rows_) flush();
  }

  void flush() {
    if (pending_.empty()) return;
    const Eigen::Index m = static_cast<Eigen::Index>(pending_.size());
    Eigen::VectorXd mean, var;
    model_.gp().predict(x_.topRows(m), mean, var);
    for (Eigen::Index r = 0; r < m; ++r) {
      const double ei = expected_improvement(mean(r), var(r), model_.best_y());
      if (!has_best_ || ei > best_ei_) {
        best_ei_ = ei;
        best_ = pending_[r];
        has_best_ = true;
      }
    }
    pending_.clear();
  }

  const std::array<int, kBlockSize>& best() const { return best_; }

 private:
  const SurrogateModel& model_;
  int rows_;
  Eigen::MatrixXd x_;
  std::array<double, kBlockSize> row_buffer_{};
  std::vector<std::array<int, kBlockSize>> pending_;
  std::array<int, kBlockSize> best_{};
  double best_ei_ = -std::numeric_limits<double>::infinity();
  bool has_best_ = false;
};

}  // namespace

QTable bo_propose(const SurrogateModel& model, const FrequencyBands& bands, const BoConfig& config,
                  std::mt19937_64& rng) {
  config.validate();
  if (model.size() == 0) throw InvalidArgument("bo_propose needs at least one observation");
  const Bounds& bounds = model.bounds();
  std::array<int, kBlockSize> lo, hi;
  for (int i = 0; i < kBlockSize; ++i) {
    lo[i] = bounds.lower_int(i);
    hi[i] = bounds.upper_int(i);
  }

  EiScorer scorer(model, config.batch_rows);
  std::array<int, kBlockSize> cand;
  for (int c = 0; c < config.n_init; ++c) {
    for (int i = 0; i < kBlockSize; ++i) cand[i] = std::uniform_int_distribution<int>(lo[i], hi[i])(rng);
    scorer.add(cand);
  }
  scorer.flush();

  if (config.use_local_grid) {
    std::vector<int> area = bands.area_of_interest();
    const int k = std::min<int>(config.n_indices, static_cast<int>(area.size()));
    for (int round = 0; round < config.n_rounds; ++round) {
      // Partial Fisher-Yates: the first k entries become the chosen positions.
      for (int j = 0; j < k; ++j) {
        std::uniform_int_distribution<int> pick(j, static_cast<int>(area.size()) - 1);
        std::swap(area[j], area[pick(rng)]);
      }
      std::vector<std::vector<int>> levels(k);
      for (int j = 0; j < k; ++j) {
        const int a = lo[area[j]], b = hi[area[j]];
        for (int l = 0; l < config.grid_levels; ++l) {
          const int v = config.grid_levels == 1
                            ? (a + b) / 2
                            : a + static_cast<int>(std::lround((b - a) * static_cast<double>(l) /
                                                               (config.grid_levels - 1)));
          if (levels[j].empty() || levels[j].back() != v) levels[j].push_back(v);
        }
      }
      const std::array<int, kBlockSize> base = scorer.best();
      std::vector<std::size_t> digit(k, 0);
      while (true) {
        cand = base;
        for (int j = 0; j < k; ++j) cand[area[j]] = levels[j][digit[j]];
        scorer.add(cand);
        int j = 0;
        while (j < k && ++digit[j] == levels[j].size()) digit[j++] = 0;
        if (j == k) break;
      }
      scorer.flush();
    }
  }
  return QTable(scorer.best());
}

BayesOptProposer::BayesOptProposer(const Bounds& bounds, FrequencyBands bands, FitnessCurve fitness,
                                   BoConfig config, std::uint64_t seed)
    : bounds_(bounds),
      bands_(std::move(bands)),
      fitness_(fitness),
      config_(std::move(config)),
      model_(bounds, config_.gp, config_.refit_every),
      rng_(seed) {
  config_.validate();
}

QTable BayesOptProposer::propose() {
  if (model_.size() == 0) return sample_within(bounds_, rng_);
  return bo_propose(model_, bands_, config_, rng_);
}

void BayesOptProposer::observe(const QTable& table, const EvalPoint& point, bool) {
  model_.add(table, fitness_residual(point, fitness_));
}

}  // namespace qtab
