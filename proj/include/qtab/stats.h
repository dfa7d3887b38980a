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

#ifndef QTAB_STATS_H_
#define QTAB_STATS_H_

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "qtab/data.h"
#include "qtab/eval.h"
#include "qtab/pareto.h"
#include "qtab/search.h"

namespace qtab {

// Regularized incomplete beta I_x(a, b), continued fraction (modified Lentz)
// to about 1e-14 relative accuracy.
double regularized_incomplete_beta(double a, double b, double x);

// CDF of Student's t distribution with `df` degrees of freedom.
double student_t_cdf(double t, double df);

struct TTestResult {
  double mean_diff = 0.0;  // mean(a) - mean(b)
  double t_statistic = 0.0;
  double p_value = 1.0;    // two-sided
  double df = 0.0;
};

// Pooled-variance Student t test, or Welch's test when `welch` is set.
// Needs two samples of size >= 2; throws NumericalError when both samples
// have zero variance.
TTestResult two_sample_t(std::span<const double> a, std::span<const double> b, bool welch = false);

struct ResamplePlan {
  int n_resamples = 100;
  int classes_per_sample = 700;
  int images_per_class = 4;
  std::uint64_t seed = 0;

  void validate() const;
};

// Item indices for each resample: classes drawn without replacement, then
// images drawn without replacement within each class. Only classes with at
// least images_per_class images are eligible; throws DatasetError when fewer
// than classes_per_sample classes qualify.
std::vector<std::vector<std::size_t>> resample_indices(const Dataset& dataset, const ResamplePlan& plan);

// Accuracy of each resample given per-item correctness of one evaluation.
std::vector<double> resample_accuracies(std::span<const std::uint8_t> correct,
                                        const std::vector<std::vector<std::size_t>>& resamples);

// Evaluates `table` once over the whole dataset and scores every resample.
std::vector<double> resample_accuracies(const Dataset& dataset, const TableSet& tables,
                                        const ResamplePlan& plan, Evaluator& evaluator,
                                        const EvalOptions& options = {});

struct EfficiencyReport {
  double mean_decision_seconds = 0.0;   // over the first `window` trials
  std::optional<int> trials_to_k_good;  // 1-based trial count; empty when not reached
  int k = 10;
};

EfficiencyReport profile_strategy(std::span<const Trial> trials, const FitnessCurve& fitness,
                                  int k = 10, int window = 100);

}  // namespace qtab

#endif  // QTAB_STATS_H_
