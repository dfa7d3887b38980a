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

#ifndef QTAB_PARETO_H_
#define QTAB_PARETO_H_

#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "qtab/qtable.h"

namespace qtab {

enum class Strategy {
  kStandard,
  kSortedRandom,
  kUniformRandom,
  kBoundedRandom,
  kBayesOpt,
  kComposite,
};

std::string to_string(Strategy s);
Strategy parse_strategy(std::string_view s);

struct EvalPoint {
  QTable qtable;
  double compression_rate = 0.0;
  double accuracy = 0.0;
  std::optional<double> mean_psnr;
  int trial_index = 0;
  Strategy strategy = Strategy::kStandard;
};

// True when a is at least as good as b in both objectives and strictly better
// in one.
inline bool dominates(const EvalPoint& a, const EvalPoint& b) {
  return a.compression_rate >= b.compression_rate && a.accuracy >= b.accuracy &&
         (a.compression_rate > b.compression_rate || a.accuracy > b.accuracy);
}

enum class InsertVerdict {
  kAdded,       // non-dominated; possibly removed dominated points
  kDominated,   // rejected
  kDuplicate,   // same objectives as an existing member; rejected
};

// Mutually non-dominated points, kept sorted by ascending compression rate
// (and therefore descending accuracy).
class ParetoFrontier {
 public:
  InsertVerdict insert(const EvalPoint& p);
  const std::vector<EvalPoint>& points() const& { return points_; }
  std::vector<EvalPoint> points() && { return std::move(points_); }
  std::size_t size() const { return points_.size(); }
  bool empty() const { return points_.empty(); }
  // True if some member dominates p.
  bool dominates(const EvalPoint& p) const;

 private:
  std::vector<EvalPoint> points_;
};

ParetoFrontier build_frontier(std::span<const EvalPoint> points);

// Member with the smallest compression rate strictly above `rate`.
std::optional<EvalPoint> closest_larger_rate(std::span<const EvalPoint> points, double rate);

// Bounds from the frontier members whose compression rate lies in
// [cr_low, cr_high]. Throws InvalidArgument when no member qualifies.
Bounds compute_bounds(const ParetoFrontier& frontier, double cr_low, double cr_high);

// acc ~ a * cr^2 + b * cr + c
struct FitnessCurve {
  double a = 0.0;
  double b = 0.0;
  double c = 0.0;
  double operator()(double cr) const { return (a * cr + b) * cr + c; }
};

// Least-squares parabola through (rate, accuracy). Throws InvalidArgument on
// fewer than three points and NumericalError on a rank-deficient design.
FitnessCurve fit_fitness(std::span<const EvalPoint> points);
FitnessCurve fit_fitness(const ParetoFrontier& frontier);

inline constexpr double kGoodPointMargin = -0.001;

inline double fitness_residual(const EvalPoint& p, const FitnessCurve& f) {
  return p.accuracy - f(p.compression_rate);
}
inline bool good_point(const EvalPoint& p, const FitnessCurve& f) {
  return fitness_residual(p, f) > kGoodPointMargin;
}

}  // namespace qtab

#endif  // QTAB_PARETO_H_
