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

#include "qtab/pareto.h"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>

#include "qtab/error.h"

namespace qtab {

std::string to_string(Strategy s) {
  switch (s) {
    case Strategy::kStandard: return "standard";
    case Strategy::kSortedRandom: return "sorted-random";
    case Strategy::kUniformRandom: return "uniform-random";
    case Strategy::kBoundedRandom: return "bounded-random";
    case Strategy::kBayesOpt: return "bayesopt";
    case Strategy::kComposite: return "composite";
  }
  return "unknown";
}

Strategy parse_strategy(std::string_view s) {
  for (Strategy v : {Strategy::kStandard, Strategy::kSortedRandom, Strategy::kUniformRandom,
                     Strategy::kBoundedRandom, Strategy::kBayesOpt, Strategy::kComposite}) {
    if (to_string(v) == s) return v;
  }
  throw InvalidArgument("unknown strategy: " + std::string(s));
}

bool ParetoFrontier::dominates(const EvalPoint& p) const {
  return std::any_of(points_.begin(), points_.end(),
                     [&](const EvalPoint& q) { return qtab::dominates(q, p); });
}

InsertVerdict ParetoFrontier::insert(const EvalPoint& p) {
  for (const auto& q : points_) {
    if (q.compression_rate == p.compression_rate && q.accuracy == p.accuracy) {
      return InsertVerdict::kDuplicate;
    }
    if (qtab::dominates(q, p)) return InsertVerdict::kDominated;
  }
  std::erase_if(points_, [&](const EvalPoint& q) { return qtab::dominates(p, q); });
  auto at = std::lower_bound(points_.begin(), points_.end(), p,
                             [](const EvalPoint& a, const EvalPoint& b) {
                               return a.compression_rate < b.compression_rate;
                             });
  points_.insert(at, p);
  return InsertVerdict::kAdded;
}

ParetoFrontier build_frontier(std::span<const EvalPoint> points) {
  ParetoFrontier f;
  for (const auto& p : points) f.insert(p);
  return f;
}

Bounds compute_bounds(const ParetoFrontier& frontier, double cr_low, double cr_high) {
  std::vector<QTable> window;
  for (const auto& p : frontier.points()) {
    if (p.compression_rate >= cr_low && p.compression_rate <= cr_high) window.push_back(p.qtable);
  }
  if (window.empty()) {
    throw InvalidArgument("no frontier point with compression rate in [" +
                          std::to_string(cr_low) + ", " + std::to_string(cr_high) + "]");
  }
  return bounds_from_tables(window);
}

FitnessCurve fit_fitness(std::span<const EvalPoint> points) {
  if (points.size() < 3) throw InvalidArgument("fitness fit needs at least three points");
  const Eigen::Index n = static_cast<Eigen::Index>(points.size());
  // Centre and scale the rates so the normal equations stay well conditioned.
  double mean = 0.0;
  for (const auto& p : points) mean += p.compression_rate;
  mean /= static_cast<double>(n);
  double scale = 0.0;
  for (const auto& p : points) scale = std::max(scale, std::abs(p.compression_rate - mean));
  if (scale == 0.0) throw NumericalError("fitness fit is rank deficient: all rates equal");

  Eigen::MatrixXd x(n, 3);
  Eigen::VectorXd y(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const double t = (points[i].compression_rate - mean) / scale;
    x(i, 0) = t * t;
    x(i, 1) = t;
    x(i, 2) = 1.0;
    y(i) = points[i].accuracy;
  }
  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(x);
  qr.setThreshold(1e-10);
  if (qr.rank() < 3) throw NumericalError("fitness fit is rank deficient: fewer than three distinct rates");
  const Eigen::Vector3d beta = qr.solve(y);
  // Undo the substitution t = (cr - mean) / scale.
  const double s2 = scale * scale;
  FitnessCurve f;
  f.a = beta(0) / s2;
  f.b = beta(1) / scale - 2.0 * beta(0) * mean / s2;
  f.c = beta(0) * mean * mean / s2 - beta(1) * mean / scale + beta(2);
  if (!std::isfinite(f.a) || !std::isfinite(f.b) || !std::isfinite(f.c)) {
    throw NumericalError("fitness fit produced non-finite coefficients");
  }
  return f;
}

FitnessCurve fit_fitness(const ParetoFrontier& frontier) { return fit_fitness(frontier.points()); }

std::optional<EvalPoint> closest_larger_rate(std::span<const EvalPoint> points, double rate) {
  std::optional<EvalPoint> best;
  for (const EvalPoint& p : points) {
    if (p.compression_rate > rate && (!best || p.compression_rate < best->compression_rate)) best = p;
  }
  return best;
}

}  // namespace qtab
