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

#include "qtab/stats.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numeric>
#include <random>

#include "qtab/error.h"

namespace qtab {
namespace {

// Continued fraction for I_x(a, b), Numerical Recipes' betacf with Lentz's
// method.
double beta_continued_fraction(double a, double b, double x) {
  constexpr int kMaxIterations = 10000;
  constexpr double kEps = 1e-16;
  constexpr double kTiny = 1e-300;
  const double qab = a + b, qap = a + 1.0, qam = a - 1.0;
  double c = 1.0;
  double d = 1.0 - qab * x / qap;
  if (std::abs(d) < kTiny) d = kTiny;
  d = 1.0 / d;
  double h = d;
  for (int m = 1; m <= kMaxIterations; ++m) {
    const int m2 = 2 * m;
    double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
    d = 1.0 + aa * d;
    if (std::abs(d) < kTiny) d = kTiny;
    c = 1.0 + aa / c;
    if (std::abs(c) < kTiny) c = kTiny;
    d = 1.0 / d;
    h *= d * c;
    aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
    d = 1.0 + aa * d;
    if (std::abs(d) < kTiny) d = kTiny;
    c = 1.0 + aa / c;
    if (std::abs(c) < kTiny) c = kTiny;
    d = 1.0 / d;
    const double del = d * c;
    h *= del;
    if (std::abs(del - 1.0) < kEps) return h;
  }
  throw NumericalError("incomplete beta continued fraction did not converge");
}

double mean_of(std::span<const double> v) {
  double s = 0.0;
  for (double x : v) s += x;
  return s / static_cast<double>(v.size());
}

double sum_sq_dev(std::span<const double> v, double mean) {
  double s = 0.0;
  for (double x : v) s += (x - mean) * (x - mean);
  return s;
}

}  // namespace

namespace {

// I_x(a, b) with y = 1 - x supplied by the caller, who can often form it
// without cancellation.
double incomplete_beta(double a, double b, double x, double y) {
  if (x == 0.0 || y == 0.0) return x == 0.0 ? 0.0 : 1.0;
  const double log_front =
      std::lgamma(a + b) - std::lgamma(a) - std::lgamma(b) + a * std::log(x) + b * std::log(y);
  const double front = std::exp(log_front);
  if (x < (a + 1.0) / (a + b + 2.0)) return front * beta_continued_fraction(a, b, x) / a;
  return 1.0 - front * beta_continued_fraction(b, a, y) / b;
}

}  // namespace

double regularized_incomplete_beta(double a, double b, double x) {
  if (!(a > 0.0) || !(b > 0.0)) throw InvalidArgument("incomplete beta needs a, b > 0");
  if (!(x >= 0.0 && x <= 1.0)) throw InvalidArgument("incomplete beta needs x in [0, 1]");
  return incomplete_beta(a, b, x, 1.0 - x);
}

double student_t_cdf(double t, double df) {
  if (!(df > 0.0)) throw InvalidArgument("t distribution needs df > 0");
  if (std::isnan(t)) return t;
  if (std::isinf(t)) return t > 0 ? 1.0 : 0.0;
  const double denom = df + t * t;
  const double tail = 0.5 * incomplete_beta(0.5 * df, 0.5, df / denom, t * t / denom);
  return t > 0 ? 1.0 - tail : tail;
}

TTestResult two_sample_t(std::span<const double> a, std::span<const double> b, bool welch) {
  if (a.size() < 2 || b.size() < 2) throw InvalidArgument("t test needs at least two values per sample");
  const double na = static_cast<double>(a.size()), nb = static_cast<double>(b.size());
  const double ma = mean_of(a), mb = mean_of(b);
  const double ssa = sum_sq_dev(a, ma), ssb = sum_sq_dev(b, mb);
  if (ssa == 0.0 && ssb == 0.0) throw NumericalError("t test is degenerate: both samples have zero variance");

  TTestResult r;
  r.mean_diff = ma - mb;
  double se;
  if (welch) {
    const double va = ssa / (na - 1.0) / na, vb = ssb / (nb - 1.0) / nb;
    se = std::sqrt(va + vb);
    r.df = (va + vb) * (va + vb) / (va * va / (na - 1.0) + vb * vb / (nb - 1.0));
  } else {
    r.df = na + nb - 2.0;
    const double pooled = (ssa + ssb) / r.df;
    se = std::sqrt(pooled * (1.0 / na + 1.0 / nb));
  }
  r.t_statistic = r.mean_diff / se;
  const double t2 = r.t_statistic * r.t_statistic;
  r.p_value = std::min(1.0, incomplete_beta(0.5 * r.df, 0.5, r.df / (r.df + t2), t2 / (r.df + t2)));
  return r;
}

void ResamplePlan::validate() const {
  if (n_resamples < 1 || classes_per_sample < 1 || images_per_class < 1) {
    throw InvalidArgument("resample plan entries must be positive");
  }
}

std::vector<std::vector<std::size_t>> resample_indices(const Dataset& dataset, const ResamplePlan& plan) {
  plan.validate();
  std::map<int, std::vector<std::size_t>> by_class;
  for (std::size_t i = 0; i < dataset.size(); ++i) by_class[dataset[i].label].push_back(i);
  std::vector<const std::vector<std::size_t>*> eligible;
  for (const auto& [label, items] : by_class) {
    if (static_cast<int>(items.size()) >= plan.images_per_class) eligible.push_back(&items);
  }
  if (static_cast<int>(eligible.size()) < plan.classes_per_sample) {
    throw DatasetError("resampling needs " + std::to_string(plan.classes_per_sample) +
                       " classes with at least " + std::to_string(plan.images_per_class) +
                       " images; dataset has " + std::to_string(eligible.size()));
  }
  std::mt19937_64 rng(plan.seed);
  std::vector<std::vector<std::size_t>> out(plan.n_resamples);
  std::vector<std::size_t> class_order(eligible.size());
  for (auto& sample : out) {
    std::iota(class_order.begin(), class_order.end(), 0);
    for (int c = 0; c < plan.classes_per_sample; ++c) {
      std::swap(class_order[c],
                class_order[std::uniform_int_distribution<std::size_t>(c, class_order.size() - 1)(rng)]);
      std::vector<std::size_t> items = *eligible[class_order[c]];
      for (int k = 0; k < plan.images_per_class; ++k) {
        std::swap(items[k], items[std::uniform_int_distribution<std::size_t>(k, items.size() - 1)(rng)]);
        sample.push_back(items[k]);
      }
    }
    std::sort(sample.begin(), sample.end());
  }
  return out;
}

std::vector<double> resample_accuracies(std::span<const std::uint8_t> correct,
                                        const std::vector<std::vector<std::size_t>>& resamples) {
  std::vector<double> acc;
  acc.reserve(resamples.size());
  for (const auto& sample : resamples) {
    std::size_t hits = 0;
    for (std::size_t i : sample) {
      if (i >= correct.size()) throw InvalidArgument("resample index out of range");
      hits += correct[i] != 0;
    }
    acc.push_back(static_cast<double>(hits) / static_cast<double>(sample.size()));
  }
  return acc;
}

std::vector<double> resample_accuracies(const Dataset& dataset, const TableSet& tables,
                                        const ResamplePlan& plan, Evaluator& evaluator,
                                        const EvalOptions& options) {
  const auto resamples = resample_indices(dataset, plan);
  const EvalOutcome outcome = evaluate(dataset, tables, evaluator, options);
  return resample_accuracies(outcome.correct, resamples);
}

EfficiencyReport profile_strategy(std::span<const Trial> trials, const FitnessCurve& fitness, int k,
                                  int window) {
  if (k < 1 || window < 1) throw InvalidArgument("profile needs k >= 1 and window >= 1");
  EfficiencyReport r;
  r.k = k;
  const std::size_t n = std::min<std::size_t>(trials.size(), static_cast<std::size_t>(window));
  double sum = 0.0;
  for (std::size_t i = 0; i < n; ++i) sum += trials[i].decision_seconds;
  r.mean_decision_seconds = n ? sum / static_cast<double>(n) : 0.0;
  int good = 0;
  for (std::size_t i = 0; i < trials.size(); ++i) {
    if (good_point(trials[i].point, fitness) && ++good == k) {
      r.trials_to_k_good = static_cast<int>(i) + 1;
      break;
    }
  }
  return r;
}

}  // namespace qtab
