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

#include <gtest/gtest.h>
#include <unistd.h>

#include <Eigen/Dense>
#include <filesystem>
#include <fstream>
#include <random>

#include "analytic_objective.h"
#include "oracles.h"
#include "qtab/bandit.h"
#include "qtab/bayesopt.h"
#include "qtab/error.h"
#include "qtab/gaussian_process.h"
#include "qtab/pareto.h"
#include "qtab/search.h"
#include "qtab/trial_log.h"
#include "test_images.h"

namespace qtab {
namespace {

EvalPoint pt(double rate, double acc, int index = 0) {
  EvalPoint p;
  p.compression_rate = rate;
  p.accuracy = acc;
  p.trial_index = index;
  return p;
}

// Constant (rate, accuracy) for every table.
class ConstantObjective : public Objective {
 public:
  EvalPoint evaluate(const QTable&) override { return pt(10.0, 0.6); }
  std::string id() const override { return "constant"; }
};

class FailingObjective : public Objective {
 public:
  explicit FailingObjective(int fail_at) : fail_at_(fail_at) {}
  EvalPoint evaluate(const QTable&) override {
    if (++calls_ == fail_at_) throw EvaluatorError("gone", 3, 10);
    return pt(calls_, 1.0 / calls_);
  }
  std::string id() const override { return "failing"; }

 private:
  int fail_at_;
  int calls_ = 0;
};

RunOptions options(int n_trials, int batch = 1, int stop_after_good = 0) {
  RunOptions o;
  o.n_trials = n_trials;
  o.batch = batch;
  o.stop_after_good = stop_after_good;
  return o;
}

Bounds box(int lo, int hi) {
  Bounds b;
  b.lower.fill(lo);
  b.upper.fill(hi);
  return b;
}

TEST(Frontier, InsertExamples) {
  ParetoFrontier f;
  EXPECT_EQ(f.insert(pt(22, 0.71)), InsertVerdict::kAdded);
  EXPECT_EQ(f.insert(pt(22, 0.70)), InsertVerdict::kDominated);
  EXPECT_EQ(f.insert(pt(22, 0.71)), InsertVerdict::kDuplicate);
  EXPECT_EQ(f.size(), 1u);
  EXPECT_EQ(f.insert(pt(23, 0.72)), InsertVerdict::kAdded);
  ASSERT_EQ(f.size(), 1u);
  EXPECT_EQ(f.points()[0].compression_rate, 23);
  EXPECT_EQ(f.insert(pt(30, 0.5)), InsertVerdict::kAdded);
  EXPECT_EQ(f.size(), 2u);
  EXPECT_TRUE(f.dominates(pt(25, 0.5)));
  EXPECT_FALSE(f.dominates(pt(31, 0.1)));
}

TEST(Frontier, RandomStreamsMatchBruteForce) {
  std::mt19937_64 rng(77);
  for (int stream = 0; stream < 100; ++stream) {
    // Coarse values so ties and duplicates occur.
    std::uniform_int_distribution<int> rate(1, 40), acc(0, 40);
    std::vector<EvalPoint> pts;
    ParetoFrontier f;
    for (int i = 0; i < 200; ++i) {
      pts.push_back(pt(rate(rng) * 0.5, acc(rng) / 40.0, i));
      f.insert(pts.back());
      const auto& m = f.points();
      for (std::size_t a = 0; a < m.size(); ++a) {
        for (std::size_t b = 0; b < m.size(); ++b) ASSERT_FALSE(a != b && dominates(m[a], m[b]));
        if (a) {
          ASSERT_LT(m[a - 1].compression_rate, m[a].compression_rate);
        }
      }
    }
    const auto want = testing::brute_force_frontier(pts);
    ASSERT_EQ(f.size(), want.size());
    for (std::size_t i = 0; i < want.size(); ++i) {
      EXPECT_EQ(f.points()[i].trial_index, want[i].trial_index);
      EXPECT_EQ(f.points()[i].compression_rate, want[i].compression_rate);
      EXPECT_EQ(f.points()[i].accuracy, want[i].accuracy);
    }
  }
}

TEST(Frontier, ClosestLargerRate) {
  const std::vector<EvalPoint> pts = {pt(2, 0.9), pt(5, 0.8), pt(9, 0.4)};
  EXPECT_EQ(closest_larger_rate(pts, 4.0)->compression_rate, 5);
  EXPECT_EQ(closest_larger_rate(pts, 5.0)->compression_rate, 9);
  EXPECT_FALSE(closest_larger_rate(pts, 9.0));
}

TEST(Fitness, RecoversExactParabola) {
  const FitnessCurve truth{-0.001, 0.02, 0.5};
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> rate(2.0, 40.0);
  for (int n : {3, 5, 50}) {
    std::vector<EvalPoint> pts;
    for (int i = 0; i < n; ++i) {
      const double r = rate(rng);
      pts.push_back(pt(r, truth(r)));
    }
    const FitnessCurve f = fit_fitness(pts);
    EXPECT_NEAR(f.a, truth.a, 1e-9) << n;
    EXPECT_NEAR(f.b, truth.b, 1e-9) << n;
    EXPECT_NEAR(f.c, truth.c, 1e-9) << n;
  }
}

TEST(Fitness, ThreePointsInterpolateAndErrors) {
  const std::vector<EvalPoint> three = {pt(4, 0.9), pt(10, 0.7), pt(25, 0.2)};
  const FitnessCurve f = fit_fitness(three);
  for (const auto& p : three) EXPECT_NEAR(f(p.compression_rate), p.accuracy, 1e-12);
  EXPECT_THROW(fit_fitness(std::vector<EvalPoint>{pt(4, 0.9), pt(10, 0.7)}), InvalidArgument);
  EXPECT_THROW(fit_fitness(std::vector<EvalPoint>{pt(4, 0.9), pt(4, 0.7), pt(10, 0.2), pt(10, 0.1)}),
               NumericalError);
  ParetoFrontier frontier;
  for (const auto& p : three) frontier.insert(p);
  EXPECT_NEAR(fit_fitness(frontier).a, f.a, 1e-12);
}

TEST(GoodPoint, ThresholdExamples) {
  const FitnessCurve f{-0.001, 0.02, 0.5};
  const double r = 12.0;
  EXPECT_TRUE(good_point(pt(r, f(r)), f));
  EXPECT_FALSE(good_point(pt(r, f(r) - 0.002), f));
  EXPECT_TRUE(good_point(pt(r, f(r) - 0.0005), f));
  // The parabola is used as-is outside any fitted range.
  EXPECT_TRUE(good_point(pt(500.0, f(500.0)), f));
}

TEST(RunSearch, SingleTrial) {
  auto spec = testing::make_analytic_spec(1);
  testing::AnalyticObjective obj(spec);
  SortedRandomProposer p(3);
  RunOptions o;
  o.n_trials = 1;
  const RunResult r = run_search(p, obj, o);
  EXPECT_EQ(r.trials.size(), 1u);
  EXPECT_EQ(r.frontier.size(), 1u);
  EXPECT_THROW(run_search(p, obj, options(0)), InvalidArgument);
}

TEST(RunSearch, SortedRandomLongRun) {
  testing::AnalyticObjective obj(testing::make_analytic_spec(2));
  SortedRandomProposer p(8);
  RunOptions o;
  o.n_trials = 4000;
  const RunResult r = run_search(p, obj, o);
  ASSERT_EQ(r.trials.size(), 4000u);
  EXPECT_FALSE(r.frontier.empty());
  for (const Trial& t : r.trials) {
    for (int k = 1; k < kBlockSize; ++k) ASSERT_LE(t.point.qtable.zigzag_at(k - 1), t.point.qtable.zigzag_at(k));
    bool covered = false;
    for (const auto& m : r.frontier.points()) {
      covered |= dominates(m, t.point) ||
                 (m.compression_rate == t.point.compression_rate && m.accuracy == t.point.accuracy);
    }
    ASSERT_TRUE(covered) << t.point.trial_index;
  }
}

TEST(RunSearch, DeterministicForSeed) {
  testing::AnalyticObjective obj(testing::make_analytic_spec(3));
  const auto run = [&](std::uint64_t seed, int batch) {
    SortedRandomProposer p(seed);
    RunOptions o;
    o.n_trials = 64;
    o.batch = batch;
    std::vector<QTable> out;
    for (const Trial& t : run_search(p, obj, o).trials) out.push_back(t.point.qtable);
    return out;
  };
  EXPECT_EQ(run(5, 1), run(5, 1));
  EXPECT_EQ(run(5, 1), run(5, 8));
  EXPECT_NE(run(5, 1), run(6, 1));
}

TEST(RunSearch, EvaluatorFailureKeepsPartialLog) {
  FailingObjective obj(5);
  UniformRandomProposer p(1);
  std::vector<Trial> sunk;
  RunOptions o;
  o.n_trials = 10;
  EXPECT_THROW(run_search(p, obj, o, [&](const Trial& t) { sunk.push_back(t); }), EvaluatorError);
  EXPECT_EQ(sunk.size(), 4u);
}

TEST(RunSearch, StopsAfterGoodPoints) {
  auto spec = testing::make_analytic_spec(4);
  testing::AnalyticObjective obj(spec);
  // Collapsed on the optimum: every trial is good.
  BoundedRandomProposer p(Bounds::from_table(spec.optimum), 1);
  RunOptions o;
  o.n_trials = 100;
  o.fitness = spec.fitness;
  o.stop_after_good = 10;
  const RunResult r = run_search(p, obj, o);
  EXPECT_EQ(r.trials.size(), 10u);
  EXPECT_EQ(r.trials_to_good, 10);
  for (const Trial& t : r.trials) EXPECT_EQ(t.point.qtable, spec.optimum);
  EXPECT_THROW(run_search(p, obj, options(5, 1, 1)), InvalidArgument);
}

TEST(BoundedRandom, StaysWithinBoundsAndReproduces) {
  auto spec = testing::make_analytic_spec(5);
  testing::AnalyticObjective obj(spec);
  const auto run = [&] {
    BoundedRandomProposer p(spec.bounds, 9);
    RunOptions o;
    o.n_trials = 300;
    return run_search(p, obj, o).trials;
  };
  const auto a = run();
  const auto b = run();
  for (std::size_t i = 0; i < a.size(); ++i) {
    ASSERT_TRUE(spec.bounds.contains(a[i].point.qtable));
    ASSERT_EQ(a[i].point.qtable, b[i].point.qtable);
  }
  EXPECT_THROW(BoundedRandomProposer(box(9, 3), 1), InvalidArgument);
}

TEST(GaussianProcess, PosteriorMeanInterpolatesAtLowNoise) {
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  GpConfig cfg;
  cfg.noise = 1e-8;
  GaussianProcess gp(cfg);
  Eigen::MatrixXd x(30, kBlockSize);
  Eigen::VectorXd y(30);
  for (int i = 0; i < x.rows(); ++i) {
    for (int j = 0; j < x.cols(); ++j) x(i, j) = u(rng);
    y(i) = std::sin(3 * x(i, 0)) + x(i, 5) - 0.3 * x(i, 9);
  }
  gp.fit(x, y);
  gp.refit_lengthscale();
  Eigen::VectorXd mean, var;
  gp.predict(x, mean, var);
  for (int i = 0; i < y.size(); ++i) {
    EXPECT_NEAR(mean(i), y(i), 1e-4);
    EXPECT_GE(var(i), 0.0);
    EXPECT_LT(var(i), 1e-4);
  }
}

TEST(GaussianProcess, ExpectedImprovement) {
  EXPECT_EQ(expected_improvement(0.3, 0.0, 0.3), 0.0);
  EXPECT_NEAR(expected_improvement(1.0, 0.0, 0.3), 0.7, 1e-15);
  EXPECT_GT(expected_improvement(0.3, 0.01, 0.3), 0.0);
  EXPECT_GT(expected_improvement(0.5, 0.01, 0.3), expected_improvement(0.4, 0.01, 0.3));
  EXPECT_NEAR(matern52(0.0, 1.0), 1.0, 1e-15);
}

BoConfig small_bo() {
  BoConfig c;
  c.n_init = 500;
  c.n_rounds = 3;
  c.grid_levels = 3;
  return c;
}

TEST(BayesOpt, SingleObservationProposalDiffersFromIt) {
  const Bounds b = box(10, 60);
  std::mt19937_64 rng(2);
  const QTable t = testing::random_table(rng, 10, 60);
  SurrogateModel model(b, GpConfig{}, 10);
  model.add(t, 0.25);
  std::mt19937_64 r1(4), r2(4);
  const QTable p1 = bo_propose(model, default_bands(), small_bo(), r1);
  EXPECT_NE(p1, t);
  EXPECT_TRUE(b.contains(p1));
  EXPECT_EQ(bo_propose(model, default_bands(), small_bo(), r2), p1);
  SurrogateModel empty(b, GpConfig{}, 10);
  EXPECT_THROW(bo_propose(empty, default_bands(), small_bo(), r1), InvalidArgument);
}

TEST(BayesOpt, CollapsedBoundsReturnTheTable) {
  std::mt19937_64 rng(3);
  const QTable t = testing::random_table(rng);
  BayesOptProposer p(Bounds::from_table(t), default_bands(), FitnessCurve{}, small_bo(), 1);
  for (int i = 0; i < 3; ++i) {
    const QTable q = p.propose();
    EXPECT_EQ(q, t);
    p.observe(q, pt(5.0, 0.5), i == 0);
  }
}

TEST(BayesOpt, ConstantObjectiveCompletes) {
  ConstantObjective obj;
  BayesOptProposer p(box(5, 50), default_bands(), FitnessCurve{0, 0, 0.5}, small_bo(), 7);
  RunOptions o;
  o.n_trials = 25;
  o.fitness = FitnessCurve{0, 0, 0.5};
  const RunResult r = run_search(p, obj, o);
  ASSERT_EQ(r.trials.size(), 25u);
  for (const Trial& t : r.trials) EXPECT_EQ(*t.y, r.trials[0].y.value());
  EXPECT_EQ(r.frontier.size(), 1u);
}

TEST(BayesOpt, DeterministicAndLogsTargetIdentity) {
  auto spec = testing::make_analytic_spec(6);
  testing::AnalyticObjective obj(spec);
  const auto run = [&] {
    BayesOptProposer p(spec.bounds, default_bands(), spec.fitness, small_bo(), 11);
    RunOptions o;
    o.n_trials = 15;
    o.fitness = spec.fitness;
    return run_search(p, obj, o).trials;
  };
  const auto a = run();
  const auto b = run();
  for (std::size_t i = 0; i < a.size(); ++i) {
    ASSERT_EQ(a[i].point.qtable, b[i].point.qtable);
    ASSERT_TRUE(spec.bounds.contains(a[i].point.qtable));
    const double cr = a[i].point.compression_rate;
    EXPECT_EQ(*a[i].y, a[i].point.accuracy - (spec.fitness.a * cr * cr + spec.fitness.b * cr + spec.fitness.c));
  }
  EXPECT_THROW(run_search(*std::make_unique<BayesOptProposer>(spec.bounds, default_bands(), spec.fitness,
                                                              small_bo(), 1),
                          obj, options(4, 2)),
               InvalidArgument);
}

TEST(BayesOpt, LocalGridOnlyMovesAreaOfInterest) {
  // With a single uniform candidate, the grid rounds refine that candidate
  // and may only change LF and MF positions.
  const Bounds b = box(20, 80);
  std::mt19937_64 rng(8);
  SurrogateModel model(b, GpConfig{}, 10);
  model.add(testing::random_table(rng, 20, 80), 1.0);
  model.add(testing::random_table(rng, 20, 80), 0.0);
  BoConfig c = small_bo();
  c.n_init = 1;
  c.n_rounds = 10;
  std::mt19937_64 replay = rng;
  std::array<int, kBlockSize> first;
  for (int i = 0; i < kBlockSize; ++i) first[i] = std::uniform_int_distribution<int>(20, 80)(replay);
  const QTable p = bo_propose(model, default_bands(), c, rng);
  EXPECT_TRUE(b.contains(p));
  const auto aoi = default_bands().area_of_interest();
  int changed = 0;
  for (int i = 0; i < kBlockSize; ++i) {
    const bool in_aoi = std::find(aoi.begin(), aoi.end(), i) != aoi.end();
    if (!in_aoi) {
      EXPECT_EQ(p[i], first[i]) << i;
    }
    changed += p[i] != first[i];
  }
  EXPECT_GT(changed, 0);
}

TEST(Ucb, ZeroRewardsGiveRoundRobin) {
  SlidingWindowUcb ucb(5, 50);
  for (int i = 0; i < 20; ++i) {
    const int a = ucb.select();
    EXPECT_EQ(a, i % 5);
    ucb.update(a, 0.0);
  }
  EXPECT_EQ(ucb.selection_counts(), (std::vector<long>{4, 4, 4, 4, 4}));
  EXPECT_THROW(SlidingWindowUcb(0, 10), InvalidArgument);
}

TEST(Ucb, RewardedArmIsPreferred) {
  SlidingWindowUcb ucb(3, 100);
  for (int i = 0; i < 300; ++i) {
    const int a = ucb.select();
    ucb.update(a, a == 2 ? 1.0 : 0.0);
  }
  EXPECT_GT(ucb.selection_counts()[2], 200);
}

TEST(Composite, SingleArmTakesEveryTrial) {
  auto spec = testing::make_analytic_spec(7);
  testing::AnalyticObjective obj(spec);
  for (ArmKind kind : {ArmKind::kPso, ArmKind::kAnnealing, ArmKind::kDifferentialEvolution,
                       ArmKind::kGreedyMutation, ArmKind::kNelderMead}) {
    CompositeConfig cfg;
    cfg.arms = {kind};
    CompositeProposer p(spec.bounds, cfg, 3);
    RunOptions o;
    o.n_trials = 120;
    const RunResult r = run_search(p, obj, o);
    EXPECT_EQ(p.selection_counts(), std::vector<long>{120}) << to_string(kind);
    for (const Trial& t : r.trials) {
      ASSERT_TRUE(spec.bounds.contains(t.point.qtable)) << to_string(kind);
      EXPECT_EQ(t.source, to_string(kind));
    }
  }
  CompositeConfig none;
  none.arms = {};
  EXPECT_THROW(CompositeProposer(spec.bounds, none, 1), InvalidArgument);
}

TEST(Composite, EveryArmSelectedAndRunIsReproducible) {
  auto spec = testing::make_analytic_spec(8);
  testing::AnalyticObjective obj(spec);
  const auto run = [&] {
    CompositeConfig cfg;
    cfg.fitness = spec.fitness;
    auto p = std::make_unique<CompositeProposer>(spec.bounds, cfg, 5);
    RunOptions o;
    o.n_trials = 200;
    auto r = run_search(*p, obj, o);
    return std::make_pair(std::move(r), p->selection_counts());
  };
  const auto [a, counts] = run();
  const auto [b, counts_again] = run();
  long total = 0;
  for (long c : counts) {
    EXPECT_GE(c, 1);
    total += c;
  }
  EXPECT_EQ(total, 200);
  EXPECT_EQ(counts, counts_again);
  for (std::size_t i = 0; i < a.trials.size(); ++i) {
    ASSERT_EQ(a.trials[i].point.qtable, b.trials[i].point.qtable);
    ASSERT_TRUE(spec.bounds.contains(a.trials[i].point.qtable));
  }
}

TEST(Composite, ScoreUsesFitnessWhenGiven) {
  CompositeConfig cfg;
  CompositeProposer plain(box(1, 255), cfg, 1);
  EXPECT_DOUBLE_EQ(plain.score(pt(10, 0.5)), 5.0);
  cfg.fitness = FitnessCurve{0, 0, 0.25};
  CompositeProposer fit(box(1, 255), cfg, 1);
  EXPECT_DOUBLE_EQ(fit.score(pt(10, 0.5)), 0.25);
}

TEST(TrialLog, RoundTripAndContextChecks) {
  const auto dir = std::filesystem::temp_directory_path() / ("qtab_log_test_" + std::to_string(::getpid()));
  std::filesystem::create_directories(dir);
  const auto path = dir / "trials.jsonl";
  EXPECT_EQ(timing_sidecar(path), dir / "trials.timing.jsonl");
  const TrialLogContext ctx{42, "abc", "proxy", "420/same"};
  auto spec = testing::make_analytic_spec(9);
  testing::AnalyticObjective obj(spec);
  SortedRandomProposer p(1);
  RunOptions o;
  o.n_trials = 20;
  o.fitness = spec.fitness;
  std::vector<Trial> written;
  {
    TrialLogWriter w(path, ctx);
    run_search(p, obj, o, [&](const Trial& t) {
      Trial copy = t;
      if (t.point.trial_index == 3) copy.point.mean_psnr = 31.5;
      w.append(copy);
      written.push_back(copy);
    });
  }
  const TrialLog log = read_trial_log(path);
  EXPECT_EQ(log.context, ctx);
  ASSERT_EQ(log.trials.size(), written.size());
  for (std::size_t i = 0; i < written.size(); ++i) {
    const Trial& a = written[i];
    const Trial& b = log.trials[i];
    EXPECT_EQ(a.point.qtable, b.point.qtable);
    EXPECT_EQ(a.point.compression_rate, b.point.compression_rate);
    EXPECT_EQ(a.point.accuracy, b.point.accuracy);
    EXPECT_EQ(a.point.mean_psnr, b.point.mean_psnr);
    EXPECT_EQ(a.point.trial_index, b.point.trial_index);
    EXPECT_EQ(a.point.strategy, b.point.strategy);
    EXPECT_EQ(a.y, b.y);
    EXPECT_EQ(a.good, b.good);
    EXPECT_EQ(a.improved_frontier, b.improved_frontier);
    EXPECT_EQ(a.decision_seconds, b.decision_seconds);
  }
  {
    std::ofstream bad(path, std::ios::app);
    bad << trial_to_json(written[0], TrialLogContext{43, "abc", "proxy", "420/same"}) << "\n";
  }
  try {
    read_trial_log(path);
    ADD_FAILURE();
  } catch (const DatasetError& e) {
    EXPECT_EQ(e.line(), 21u);
  }
  std::ofstream(path) << "";
  EXPECT_TRUE(read_trial_log(path).trials.empty());
  std::ofstream(path) << "{\"trial\": 0}\n";
  EXPECT_THROW(read_trial_log(path), DatasetError);
  std::filesystem::remove_all(dir);
}

TEST(TrialLog, FrontierCsv) {
  std::vector<EvalPoint> pts = {pt(3, 0.9, 4), pt(7, 0.5, 9)};
  pts[1].mean_psnr = 30.25;
  std::ostringstream out;
  write_frontier_csv(out, pts);
  std::istringstream in(out.str());
  std::string header, row;
  std::getline(in, header);
  EXPECT_EQ(header, "trial,strategy,compression_rate,accuracy,mean_psnr,qtable");
  int rows = 0;
  while (std::getline(in, row)) ++rows;
  EXPECT_EQ(rows, 2);
  EXPECT_NE(out.str().find(QTable().hex()), std::string::npos);
}

}  // namespace
}  // namespace qtab
