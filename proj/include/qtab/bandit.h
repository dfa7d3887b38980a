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

#ifndef QTAB_BANDIT_H_
#define QTAB_BANDIT_H_

#include <array>
#include <cstdint>
#include <deque>
#include <memory>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "qtab/pareto.h"
#include "qtab/qtable.h"
#include "qtab/search.h"

namespace qtab {

using TableVector = std::array<int, kBlockSize>;

// Integer box [lo, hi] per entry.
struct IntBox {
  TableVector lo{};
  TableVector hi{};
  static IntBox from_bounds(const Bounds& bounds);
  TableVector clamp(const std::array<double, kBlockSize>& x) const;
  TableVector sample(std::mt19937_64& rng) const;
};

// A heuristic optimizer driven one proposal at a time. Scores are maximized.
class Arm {
 public:
  virtual ~Arm() = default;
  virtual std::string name() const = 0;
  // `incumbent` is the best table seen by the whole composite run, if any.
  virtual TableVector propose(std::mt19937_64& rng, const std::optional<TableVector>& incumbent) = 0;
  // Result of the arm's own latest proposal.
  virtual void observe(const TableVector& x, double score) = 0;
};

enum class ArmKind { kPso, kAnnealing, kDifferentialEvolution, kGreedyMutation, kNelderMead };

std::string to_string(ArmKind kind);
ArmKind parse_arm_kind(std::string_view s);
std::unique_ptr<Arm> make_arm(ArmKind kind, const IntBox& box);

// UCB1 over the most recent `window` pulls. Arms without a pull inside the
// window are chosen first; ties go to the lowest index.
class SlidingWindowUcb {
 public:
  SlidingWindowUcb(int arms, int window);
  int select() const;
  void update(int arm, double reward);
  const std::vector<long>& selection_counts() const { return counts_; }

 private:
  int arms_;
  int window_;
  std::deque<std::pair<int, double>> history_;
  std::vector<long> counts_;
};

struct CompositeConfig {
  int window = 50;
  std::vector<ArmKind> arms = {ArmKind::kPso, ArmKind::kAnnealing,
                               ArmKind::kDifferentialEvolution, ArmKind::kGreedyMutation,
                               ArmKind::kNelderMead};
  // Arms maximize accuracy - fitness(rate) when set, accuracy * rate
  // otherwise.
  std::optional<FitnessCurve> fitness;
};

class CompositeProposer : public Proposer {
 public:
  CompositeProposer(const Bounds& bounds, CompositeConfig config, std::uint64_t seed);
  Strategy strategy() const override { return Strategy::kComposite; }
  QTable propose() override;
  void observe(const QTable& table, const EvalPoint& point, bool improved) override;
  std::string last_source() const override;
  const std::vector<long>& selection_counts() const { return bandit_.selection_counts(); }
  double score(const EvalPoint& p) const;

 private:
  IntBox box_;
  CompositeConfig config_;
  std::vector<std::unique_ptr<Arm>> arms_;
  SlidingWindowUcb bandit_;
  std::mt19937_64 rng_;
  int current_ = -1;
  std::optional<TableVector> incumbent_;
  double incumbent_score_ = 0.0;
};

}  // namespace qtab

#endif  // QTAB_BANDIT_H_
