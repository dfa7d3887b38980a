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

#include "qtab/bandit.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "qtab/error.h"

namespace qtab {

using RealVector = std::array<double, kBlockSize>;

IntBox IntBox::from_bounds(const Bounds& bounds) {
  bounds.validate();
  IntBox box;
  for (int i = 0; i < kBlockSize; ++i) {
    box.lo[i] = bounds.lower_int(i);
    box.hi[i] = bounds.upper_int(i);
  }
  return box;
}

TableVector IntBox::clamp(const RealVector& x) const {
  TableVector v;
  for (int i = 0; i < kBlockSize; ++i) {
    v[i] = std::clamp(static_cast<int>(std::lround(x[i])), lo[i], hi[i]);
  }
  return v;
}

TableVector IntBox::sample(std::mt19937_64& rng) const {
  TableVector v;
  for (int i = 0; i < kBlockSize; ++i) v[i] = std::uniform_int_distribution<int>(lo[i], hi[i])(rng);
  return v;
}

namespace {

RealVector uniform_point(const IntBox& box, std::mt19937_64& rng) {
  RealVector r;
  for (int i = 0; i < kBlockSize; ++i) {
    r[i] = std::uniform_real_distribution<double>(box.lo[i], box.hi[i])(rng);
  }
  return r;
}

void clamp_real(const IntBox& box, RealVector& x) {
  for (int i = 0; i < kBlockSize; ++i) x[i] = std::clamp(x[i], double(box.lo[i]), double(box.hi[i]));
}

class ParticleSwarm : public Arm {
 public:
  explicit ParticleSwarm(const IntBox& box) : box_(box) {}
  std::string name() const override { return "pso"; }

  TableVector propose(std::mt19937_64& rng, const std::optional<TableVector>&) override {
    if (particles_.empty()) initialize(rng);
    if (next_ == 0 && iteration_ > moves_) {
      move(rng);
      ++moves_;
    }
    return box_.clamp(particles_[next_].x);
  }

  void observe(const TableVector&, double score) override {
    Particle& p = particles_[next_];
    if (score > p.best_score) {
      p.best_score = score;
      p.best = p.x;
    }
    if (score > global_score_) {
      global_score_ = score;
      global_ = p.x;
    }
    if (++next_ == kParticles) {
      next_ = 0;
      ++iteration_;
    }
  }

 private:
  static constexpr int kParticles = 16;
  static constexpr double kInertia = 0.72;
  static constexpr double kCognitive = 1.49;
  static constexpr double kSocial = 1.49;

  struct Particle {
    RealVector x{}, v{}, best{};
    double best_score = -std::numeric_limits<double>::infinity();
  };

  void initialize(std::mt19937_64& rng) {
    particles_.resize(kParticles);
    for (auto& p : particles_) {
      p.x = uniform_point(box_, rng);
      for (int i = 0; i < kBlockSize; ++i) {
        const double span = box_.hi[i] - box_.lo[i];
        p.v[i] = std::uniform_real_distribution<double>(-0.25, 0.25)(rng) * span;
      }
      p.best = p.x;
    }
  }

  void move(std::mt19937_64& rng) {
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    for (auto& p : particles_) {
      for (int i = 0; i < kBlockSize; ++i) {
        const double span = box_.hi[i] - box_.lo[i];
        double v = kInertia * p.v[i] + kCognitive * unit(rng) * (p.best[i] - p.x[i]) +
                   kSocial * unit(rng) * (global_[i] - p.x[i]);
        v = std::clamp(v, -span, span);
        double x = p.x[i] + v;
        if (x < box_.lo[i] || x > box_.hi[i]) {
          x = std::clamp(x, double(box_.lo[i]), double(box_.hi[i]));
          v = 0.0;
        }
        p.x[i] = x;
        p.v[i] = v;
      }
    }
  }

  IntBox box_;
  std::vector<Particle> particles_;
  RealVector global_{};
  double global_score_ = -std::numeric_limits<double>::infinity();
  int next_ = 0;
  int iteration_ = 0;
  int moves_ = 0;
};

class SimulatedAnnealing : public Arm {
 public:
  explicit SimulatedAnnealing(const IntBox& box) : box_(box) {}
  std::string name() const override { return "sa"; }

  TableVector propose(std::mt19937_64& rng, const std::optional<TableVector>&) override {
    acceptance_draw_ = std::uniform_real_distribution<double>(0.0, 1.0)(rng);
    if (!has_current_) return box_.sample(rng);
    std::vector<int> movable;
    for (int i = 0; i < kBlockSize; ++i) {
      if (box_.hi[i] > box_.lo[i]) movable.push_back(i);
    }
    TableVector x = current_;
    if (movable.empty()) return x;
    const int j = movable[std::uniform_int_distribution<std::size_t>(0, movable.size() - 1)(rng)];
    const double mean_step = temperature_ * (box_.hi[j] - box_.lo[j]) / 4.0;
    const int delta = 1 + std::geometric_distribution<int>(1.0 / (1.0 + mean_step))(rng);
    const int sign = std::bernoulli_distribution(0.5)(rng) ? 1 : -1;
    int v = std::clamp(x[j] + sign * delta, box_.lo[j], box_.hi[j]);
    if (v == x[j]) v = std::clamp(x[j] - sign * delta, box_.lo[j], box_.hi[j]);
    x[j] = v;
    return x;
  }

  void observe(const TableVector& x, double score) override {
    if (!has_current_) {
      current_ = best_ = x;
      current_score_ = best_score_ = score;
      has_current_ = true;
      return;
    }
    const double diff = score - current_score_;
    scale_ = 0.9 * scale_ + 0.1 * std::abs(diff);
    const double t = temperature_ * std::max(scale_, 1e-9);
    if (diff >= 0.0 || acceptance_draw_ < std::exp(diff / t)) {
      current_ = x;
      current_score_ = score;
    }
    if (score > best_score_) {
      best_ = x;
      best_score_ = score;
    }
    temperature_ *= kCooling;
    if (temperature_ < kMinTemperature) {
      temperature_ = 1.0;
      current_ = best_;
      current_score_ = best_score_;
    }
  }

 private:
  static constexpr double kCooling = 0.97;
  static constexpr double kMinTemperature = 0.01;

  IntBox box_;
  bool has_current_ = false;
  TableVector current_{}, best_{};
  double current_score_ = 0.0, best_score_ = 0.0;
  double temperature_ = 1.0;
  double scale_ = 0.0;
  double acceptance_draw_ = 0.0;
};

class DifferentialEvolution : public Arm {
 public:
  explicit DifferentialEvolution(const IntBox& box) : box_(box) {}
  std::string name() const override { return "de"; }

  TableVector propose(std::mt19937_64& rng, const std::optional<TableVector>&) override {
    if (static_cast<int>(population_.size()) < kPopulation) return box_.sample(rng);
    std::uniform_int_distribution<int> pick(0, kPopulation - 1);
    int r1, r2, r3;
    do r1 = pick(rng); while (r1 == target_);
    do r2 = pick(rng); while (r2 == target_ || r2 == r1);
    do r3 = pick(rng); while (r3 == target_ || r3 == r1 || r3 == r2);
    const int jrand = std::uniform_int_distribution<int>(0, kBlockSize - 1)(rng);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    RealVector trial;
    for (int j = 0; j < kBlockSize; ++j) {
      if (j == jrand || unit(rng) < kCrossover) {
        trial[j] = population_[r1].x[j] +
                   kWeight * (population_[r2].x[j] - population_[r3].x[j]);
      } else {
        trial[j] = population_[target_].x[j];
      }
    }
    return box_.clamp(trial);
  }

  void observe(const TableVector& x, double score) override {
    if (static_cast<int>(population_.size()) < kPopulation) {
      population_.push_back({x, score});
      return;
    }
    if (score >= population_[target_].score) population_[target_] = {x, score};
    target_ = (target_ + 1) % kPopulation;
  }

 private:
  static constexpr int kPopulation = 32;
  static constexpr double kWeight = 0.5;
  static constexpr double kCrossover = 0.9;

  struct Member {
    TableVector x;
    double score;
  };

  IntBox box_;
  std::vector<Member> population_;
  int target_ = 0;
};

class GreedyMutation : public Arm {
 public:
  explicit GreedyMutation(const IntBox& box) : box_(box) {}
  std::string name() const override { return "greedy"; }

  TableVector propose(std::mt19937_64& rng, const std::optional<TableVector>& incumbent) override {
    if (!incumbent) return box_.sample(rng);
    TableVector x = *incumbent;
    const int k = std::uniform_int_distribution<int>(1, kMaxMutations)(rng);
    std::array<int, kBlockSize> order;
    std::iota(order.begin(), order.end(), 0);
    for (int j = 0; j < k; ++j) {
      std::swap(order[j], order[std::uniform_int_distribution<int>(j, kBlockSize - 1)(rng)]);
      const int i = order[j];
      if (box_.hi[i] == box_.lo[i]) continue;
      int v;
      do v = std::uniform_int_distribution<int>(box_.lo[i], box_.hi[i])(rng);
      while (v == x[i]);
      x[i] = v;
    }
    return x;
  }

  void observe(const TableVector&, double) override {}

 private:
  static constexpr int kMaxMutations = 5;
  IntBox box_;
};

class NelderMead : public Arm {
 public:
  explicit NelderMead(const IntBox& box) : box_(box) {}
  std::string name() const override { return "nelder-mead"; }

  TableVector propose(std::mt19937_64& rng, const std::optional<TableVector>&) override {
    if (phase_ == Phase::kRestart) restart(rng);
    return box_.clamp(pending_);
  }

  // Scores are maximized; the simplex minimizes f = -score.
  void observe(const TableVector&, double score) override {
    const double f = -score;
    switch (phase_) {
      case Phase::kRestart:
        break;
      case Phase::kInit:
        values_[index_] = f;
        if (++index_ == kVertices) {
          start_iteration();
        } else {
          pending_ = vertices_[index_];
        }
        break;
      case Phase::kReflect:
        reflected_ = pending_;
        f_reflected_ = f;
        if (f < values_[order_[0]]) {
          pending_ = along(centroid_, reflected_, kExpansion);
          phase_ = Phase::kExpand;
        } else if (f < values_[order_[kVertices - 2]]) {
          accept(reflected_, f);
        } else if (f < values_[order_[kVertices - 1]]) {
          pending_ = along(centroid_, reflected_, kContraction);
          phase_ = Phase::kContractOutside;
        } else {
          pending_ = along(centroid_, vertices_[order_[kVertices - 1]], kContraction);
          phase_ = Phase::kContractInside;
        }
        break;
      case Phase::kExpand:
        if (f < f_reflected_) accept(pending_, f); else accept(reflected_, f_reflected_);
        break;
      case Phase::kContractOutside:
        if (f <= f_reflected_) accept(pending_, f); else begin_shrink();
        break;
      case Phase::kContractInside:
        if (f < values_[order_[kVertices - 1]]) accept(pending_, f); else begin_shrink();
        break;
      case Phase::kShrink:
        values_[order_[index_]] = f;
        if (++index_ == kVertices) {
          start_iteration();
        } else {
          pending_ = vertices_[order_[index_]];
        }
        break;
    }
  }

 private:
  static constexpr int kVertices = kBlockSize + 1;
  static constexpr double kExpansion = 2.0;
  static constexpr double kContraction = 0.5;
  static constexpr double kShrinkFactor = 0.5;
  static constexpr int kMaxIterations = 400;

  enum class Phase { kRestart, kInit, kReflect, kExpand, kContractOutside, kContractInside, kShrink };

  RealVector along(const RealVector& from, const RealVector& to, double t) const {
    RealVector r;
    for (int i = 0; i < kBlockSize; ++i) r[i] = from[i] + t * (to[i] - from[i]);
    clamp_real(box_, r);
    return r;
  }

  void restart(std::mt19937_64& rng) {
    vertices_.assign(kVertices, uniform_point(box_, rng));
    values_.assign(kVertices, 0.0);
    for (int i = 0; i < kBlockSize; ++i) {
      const double step = 0.2 * (box_.hi[i] - box_.lo[i]);
      RealVector& v = vertices_[i + 1];
      v[i] = v[i] + step <= box_.hi[i] ? v[i] + step : v[i] - step;
    }
    index_ = 0;
    iterations_ = 0;
    pending_ = vertices_[0];
    phase_ = Phase::kInit;
  }

  void start_iteration() {
    order_.resize(kVertices);
    std::iota(order_.begin(), order_.end(), 0);
    std::stable_sort(order_.begin(), order_.end(), [&](int a, int b) { return values_[a] < values_[b]; });
    if (collapsed() || ++iterations_ > kMaxIterations) {
      phase_ = Phase::kRestart;
      return;
    }
    centroid_.fill(0.0);
    for (int k = 0; k < kVertices - 1; ++k) {
      for (int i = 0; i < kBlockSize; ++i) centroid_[i] += vertices_[order_[k]][i];
    }
    for (double& c : centroid_) c /= kVertices - 1;
    pending_ = along(centroid_, vertices_[order_[kVertices - 1]], -1.0);
    phase_ = Phase::kReflect;
  }

  bool collapsed() const {
    const RealVector& best = vertices_[order_[0]];
    for (const auto& v : vertices_) {
      for (int i = 0; i < kBlockSize; ++i) {
        if (std::abs(v[i] - best[i]) >= 0.5) return false;
      }
    }
    return true;
  }

  void accept(const RealVector& x, double f) {
    const int worst = order_[kVertices - 1];
    vertices_[worst] = x;
    values_[worst] = f;
    start_iteration();
  }

  void begin_shrink() {
    const RealVector best = vertices_[order_[0]];
    for (int k = 1; k < kVertices; ++k) {
      vertices_[order_[k]] = along(best, vertices_[order_[k]], kShrinkFactor);
    }
    index_ = 1;
    pending_ = vertices_[order_[1]];
    phase_ = Phase::kShrink;
  }

  IntBox box_;
  Phase phase_ = Phase::kRestart;
  std::vector<RealVector> vertices_;
  std::vector<double> values_;
  std::vector<int> order_;
  RealVector centroid_{}, pending_{}, reflected_{};
  double f_reflected_ = 0.0;
  int index_ = 0;
  int iterations_ = 0;
};

}  // namespace

std::string to_string(ArmKind kind) {
  switch (kind) {
    case ArmKind::kPso: return "pso";
    case ArmKind::kAnnealing: return "sa";
    case ArmKind::kDifferentialEvolution: return "de";
    case ArmKind::kGreedyMutation: return "greedy";
    case ArmKind::kNelderMead: return "nelder-mead";
  }
  return "unknown";
}

ArmKind parse_arm_kind(std::string_view s) {
  for (ArmKind k : {ArmKind::kPso, ArmKind::kAnnealing, ArmKind::kDifferentialEvolution,
                    ArmKind::kGreedyMutation, ArmKind::kNelderMead}) {
    if (to_string(k) == s) return k;
  }
  throw InvalidArgument("unknown bandit arm: " + std::string(s));
}

std::unique_ptr<Arm> make_arm(ArmKind kind, const IntBox& box) {
  switch (kind) {
    case ArmKind::kPso: return std::make_unique<ParticleSwarm>(box);
    case ArmKind::kAnnealing: return std::make_unique<SimulatedAnnealing>(box);
    case ArmKind::kDifferentialEvolution: return std::make_unique<DifferentialEvolution>(box);
    case ArmKind::kGreedyMutation: return std::make_unique<GreedyMutation>(box);
    case ArmKind::kNelderMead: return std::make_unique<NelderMead>(box);
  }
  throw InvalidArgument("unknown bandit arm");
}

SlidingWindowUcb::SlidingWindowUcb(int arms, int window)
    : arms_(arms), window_(window), counts_(arms, 0) {
  if (arms < 1) throw InvalidArgument("bandit needs at least one arm");
  if (window < 1) throw InvalidArgument("bandit window must be positive");
}

int SlidingWindowUcb::select() const {
  std::vector<int> pulls(arms_, 0);
  std::vector<double> rewards(arms_, 0.0);
  for (const auto& [arm, reward] : history_) {
    ++pulls[arm];
    rewards[arm] += reward;
  }
  for (int a = 0; a < arms_; ++a) {
    if (pulls[a] == 0) return a;
  }
  const double log_n = std::log(static_cast<double>(history_.size()));
  int best = 0;
  double best_value = -std::numeric_limits<double>::infinity();
  for (int a = 0; a < arms_; ++a) {
    const double value = rewards[a] / pulls[a] + std::sqrt(2.0 * log_n / pulls[a]);
    if (value > best_value) {
      best_value = value;
      best = a;
    }
  }
  return best;
}

void SlidingWindowUcb::update(int arm, double reward) {
  if (arm < 0 || arm >= arms_) throw InvalidArgument("bandit arm index out of range");
  history_.emplace_back(arm, reward);
  if (static_cast<int>(history_.size()) > window_) history_.pop_front();
  ++counts_[arm];
}

CompositeProposer::CompositeProposer(const Bounds& bounds, CompositeConfig config, std::uint64_t seed)
    : box_(IntBox::from_bounds(bounds)),
      config_(std::move(config)),
      bandit_(std::max<int>(1, static_cast<int>(config_.arms.size())), config_.window),
      rng_(seed) {
  if (config_.arms.empty()) throw InvalidArgument("composite search needs at least one arm");
  for (ArmKind k : config_.arms) arms_.push_back(make_arm(k, box_));
}

double CompositeProposer::score(const EvalPoint& p) const {
  return config_.fitness ? fitness_residual(p, *config_.fitness) : p.accuracy * p.compression_rate;
}

QTable CompositeProposer::propose() {
  current_ = bandit_.select();
  return QTable(arms_[current_]->propose(rng_, incumbent_));
}

void CompositeProposer::observe(const QTable& table, const EvalPoint& point, bool improved) {
  if (current_ < 0) throw InvalidArgument("observe called before propose");
  const TableVector x = table.values();
  const double s = score(point);
  arms_[current_]->observe(x, s);
  bandit_.update(current_, improved ? 1.0 : 0.0);
  if (!incumbent_ || s > incumbent_score_) {
    incumbent_ = x;
    incumbent_score_ = s;
  }
}

std::string CompositeProposer::last_source() const {
  return current_ < 0 ? std::string() : arms_[current_]->name();
}

}  // namespace qtab
