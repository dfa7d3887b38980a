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

#ifndef QTAB_GAUSSIAN_PROCESS_H_
#define QTAB_GAUSSIAN_PROCESS_H_

#include <Eigen/Dense>
#include <vector>

namespace qtab {

// Matern 5/2 correlation at distance r with length scale l.
double matern52(double r, double lengthscale);

struct GpConfig {
  double noise = 1e-6;  // observation noise variance, in standardized units
  double lengthscale = 1.0;
  // Candidate length scales for marginal-likelihood refits.
  std::vector<double> lengthscale_grid = {0.25, 0.5, 1.0, 2.0, 4.0, 8.0};
};

// Zero-mean GP with an isotropic Matern 5/2 kernel on standardized targets.
// Covariance factorization retries with growing diagonal jitter and throws
// NumericalError if the matrix never becomes positive definite.
class GaussianProcess {
 public:
  explicit GaussianProcess(GpConfig config = {}) : config_(std::move(config)) {}

  // Rows of x are inputs. Refactorizes with the current length scale.
  void fit(const Eigen::MatrixXd& x, const Eigen::VectorXd& y);
  // Picks the grid length scale with the highest log marginal likelihood and
  // refactorizes with it.
  void refit_lengthscale();

  // Posterior mean and variance (original units) for each row of xs.
  void predict(const Eigen::MatrixXd& xs, Eigen::VectorXd& mean, Eigen::VectorXd& variance) const;

  double log_marginal_likelihood() const { return lml_; }
  double lengthscale() const { return config_.lengthscale; }
  double jitter() const { return jitter_; }
  Eigen::Index size() const { return x_.rows(); }
  const Eigen::MatrixXd& inputs() const { return x_; }
  const Eigen::VectorXd& targets() const { return y_; }

 private:
  Eigen::MatrixXd kernel(const Eigen::MatrixXd& a, const Eigen::VectorXd& a_sq,
                         double lengthscale) const;
  void factorize();

  GpConfig config_;
  Eigen::MatrixXd x_;
  Eigen::VectorXd x_sq_;
  Eigen::VectorXd y_;
  double y_mean_ = 0.0;
  double y_scale_ = 1.0;
  Eigen::LLT<Eigen::MatrixXd> llt_;
  Eigen::VectorXd alpha_;
  double jitter_ = 0.0;
  double lml_ = 0.0;
};

// Expected improvement over `best` for a maximization problem.
double expected_improvement(double mean, double variance, double best);

}  // namespace qtab

#endif  // QTAB_GAUSSIAN_PROCESS_H_
