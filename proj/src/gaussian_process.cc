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

#include "qtab/gaussian_process.h"

#include <cmath>
#include <limits>

#include "qtab/error.h"

namespace qtab {

double matern52(double r, double lengthscale) {
  const double s = std::sqrt(5.0) * r / lengthscale;
  return (1.0 + s + s * s / 3.0) * std::exp(-s);
}

Eigen::MatrixXd GaussianProcess::kernel(const Eigen::MatrixXd& a, const Eigen::VectorXd& a_sq,
                                        double lengthscale) const {
  Eigen::MatrixXd d2 = -2.0 * a * x_.transpose();
  d2.colwise() += a_sq;
  d2.rowwise() += x_sq_.transpose();
  return d2.unaryExpr([lengthscale](double v) { return matern52(std::sqrt(std::max(v, 0.0)), lengthscale); });
}

void GaussianProcess::fit(const Eigen::MatrixXd& x, const Eigen::VectorXd& y) {
  if (x.rows() == 0 || x.rows() != y.size()) throw InvalidArgument("GP fit needs matching, non-empty data");
  x_ = x;
  x_sq_ = x_.rowwise().squaredNorm();
  y_mean_ = y.mean();
  const double var = y.size() > 1 ? (y.array() - y_mean_).square().sum() / static_cast<double>(y.size()) : 0.0;
  y_scale_ = var > 0.0 ? std::sqrt(var) : 1.0;
  y_ = (y.array() - y_mean_) / y_scale_;
  factorize();
}

void GaussianProcess::factorize() {
  const Eigen::MatrixXd k = kernel(x_, x_sq_, config_.lengthscale);
  const Eigen::Index n = k.rows();
  for (double jitter = 0.0;; jitter = jitter == 0.0 ? 1e-10 : jitter * 10.0) {
    if (jitter > 1e-3) throw NumericalError("GP covariance is not positive definite even with jitter");
    Eigen::MatrixXd kn = k;
    kn.diagonal().array() += config_.noise + jitter;
    llt_.compute(kn);
    if (llt_.info() == Eigen::Success && llt_.matrixLLT().diagonal().minCoeff() > 0.0) {
      jitter_ = jitter;
      break;
    }
  }
  alpha_ = llt_.solve(y_);
  const double log_det = 2.0 * llt_.matrixLLT().diagonal().array().log().sum();
  lml_ = -0.5 * y_.dot(alpha_) - 0.5 * log_det - 0.5 * static_cast<double>(n) * std::log(2.0 * M_PI);
}

void GaussianProcess::refit_lengthscale() {
  if (x_.rows() == 0) return;
  double best_l = config_.lengthscale;
  double best_lml = -std::numeric_limits<double>::infinity();
  for (double l : config_.lengthscale_grid) {
    config_.lengthscale = l;
    try {
      factorize();
    } catch (const NumericalError&) {
      continue;
    }
    if (lml_ > best_lml) {
      best_lml = lml_;
      best_l = l;
    }
  }
  config_.lengthscale = best_l;
  factorize();
}

void GaussianProcess::predict(const Eigen::MatrixXd& xs, Eigen::VectorXd& mean,
                              Eigen::VectorXd& variance) const {
  const Eigen::VectorXd xs_sq = xs.rowwise().squaredNorm();
  const Eigen::MatrixXd ks = kernel(xs, xs_sq, config_.lengthscale);  // m x n
  mean = (ks * alpha_).array() * y_scale_ + y_mean_;
  const Eigen::MatrixXd v = llt_.matrixL().solve(ks.transpose());    // n x m
  variance = (1.0 - v.colwise().squaredNorm().transpose().array()).max(0.0) * (y_scale_ * y_scale_);
}

double expected_improvement(double mean, double variance, double best) {
  const double sd = std::sqrt(std::max(variance, 0.0));
  const double diff = mean - best;
  if (sd < 1e-12) return std::max(diff, 0.0);
  const double z = diff / sd;
  const double cdf = 0.5 * std::erfc(-z / std::sqrt(2.0));
  const double pdf = std::exp(-0.5 * z * z) / std::sqrt(2.0 * M_PI);
  return diff * cdf + sd * pdf;
}

}  // namespace qtab
