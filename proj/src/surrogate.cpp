// Copyright 2026 The cfx Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "cfx/surrogate.hpp"

#include <Eigen/Cholesky>
#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "cfx/rng.hpp"

namespace cfx {
namespace {

double lengthscale_at(const KernelParams& kernel, int j) {
  return kernel.lengthscales.size() == 1 ? kernel.lengthscales[0]
                                         : kernel.lengthscales[j];
}

Eigen::MatrixXd gram_matrix(const SampleSet& data, const KernelParams& kernel) {
  const int n = data.size();
  Eigen::MatrixXd gram(n, n);
  for (int i = 0; i < n; ++i) {
    gram(i, i) = kernel.signal_variance;
    for (int j = 0; j < i; ++j) {
      gram(i, j) = gram(j, i) =
          rbf_kernel(kernel, data.inputs.row(i), data.inputs.row(j));
    }
  }
  return gram;
}

// Cholesky of gram + jitter*I; returns false on failure.
bool try_cholesky(const Eigen::MatrixXd& gram, double jitter,
                  Eigen::MatrixXd& chol) {
  Eigen::MatrixXd k = gram;
  k.diagonal().array() += jitter;
  Eigen::LLT<Eigen::MatrixXd> llt(k);
  if (llt.info() != Eigen::Success) return false;
  chol = llt.matrixL();
  return true;
}

double golden_section_max(const std::function<double(double)>& g, double a,
                          double b, int iters) {
  constexpr double inv_phi = 0.61803398874989484820;
  double x1 = b - inv_phi * (b - a);
  double x2 = a + inv_phi * (b - a);
  double f1 = g(x1), f2 = g(x2);
  for (int i = 0; i < iters; ++i) {
    if (f1 < f2) {
      a = x1;
      x1 = x2;
      f1 = f2;
      x2 = a + inv_phi * (b - a);
      f2 = g(x2);
    } else {
      b = x2;
      x2 = x1;
      f2 = f1;
      x1 = b - inv_phi * (b - a);
      f1 = g(x1);
    }
  }
  return f1 < f2 ? x2 : x1;
}

}  // namespace

void SampleSet::add(const Eigen::VectorXd& x, double y) {
  if (size() == 0) {
    inputs.resize(1, x.size());
    inputs.row(0) = x;
    outputs.resize(1);
    outputs[0] = y;
    return;
  }
  if (x.size() != inputs.cols()) {
    throw std::invalid_argument("SampleSet::add: dimension mismatch");
  }
  inputs.conservativeResize(inputs.rows() + 1, Eigen::NoChange);
  inputs.row(inputs.rows() - 1) = x;
  outputs.conservativeResize(outputs.size() + 1);
  outputs[outputs.size() - 1] = y;
}

double SampleSet::min_distance(const Eigen::VectorXd& x) const {
  double best = std::numeric_limits<double>::infinity();
  for (int i = 0; i < size(); ++i) {
    best = std::min(best,
                    (inputs.row(i).transpose() - x).cwiseAbs().maxCoeff());
  }
  return best;
}

double rbf_kernel(const KernelParams& kernel,
                  const Eigen::Ref<const Eigen::VectorXd>& x,
                  const Eigen::Ref<const Eigen::VectorXd>& y) {
  if (x.size() != y.size()) {
    throw std::invalid_argument("rbf_kernel: dimension mismatch");
  }
  double q = 0.0;
  for (int j = 0; j < x.size(); ++j) {
    const double d = (x[j] - y[j]) / lengthscale_at(kernel, j);
    q += d * d;
  }
  return kernel.signal_variance * std::exp(-0.5 * q);
}

GpPosterior fit(const SampleSet& data, const KernelParams& kernel,
                bool standardize) {
  if (data.size() == 0) throw std::invalid_argument("fit: empty sample set");
  GpPosterior post;
  post.kernel_ = kernel;
  post.data_ = data;

  Eigen::VectorXd y = data.outputs;
  if (standardize) {
    post.y_shift_ = y.mean();
    const double var =
        (y.array() - post.y_shift_).square().sum() / y.size();
    post.y_scale_ = var > 0.0 ? std::sqrt(var) : 1.0;
    y = (y.array() - post.y_shift_) / post.y_scale_;
  }

  const Eigen::MatrixXd gram = gram_matrix(data, kernel);
  double jitter = kernel.jitter;
  bool ok = try_cholesky(gram, jitter, post.chol_);
  while (!ok && jitter < 1e-4) {
    jitter = jitter > 0.0 ? jitter * 10.0 : 1e-10;
    ok = try_cholesky(gram, jitter, post.chol_);
  }
  if (!ok) {
    throw std::runtime_error(
        "fit: Cholesky factorization failed (duplicate points?)");
  }
  post.jitter_ = jitter;
  post.dual_ = post.chol_.triangularView<Eigen::Lower>().solve(y);
  post.chol_.triangularView<Eigen::Lower>().transpose().solveInPlace(
      post.dual_);
  return post;
}

Prediction GpPosterior::predict(
    const Eigen::Ref<const Eigen::VectorXd>& x) const {
  if (x.size() != data_.dim()) {
    throw std::invalid_argument("predict: dimension mismatch");
  }
  const int n = data_.size();
  Eigen::VectorXd k(n);
  for (int i = 0; i < n; ++i) {
    k[i] = rbf_kernel(kernel_, x, data_.inputs.row(i).transpose());
  }
  const double mean_std = k.dot(dual_);
  const Eigen::VectorXd v = chol_.triangularView<Eigen::Lower>().solve(k);
  double var_std = kernel_.signal_variance - v.squaredNorm();
  var_std = std::clamp(var_std, 0.0, kernel_.signal_variance + jitter_);
  Prediction out;
  out.mean = y_shift_ + y_scale_ * mean_std;
  out.variance = y_scale_ * y_scale_ * var_std;
  return out;
}

PredictionWithGradient GpPosterior::predict_with_gradient(
    const Eigen::Ref<const Eigen::VectorXd>& x) const {
  if (x.size() != data_.dim()) {
    throw std::invalid_argument("predict_with_gradient: dimension mismatch");
  }
  const int n = data_.size();
  const int d = data_.dim();
  Eigen::VectorXd k(n);
  Eigen::MatrixXd jac(n, d);  // d k_i / d x_j
  for (int i = 0; i < n; ++i) {
    k[i] = rbf_kernel(kernel_, x, data_.inputs.row(i).transpose());
    for (int j = 0; j < d; ++j) {
      const double l = lengthscale_at(kernel_, j);
      jac(i, j) = k[i] * (data_.inputs(i, j) - x[j]) / (l * l);
    }
  }
  Eigen::VectorXd kinvk = chol_.triangularView<Eigen::Lower>().solve(k);
  double var_std = kernel_.signal_variance - kinvk.squaredNorm();
  chol_.triangularView<Eigen::Lower>().transpose().solveInPlace(kinvk);

  PredictionWithGradient out;
  out.mean = y_shift_ + y_scale_ * k.dot(dual_);
  out.dmean = y_scale_ * (jac.transpose() * dual_);
  const bool clamped =
      var_std < 0.0 || var_std > kernel_.signal_variance + jitter_;
  var_std = std::clamp(var_std, 0.0, kernel_.signal_variance + jitter_);
  out.variance = y_scale_ * y_scale_ * var_std;
  out.dvariance = clamped ? Eigen::VectorXd::Zero(d).eval()
                          : (-2.0 * y_scale_ * y_scale_ *
                             (jac.transpose() * kinvk))
                                .eval();
  return out;
}

double log_marginal_likelihood(const SampleSet& data,
                               const KernelParams& kernel) {
  const Eigen::MatrixXd gram = gram_matrix(data, kernel);
  Eigen::MatrixXd chol;
  if (!try_cholesky(gram, kernel.jitter, chol)) {
    throw std::runtime_error("log_marginal_likelihood: Cholesky failed");
  }
  Eigen::VectorXd alpha = chol.triangularView<Eigen::Lower>().solve(
      data.outputs);
  const double quad = alpha.squaredNorm();  // y^T (K+jI)^{-1} y
  const double logdet_half = chol.diagonal().array().log().sum();
  return -0.5 * quad - logdet_half -
         0.5 * data.size() * std::log(2.0 * M_PI);
}

KernelParams select_hyperparameters(const SampleSet& data,
                                    const Eigen::VectorXd& span,
                                    std::uint64_t seed, int restarts) {
  SampleSet std_data = data;
  const double mean = std_data.outputs.mean();
  const double var =
      (std_data.outputs.array() - mean).square().sum() / std_data.size();
  const double scale = var > 0.0 ? std::sqrt(var) : 1.0;
  std_data.outputs = (std_data.outputs.array() - mean) / scale;

  Eigen::VectorXd safe_span = span.cwiseMax(1e-12);
  const double lo_ls = std::log(1e-3), hi_ls = std::log(1e3);
  const double lo_sv = std::log(1e-6), hi_sv = std::log(1e6);

  auto evaluate = [&](double log_ls, double log_sv) {
    KernelParams kp;
    kp.lengthscales = std::exp(log_ls) * safe_span;
    kp.signal_variance = std::exp(log_sv);
    kp.jitter = 1e-10;
    try {
      return log_marginal_likelihood(std_data, kp);
    } catch (const std::runtime_error&) {
      return -std::numeric_limits<double>::infinity();
    }
  };

  Rng rng(seed);
  double best_ll = -std::numeric_limits<double>::infinity();
  double best_ls = 0.0, best_sv = 0.0;
  for (int r = 0; r < restarts; ++r) {
    double ls = r == 0 ? 0.0 : rng.uniform(lo_ls, hi_ls);
    double sv = r == 0 ? 0.0 : rng.uniform(lo_sv / 2, hi_sv / 2);
    for (int pass = 0; pass < 2; ++pass) {
      ls = golden_section_max([&](double v) { return evaluate(v, sv); },
                              lo_ls, hi_ls, 24);
      sv = golden_section_max([&](double v) { return evaluate(ls, v); },
                              lo_sv, hi_sv, 24);
    }
    const double ll = evaluate(ls, sv);
    if (ll > best_ll) {
      best_ll = ll;
      best_ls = ls;
      best_sv = sv;
    }
  }

  KernelParams kp;
  kp.lengthscales = std::exp(best_ls) * safe_span;
  kp.signal_variance = std::exp(best_sv);
  kp.jitter = 1e-10;
  return kp;
}

}  // namespace cfx
