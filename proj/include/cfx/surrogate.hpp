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

#ifndef CFX_SURROGATE_HPP_
#define CFX_SURROGATE_HPP_

#include <Eigen/Core>
#include <cstdint>

namespace cfx {

/// RBF kernel hyperparameters. Lengthscales may be per-dimension (size d)
/// or shared (size 1).
struct KernelParams {
  Eigen::VectorXd lengthscales = Eigen::VectorXd::Ones(1);
  double signal_variance = 1.0;
  double jitter = 1e-10;
};

/// The conditioning dataset D_n: rows of `inputs` are points, `outputs`
/// the observed model values. Points must be pairwise distinct.
struct SampleSet {
  Eigen::MatrixXd inputs;   // n x d
  Eigen::VectorXd outputs;  // n

  int size() const { return static_cast<int>(outputs.size()); }
  int dim() const { return static_cast<int>(inputs.cols()); }
  void add(const Eigen::VectorXd& x, double y);
  /// Smallest pairwise L-inf distance from x to the stored inputs
  /// (infinity when empty).
  double min_distance(const Eigen::VectorXd& x) const;
};

/// signal_variance * exp(-1/2 sum_j ((x_j - y_j)/l_j)^2).
double rbf_kernel(const KernelParams& kernel,
                  const Eigen::Ref<const Eigen::VectorXd>& x,
                  const Eigen::Ref<const Eigen::VectorXd>& y);

struct Prediction {
  double mean = 0.0;
  double variance = 0.0;
};

struct PredictionWithGradient {
  double mean = 0.0;
  double variance = 0.0;
  Eigen::VectorXd dmean;      // d mean / d x
  Eigen::VectorXd dvariance;  // d variance / d x
};

/// Zero-mean GP conditioned on a SampleSet via a Cholesky factor of the
/// Gram matrix plus jitter. Immutable after fit; predict is const and
/// safe to call concurrently. With standardization enabled (the default for
/// search), outputs are shifted/scaled to zero mean and unit deviation
/// before fitting and mapped back on predict.
class GpPosterior {
 public:
  GpPosterior() = default;

  const KernelParams& kernel() const { return kernel_; }
  const SampleSet& data() const { return data_; }
  double effective_jitter() const { return jitter_; }
  double output_shift() const { return y_shift_; }
  double output_scale() const { return y_scale_; }

  Prediction predict(const Eigen::Ref<const Eigen::VectorXd>& x) const;
  PredictionWithGradient predict_with_gradient(
      const Eigen::Ref<const Eigen::VectorXd>& x) const;

  friend GpPosterior fit(const SampleSet& data, const KernelParams& kernel,
                         bool standardize);

 private:
  KernelParams kernel_;
  SampleSet data_;
  Eigen::MatrixXd chol_;  // lower-triangular factor L
  Eigen::VectorXd dual_;  // (K + jI)^{-1} y_std
  double y_shift_ = 0.0;
  double y_scale_ = 1.0;
  double jitter_ = 0.0;
};

/// Condition the GP on `data`. Escalates jitter by factors of 10 up to
/// 1e-4 if the Cholesky factorization fails; throws std::runtime_error if
/// it still fails (duplicate points).
GpPosterior fit(const SampleSet& data, const KernelParams& kernel,
                bool standardize = true);

/// Standard GP log evidence -1/2 y^T alpha - sum log L_ii - n/2 log 2pi,
/// evaluated on the data exactly as given (no standardization).
double log_marginal_likelihood(const SampleSet& data,
                               const KernelParams& kernel);

/// Maximum-likelihood hyperparameters by multi-start coordinate-wise
/// golden-section search over a shared lengthscale factor and the signal
/// variance, on standardized outputs. `span` gives per-dimension input
/// ranges used to scale the lengthscale bounds.
KernelParams select_hyperparameters(const SampleSet& data,
                                    const Eigen::VectorXd& span,
                                    std::uint64_t seed, int restarts = 5);

}  // namespace cfx

#endif  // CFX_SURROGATE_HPP_
