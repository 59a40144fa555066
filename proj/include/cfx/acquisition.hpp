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

#ifndef CFX_ACQUISITION_HPP_
#define CFX_ACQUISITION_HPP_

#include <Eigen/Core>
#include <vector>

#include "cfx/potential.hpp"
#include "cfx/quadrature.hpp"
#include "cfx/surrogate.hpp"

namespace cfx {

/// Everything the acquisition needs at a candidate point: the conditioned
/// surrogate over f, the potential, and the incumbent rho*_n (the maximum
/// potential observed so far, recomputed from the live sample set).
struct AcquisitionInputs {
  const GpPosterior* posterior = nullptr;
  PotentialSpec potential;
  double incumbent = 0.0;
};

/// Expected counterfactual improvement E[max{0, rho(fhat) - rho*}] for a
/// scalar Gaussian belief fhat ~ N(mu, sigma^2), in closed form.
///
/// The max is removed by restricting to the superlevel band(s) of the
/// potential, whose endpoints come from the real Lambert-W roots; each band
/// contributes rho* [Phi(tau_0) - Phi(tau_-1)] plus a Gaussian-moment term
/// evaluated between transformed limits. sigma = 0 falls back to the
/// degenerate value max{0, rho(mu) - rho*}.
double ei_cfx_value(const PotentialSpec& potential, double mu, double sigma,
                    double rho_star);

/// Closed-form value together with partial derivatives with respect to the
/// predictive mean and standard deviation.
struct EiCfxDerivatives {
  double value = 0.0;
  double dmu = 0.0;
  double dsigma = 0.0;
};
EiCfxDerivatives ei_cfx_derivatives(const PotentialSpec& potential, double mu,
                                    double sigma, double rho_star);

/// The intermediate quantities of the closed form at one (mu, sigma) pair:
/// the completed-square constants and the transformed integration limits
/// per superlevel band. Exposed for inspection and term-level testing.
struct ClosedFormScratch {
  double mu_tilde = 0.0;  ///< mu - center
  double sigma = 0.0;
  double kappa = 0.0;     ///< width^2 + 2 sigma^2, strictly positive
  double a = 0.0;         ///< 2 mu~^2 / kappa
  double b = 0.0;         ///< 2 mu~ sigma / kappa
  double big_c = 0.0;     ///< exp(kappa (b^2 - a) / (2 w^2)) / (w sqrt(kappa))
  double gamma = 0.0;     ///< mu~ - b sigma
  double eta = 0.0;       ///< w sigma / sqrt(kappa), non-negative
  struct BandLimits {
    double tau_lo = 0.0;       ///< z-space limits (tau_0 / tau_-1 pair)
    double tau_hi = 0.0;
    double tau_lo_prime = 0.0; ///< transformed limits sqrt(kappa)(b+tau)/w
    double tau_hi_prime = 0.0;
  };
  std::vector<BandLimits> bands;
};
ClosedFormScratch ei_cfx_scratch(const PotentialSpec& potential, double mu,
                                 double sigma, double rho_star);

/// Gauss-Hermite estimate sum_i (w_i / sqrt(2 pi)) max{0, rho(mu + sigma
/// z_i) - rho*} for a rule with weight exp(-z^2/2). The independent check
/// of the closed form on smooth-resolution inputs.
double ei_cfx_gauss_hermite(const PotentialSpec& potential, double mu,
                            double sigma, double rho_star,
                            const QuadratureRule& rule);

/// Acquisition value at a candidate point under the GP posterior. Pure
/// with respect to the immutable posterior; evaluating many candidates
/// concurrently is safe.
double ei_cfx(const AcquisitionInputs& inputs,
              const Eigen::Ref<const Eigen::VectorXd>& x);

/// Quadrature-oracle evaluation at a candidate point.
double ei_cfx_quadrature(const AcquisitionInputs& inputs,
                         const Eigen::Ref<const Eigen::VectorXd>& x,
                         const QuadratureRule& rule);

/// Gradient of EI-CFX with respect to x, by the chain rule through
/// (mu_n(x), K_n(x)) with analytic band-moment derivatives.
Eigen::VectorXd ei_cfx_grad(const AcquisitionInputs& inputs,
                            const Eigen::Ref<const Eigen::VectorXd>& x);

/// Central finite-difference fallback gradient (step h per coordinate).
Eigen::VectorXd ei_cfx_grad_fd(const AcquisitionInputs& inputs,
                               const Eigen::Ref<const Eigen::VectorXd>& x,
                               double h);

/// Classic expected improvement sigma (u Phi(u) + phi(u)) with
/// u = (mu - incumbent)/sigma; the baseline acquisition over rho of f.
double expected_improvement(double mu, double sigma, double incumbent);

/// Classic EI under a posterior fit on composed observations rho(f(x_i)).
double ei_naive(const GpPosterior& posterior_over_composition,
                double incumbent, const Eigen::Ref<const Eigen::VectorXd>& x);

/// Gradient of the classic EI through the posterior.
Eigen::VectorXd ei_naive_grad(const GpPosterior& posterior_over_composition,
                              double incumbent,
                              const Eigen::Ref<const Eigen::VectorXd>& x);

}  // namespace cfx

#endif  // CFX_ACQUISITION_HPP_
