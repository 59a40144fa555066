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

#include "cfx/acquisition.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <vector>

#include "cfx/gaussian.hpp"

namespace cfx {
namespace {

// Superlevel band(s) of the potential at level rho_star, in units of the
// standardized predictive variable z (y = mu + sigma z).
struct Band {
  double lo, hi;
};

std::vector<Band> bands_in_z(const PotentialSpec& potential, double mu,
                             double sigma, double rho_star) {
  const auto [r0, rm1] = superlevel_z_roots(rho_star);
  const double mu_t = mu - potential.center;
  const double w = potential.width;
  std::vector<Band> bands;
  if (potential.kind == PotentialKind::aep_minus ||
      potential.kind == PotentialKind::sep) {
    bands.push_back({(-w * rm1 - mu_t) / sigma, (-w * r0 - mu_t) / sigma});
  }
  if (potential.kind == PotentialKind::aep_plus ||
      potential.kind == PotentialKind::sep) {
    bands.push_back({(w * r0 - mu_t) / sigma, (w * rm1 - mu_t) / sigma});
  }
  return bands;
}

std::array<double, 5> polymul(const std::array<double, 5>& p, int pd,
                              const std::array<double, 5>& q, int qd) {
  std::array<double, 5> r{};
  for (int i = 0; i <= pd; ++i) {
    for (int j = 0; j <= qd; ++j) r[i + j] += p[i] * q[j];
  }
  return r;
}

struct BandMoments {
  double value = 0.0;
  double dmu = 0.0;
  double dsigma = 0.0;
};

// Assembles the closed form. On each band the potential coincides with the
// plain kernel z_q^2 exp(-z_q^2), z_q = (y - center)/w, so after completing
// the square in the joint exponent every band integral reduces to
// polynomial moments of a standard Gaussian between transformed limits:
//
//   kappa = w^2 + 2 sigma^2,  b = 2 mu~ sigma / kappa,
//   gamma = mu~ - b sigma,    eta = w sigma / sqrt(kappa),
//   zeta(z) = sqrt(kappa) (b + z) / w,
//   D = exp(-mu~^2 / kappa) w / sqrt(kappa),
//
//   int P(z_q) e^{-z_q^2} phi(z) dz = D int P((gamma + eta zeta)/w) phi dzeta.
//
// The value uses P(u) = u^2; the mean/deviation derivatives follow from
// E[g(mu + sigma Z)] differentiation, with g' vanishing at the band edges
// so no boundary terms appear:
//   d/dmu    -> P(u) = (2/w)(u - u^3)
//   d/dsigma -> same P times z = (w/sqrt(kappa)) zeta - b.
BandMoments closed_form_moments(const PotentialSpec& potential, double mu,
                                double sigma, double rho_star,
                                bool with_derivatives) {
  const double w = potential.width;
  const double mu_t = mu - potential.center;
  const double kappa = w * w + 2.0 * sigma * sigma;
  const double sqrt_kappa = std::sqrt(kappa);
  const double b = 2.0 * mu_t * sigma / kappa;
  const double gamma = mu_t - b * sigma;
  const double eta = w * sigma / sqrt_kappa;
  const double big_d = std::exp(-mu_t * mu_t / kappa) * w / sqrt_kappa;

  const double u0 = gamma / w, u1 = eta / w;
  const std::array<double, 5> u{u0, u1, 0.0, 0.0, 0.0};
  const std::array<double, 5> usq = polymul(u, 1, u, 1);
  // (2/w)(u - u^3)
  std::array<double, 5> du = polymul(usq, 2, u, 1);
  for (int i = 0; i < 5; ++i) du[i] = (2.0 / w) * (u[i] - du[i]);
  // z as a polynomial in zeta
  const std::array<double, 5> zpoly{-b, w / sqrt_kappa, 0.0, 0.0, 0.0};
  const std::array<double, 5> zdu = polymul(zpoly, 1, du, 3);

  auto transform = [&](double z) {
    if (std::isinf(z)) return z;
    return sqrt_kappa * (b + z) / w;
  };

  BandMoments out;
  for (const Band& band : bands_in_z(potential, mu, sigma, rho_star)) {
    if (!(band.hi > band.lo)) continue;
    const double zl = transform(band.lo);
    const double zh = transform(band.hi);
    out.value += -rho_star * (norm_cdf(band.hi) - norm_cdf(band.lo)) +
                 big_d * gauss_poly_integral(
                             std::span<const double>(usq.data(), 3), zl, zh);
    if (with_derivatives) {
      out.dmu += big_d * gauss_poly_integral(
                             std::span<const double>(du.data(), 4), zl, zh);
      out.dsigma += big_d * gauss_poly_integral(
                                std::span<const double>(zdu.data(), 5), zl,
                                zh);
    }
  }
  out.value = std::max(out.value, 0.0);
  return out;
}

}  // namespace

double ei_cfx_value(const PotentialSpec& potential, double mu, double sigma,
                    double rho_star) {
  if (!(sigma > 0.0)) {
    return std::max(0.0, ep_value(potential, mu) - rho_star);
  }
  return closed_form_moments(potential, mu, sigma, rho_star, false).value;
}

ClosedFormScratch ei_cfx_scratch(const PotentialSpec& potential, double mu,
                                 double sigma, double rho_star) {
  ClosedFormScratch s;
  const double w = potential.width;
  s.mu_tilde = mu - potential.center;
  s.sigma = sigma;
  s.kappa = w * w + 2.0 * sigma * sigma;
  s.a = 2.0 * s.mu_tilde * s.mu_tilde / s.kappa;
  s.b = 2.0 * s.mu_tilde * sigma / s.kappa;
  s.gamma = s.mu_tilde - s.b * sigma;
  s.eta = w * sigma / std::sqrt(s.kappa);
  // kappa (b^2 - a) / (2 w^2) collapses to -mu~^2 / kappa, which keeps the
  // exponent non-positive for any inputs.
  s.big_c = std::exp(-s.mu_tilde * s.mu_tilde / s.kappa) /
            (w * std::sqrt(s.kappa));
  for (const Band& band : bands_in_z(potential, mu, sigma, rho_star)) {
    ClosedFormScratch::BandLimits lim;
    lim.tau_lo = band.lo;
    lim.tau_hi = band.hi;
    auto tf = [&](double z) {
      return std::isinf(z) ? z : std::sqrt(s.kappa) * (s.b + z) / w;
    };
    lim.tau_lo_prime = tf(band.lo);
    lim.tau_hi_prime = tf(band.hi);
    s.bands.push_back(lim);
  }
  return s;
}

EiCfxDerivatives ei_cfx_derivatives(const PotentialSpec& potential, double mu,
                                    double sigma, double rho_star) {
  EiCfxDerivatives out;
  if (!(sigma > 0.0)) {
    const double rho = ep_value(potential, mu);
    out.value = std::max(0.0, rho - rho_star);
    out.dmu = rho > rho_star ? ep_grad(potential, mu) : 0.0;
    out.dsigma = 0.0;
    return out;
  }
  const BandMoments m =
      closed_form_moments(potential, mu, sigma, rho_star, true);
  out.value = m.value;
  out.dmu = m.dmu;
  out.dsigma = m.dsigma;
  return out;
}

double ei_cfx_gauss_hermite(const PotentialSpec& potential, double mu,
                            double sigma, double rho_star,
                            const QuadratureRule& rule) {
  double total = 0.0;
  for (int i = 0; i < rule.nodes.size(); ++i) {
    const double y = mu + sigma * rule.nodes[i];
    total += rule.weights[i] *
             std::max(0.0, ep_value(potential, y) - rho_star);
  }
  return total / kSqrt2Pi;
}

double ei_cfx(const AcquisitionInputs& inputs,
              const Eigen::Ref<const Eigen::VectorXd>& x) {
  const Prediction p = inputs.posterior->predict(x);
  return ei_cfx_value(inputs.potential, p.mean, std::sqrt(p.variance),
                      inputs.incumbent);
}

double ei_cfx_quadrature(const AcquisitionInputs& inputs,
                         const Eigen::Ref<const Eigen::VectorXd>& x,
                         const QuadratureRule& rule) {
  const Prediction p = inputs.posterior->predict(x);
  return ei_cfx_gauss_hermite(inputs.potential, p.mean,
                              std::sqrt(p.variance), inputs.incumbent, rule);
}

Eigen::VectorXd ei_cfx_grad(const AcquisitionInputs& inputs,
                            const Eigen::Ref<const Eigen::VectorXd>& x) {
  const PredictionWithGradient p =
      inputs.posterior->predict_with_gradient(x);
  const double sigma = std::sqrt(p.variance);
  const EiCfxDerivatives d = ei_cfx_derivatives(inputs.potential, p.mean,
                                                sigma, inputs.incumbent);
  if (sigma > 0.0) {
    // d sigma / d x = d variance / d x / (2 sigma)
    return d.dmu * p.dmean + (d.dsigma / (2.0 * sigma)) * p.dvariance;
  }
  return (d.dmu * p.dmean).eval();
}

Eigen::VectorXd ei_cfx_grad_fd(const AcquisitionInputs& inputs,
                               const Eigen::Ref<const Eigen::VectorXd>& x,
                               double h) {
  Eigen::VectorXd grad(x.size());
  Eigen::VectorXd probe = x;
  for (int j = 0; j < x.size(); ++j) {
    probe[j] = x[j] + h;
    const double up = ei_cfx(inputs, probe);
    probe[j] = x[j] - h;
    const double dn = ei_cfx(inputs, probe);
    probe[j] = x[j];
    grad[j] = (up - dn) / (2.0 * h);
  }
  return grad;
}

double expected_improvement(double mu, double sigma, double incumbent) {
  if (!(sigma > 0.0)) return std::max(0.0, mu - incumbent);
  const double u = (mu - incumbent) / sigma;
  return sigma * (u * norm_cdf(u) + norm_pdf(u));
}

double ei_naive(const GpPosterior& posterior_over_composition,
                double incumbent, const Eigen::Ref<const Eigen::VectorXd>& x) {
  const Prediction p = posterior_over_composition.predict(x);
  return expected_improvement(p.mean, std::sqrt(p.variance), incumbent);
}

Eigen::VectorXd ei_naive_grad(const GpPosterior& posterior_over_composition,
                              double incumbent,
                              const Eigen::Ref<const Eigen::VectorXd>& x) {
  const PredictionWithGradient p =
      posterior_over_composition.predict_with_gradient(x);
  const double sigma = std::sqrt(p.variance);
  if (!(sigma > 0.0)) {
    return (p.mean > incumbent ? p.dmean : Eigen::VectorXd::Zero(x.size()))
        .eval();
  }
  const double u = (p.mean - incumbent) / sigma;
  // dEI = Phi(u) dmu + phi(u) dsigma
  return norm_cdf(u) * p.dmean +
         (norm_pdf(u) / (2.0 * sigma)) * p.dvariance;
}

}  // namespace cfx
