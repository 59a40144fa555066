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

#include "cfx/quadrature.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>
#include <vector>

#include "cfx/gaussian.hpp"

namespace cfx {
namespace {

constexpr int kMaxQlSweeps = 50;

// Implicit-shift QL with Wilkinson shifts on a symmetric tridiagonal
// matrix. d holds the diagonal, e the subdiagonal in e[0..n-2]. Instead of
// accumulating full eigenvectors, the plane rotations are applied to a
// single row vector z initialized to e_1, which yields exactly the first
// components needed by Golub-Welsch.
void ql_implicit_shift(Eigen::VectorXd& d, Eigen::VectorXd& e,
                       Eigen::VectorXd& z) {
  const int n = static_cast<int>(d.size());
  if (n <= 1) return;
  constexpr double eps = std::numeric_limits<double>::epsilon();
  e[n - 1] = 0.0;
  for (int l = 0; l < n; ++l) {
    int iter = 0;
    int m = l;
    do {
      for (m = l; m < n - 1; ++m) {
        const double dd = std::abs(d[m]) + std::abs(d[m + 1]);
        if (std::abs(e[m]) <= eps * dd) break;
      }
      if (m == l) break;
      if (iter++ == kMaxQlSweeps) {
        throw std::runtime_error(
            "golub_welsch: QL iteration failed to converge (invalid "
            "recurrence coefficients?)");
      }
      double g = (d[l + 1] - d[l]) / (2.0 * e[l]);
      double r = std::hypot(g, 1.0);
      g = d[m] - d[l] + e[l] / (g + std::copysign(r, g));
      double s = 1.0, c = 1.0, p = 0.0;
      int i = m - 1;
      for (; i >= l; --i) {
        double f = s * e[i];
        const double b = c * e[i];
        r = std::hypot(f, g);
        e[i + 1] = r;
        if (r == 0.0) {
          d[i + 1] -= p;
          e[m] = 0.0;
          break;
        }
        s = f / r;
        c = g / r;
        g = d[i + 1] - p;
        r = (d[i] - g) * s + 2.0 * c * b;
        p = s * r;
        d[i + 1] = g + p;
        g = c * r - b;
        f = z[i + 1];
        z[i + 1] = s * z[i] + c * f;
        z[i] = c * z[i] - s * f;
      }
      if (r == 0.0 && i >= l) continue;
      d[l] -= p;
      e[l] = g;
      e[m] = 0.0;
    } while (m != l);
  }
}

double eval_monic(const Eigen::VectorXd& alpha, const Eigen::VectorXd& beta,
                  int k, double x) {
  if (k == 0) return 1.0;
  double pm1 = 1.0;
  double p = x - alpha[0];
  for (int j = 1; j < k; ++j) {
    const double pn = (x - alpha[j]) * p - beta[j - 1] * pm1;
    pm1 = p;
    p = pn;
  }
  return p;
}

}  // namespace

RecurrenceCoeffs hermite_coeffs(int n) {
  if (n < 1) throw std::invalid_argument("hermite_coeffs: n must be >= 1");
  RecurrenceCoeffs rc;
  rc.alpha = Eigen::VectorXd::Zero(n);
  rc.beta = Eigen::VectorXd::LinSpaced(std::max(n - 1, 0), 1.0, n - 1.0);
  rc.lead = Eigen::VectorXd::Ones(n + 1);
  rc.mass = kSqrt2Pi;
  return rc;
}

RecurrenceCoeffs legendre_coeffs(int n) {
  if (n < 1) throw std::invalid_argument("legendre_coeffs: n must be >= 1");
  RecurrenceCoeffs rc;
  rc.alpha = Eigen::VectorXd::Zero(n);
  rc.beta.resize(std::max(n - 1, 0));
  for (int k = 1; k < n; ++k) {
    rc.beta[k - 1] = static_cast<double>(k) * k / (4.0 * k * k - 1.0);
  }
  rc.lead.resize(n + 1);
  rc.lead[0] = 1.0;
  for (int k = 0; k < n; ++k) {
    rc.lead[k + 1] = rc.lead[k] * (2.0 * k + 1.0) / (k + 1.0);
  }
  rc.mass = 2.0;
  return rc;
}

RecurrenceCoeffs stieltjes_coeffs(const InnerProduct& inner_product, int n) {
  if (n < 1) throw std::invalid_argument("stieltjes_coeffs: n must be >= 1");
  RecurrenceCoeffs rc;
  rc.alpha = Eigen::VectorXd::Zero(n);
  rc.beta = Eigen::VectorXd::Zero(std::max(n - 1, 0));
  rc.lead = Eigen::VectorXd::Ones(n + 1);

  auto poly = [&rc](int k) {
    return [&rc, k](double x) { return eval_monic(rc.alpha, rc.beta, k, x); };
  };
  auto xpoly = [&rc](int k) {
    return
        [&rc, k](double x) { return x * eval_monic(rc.alpha, rc.beta, k, x); };
  };

  double norm_prev = inner_product(poly(0), poly(0));  // <1|1> = mu0
  rc.mass = norm_prev;
  if (!(norm_prev > 0.0)) {
    throw std::runtime_error("stieltjes_coeffs: measure has non-positive mass");
  }
  rc.alpha[0] = inner_product(xpoly(0), poly(0)) / norm_prev;
  for (int k = 1; k < n; ++k) {
    const double norm_k = inner_product(poly(k), poly(k));
    const double beta_k = norm_k / norm_prev;
    if (!(beta_k > 0.0)) {
      throw std::runtime_error(
          "stieltjes_coeffs: measure not positive definite at order " +
          std::to_string(k));
    }
    rc.beta[k - 1] = beta_k;
    rc.alpha[k] = inner_product(xpoly(k), poly(k)) / norm_k;
    norm_prev = norm_k;
  }
  return rc;
}

QuadratureRule golub_welsch(const RecurrenceCoeffs& coeffs, int n) {
  if (n < 1) throw std::invalid_argument("golub_welsch: n must be >= 1");
  if (n > coeffs.order()) {
    throw std::invalid_argument("golub_welsch: coefficients only valid to order " +
                                std::to_string(coeffs.order()));
  }
  Eigen::VectorXd d = coeffs.alpha.head(n);
  Eigen::VectorXd e = Eigen::VectorXd::Zero(n);
  for (int i = 0; i + 1 < n; ++i) {
    if (!(coeffs.beta[i] > 0.0)) {
      throw std::runtime_error("golub_welsch: non-positive beta coefficient");
    }
    e[i] = std::sqrt(coeffs.beta[i]);
  }
  Eigen::VectorXd z = Eigen::VectorXd::Zero(n);
  z[0] = 1.0;
  ql_implicit_shift(d, e, z);

  std::vector<int> idx(static_cast<std::size_t>(n));
  std::iota(idx.begin(), idx.end(), 0);
  std::sort(idx.begin(), idx.end(), [&d](int a, int b) { return d[a] < d[b]; });

  QuadratureRule rule;
  rule.nodes.resize(n);
  rule.weights.resize(n);
  rule.mass = coeffs.mass;
  for (int i = 0; i < n; ++i) {
    rule.nodes[i] = d[idx[static_cast<std::size_t>(i)]];
    rule.weights[i] =
        coeffs.mass * z[idx[static_cast<std::size_t>(i)]] *
        z[idx[static_cast<std::size_t>(i)]];
  }
  return rule;
}

double integrate(const QuadratureRule& rule,
                 const std::function<double(double)>& fn) {
  double total = 0.0;
  for (int i = 0; i < rule.nodes.size(); ++i) {
    total += rule.weights[i] * fn(rule.nodes[i]);
  }
  return total;
}

double eval_orthopoly(const RecurrenceCoeffs& coeffs, int k, double x) {
  if (k < 0 || k > coeffs.order()) {
    throw std::invalid_argument("eval_orthopoly: k exceeds stored order");
  }
  const double monic = eval_monic(coeffs.alpha, coeffs.beta, k, x);
  return k < coeffs.lead.size() ? coeffs.lead[k] * monic : monic;
}

QuadratureRule gauss_hermite(int n) { return golub_welsch(hermite_coeffs(n), n); }

QuadratureRule gauss_legendre(int n) {
  return golub_welsch(legendre_coeffs(n), n);
}

}  // namespace cfx
