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

#ifndef CFX_QUADRATURE_HPP_
#define CFX_QUADRATURE_HPP_

#include <Eigen/Core>
#include <functional>

namespace cfx {

/// Three-term recurrence of a family of orthogonal polynomials in monic
/// form, p_{k+1}(x) = (x - alpha_k) p_k(x) - beta_k p_{k-1}(x).
///
/// alpha holds n diagonal terms; beta holds the n-1 strictly positive
/// squared off-diagonal terms beta_1..beta_{n-1} of the symmetrized Jacobi
/// matrix (its off-diagonals are sqrt(beta_k)). `lead` carries the leading
/// coefficients that map the monic polynomials to the family's conventional
/// normalization (all ones for monic families such as probabilist Hermite).
struct RecurrenceCoeffs {
  Eigen::VectorXd alpha;
  Eigen::VectorXd beta;
  Eigen::VectorXd lead;
  double mass = 0.0;  ///< mu0, the total measure integral

  int order() const { return static_cast<int>(alpha.size()); }
};

/// Nodes x_i (ascending), strictly positive weights w_i and total mass mu0
/// of a Gaussian quadrature rule: integral phi(x) f(x) dx ~ sum w_i f(x_i).
/// Immutable after construction and safely shareable across threads.
struct QuadratureRule {
  Eigen::VectorXd nodes;
  Eigen::VectorXd weights;
  double mass = 0.0;
};

/// Probabilist's Hermite recurrence for weight exp(-x^2/2) on R:
/// alpha_k = 0, beta_k = k, mu0 = sqrt(2 pi).
RecurrenceCoeffs hermite_coeffs(int n);

/// Legendre recurrence for weight 1 on [-1, 1]: alpha_k = 0,
/// beta_k = k^2 / (4k^2 - 1), mu0 = 2. `lead` restores P_n(1) = 1.
RecurrenceCoeffs legendre_coeffs(int n);

/// A numerically evaluated positive-definite inner product on functions,
/// e.g. a fine fixed-grid discretization of integral f g phi dx.
using InnerProduct = std::function<double(const std::function<double(double)>&,
                                          const std::function<double(double)>&)>;

/// Stieltjes / Gram-Schmidt construction of the monic recurrence for an
/// arbitrary inner product. Throws std::runtime_error if a computed beta_k
/// is not strictly positive (measure not positive definite at order k).
RecurrenceCoeffs stieltjes_coeffs(const InnerProduct& inner_product, int n);

/// Golub-Welsch: nodes are the eigenvalues of the n x n Jacobi matrix,
/// weight_i = mu0 * (first component of the i-th normalized eigenvector)^2.
/// The rule integrates polynomials of degree <= 2n-1 exactly.
QuadratureRule golub_welsch(const RecurrenceCoeffs& coeffs, int n);

/// sum_i w_i fn(x_i).
double integrate(const QuadratureRule& rule,
                 const std::function<double(double)>& fn);

/// Value of the k-th orthogonal polynomial (conventional normalization) by
/// forward recurrence.
double eval_orthopoly(const RecurrenceCoeffs& coeffs, int k, double x);

/// Convenience constructors for the two built-in families.
QuadratureRule gauss_hermite(int n);
QuadratureRule gauss_legendre(int n);

}  // namespace cfx

#endif  // CFX_QUADRATURE_HPP_
