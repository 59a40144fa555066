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

#ifndef CFX_GAUSSIAN_HPP_
#define CFX_GAUSSIAN_HPP_

#include <cmath>
#include <span>

namespace cfx {

inline constexpr double kSqrt2Pi = 2.5066282746310005024;

/// Standard normal density.
inline double norm_pdf(double z) {
  if (std::isinf(z)) return 0.0;
  return std::exp(-0.5 * z * z) / kSqrt2Pi;
}

/// Standard normal CDF via the complementary error function; accurate in
/// both tails.
inline double norm_cdf(double z) {
  if (std::isinf(z)) return z > 0.0 ? 1.0 : 0.0;
  return 0.5 * std::erfc(-z * 0.70710678118654752440);
}

/// Integral of p(z) * phi(z) over [lo, hi] for p given by power-basis
/// coefficients (coeffs[j] multiplies z^j). Limits may be infinite.
///
/// Uses the antiderivative recursion M_0 = Phi, M_1 = -phi,
/// M_j = -z^{j-1} phi(z) + (j-1) M_{j-2}.
double gauss_poly_integral(std::span<const double> coeffs, double lo,
                           double hi);

}  // namespace cfx

#endif  // CFX_GAUSSIAN_HPP_
