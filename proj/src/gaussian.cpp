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

#include "cfx/gaussian.hpp"

#include <vector>

namespace cfx {
namespace {

// Values of the antiderivatives M_0..M_deg at z (M_j' = z^j phi).
void moment_antiderivatives(int deg, double z, std::vector<double>& m) {
  m.assign(static_cast<std::size_t>(deg) + 1, 0.0);
  // Beyond |z| = 40 the density underflows to exactly 0 and the CDF
  // saturates in double, so the asymptotic values are bit-exact; taking
  // this branch also keeps z^{j-1} from overflowing for huge finite z.
  if (!std::isfinite(z) || std::abs(z) >= 40.0) {
    const double step = z > 0.0 ? 1.0 : 0.0;
    m[0] = step;
    for (int j = 2; j <= deg; j += 2) m[j] = (j - 1) * m[j - 2];
    return;  // odd antiderivatives vanish at both tails
  }
  const double pdf = norm_pdf(z);
  m[0] = norm_cdf(z);
  if (deg >= 1) m[1] = -pdf;
  double zpow = 1.0;  // z^{j-1}
  for (int j = 2; j <= deg; ++j) {
    zpow *= z;
    m[j] = -zpow * pdf + (j - 1) * m[j - 2];
  }
}

}  // namespace

double gauss_poly_integral(std::span<const double> coeffs, double lo,
                           double hi) {
  const int deg = static_cast<int>(coeffs.size()) - 1;
  if (deg < 0 || hi <= lo) return 0.0;
  std::vector<double> mhi, mlo;
  moment_antiderivatives(deg, hi, mhi);
  moment_antiderivatives(deg, lo, mlo);
  double total = 0.0;
  for (int j = 0; j <= deg; ++j) total += coeffs[j] * (mhi[j] - mlo[j]);
  return total;
}

}  // namespace cfx
