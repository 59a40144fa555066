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

#ifndef CFX_LAMBERT_W_HPP_
#define CFX_LAMBERT_W_HPP_

#include <cmath>
#include <limits>
#include <stdexcept>

namespace cfx {

/// Real branches of Lambert's W function, w * exp(w) = c.
enum class WBranch {
  k0,   ///< principal branch, w >= -1, defined for c >= -1/e
  km1,  ///< lower branch, w <= -1, defined for -1/e <= c < 0
};

/// exp(-1), the branch-point abscissa magnitude and the EP potential maximum.
inline constexpr double kExpMinusOne = 0.36787944117144232160;

namespace detail {

/// Series about the branch point c = -1/e in p = +-sqrt(2(e*c + 1)).
/// Coefficients from the standard expansion W = -1 + p - p^2/3 + ...
template <typename Scalar>
constexpr Scalar lambert_w_branch_series(Scalar p) {
  constexpr Scalar m2 = Scalar(-1) / Scalar(3);
  constexpr Scalar m3 = Scalar(11) / Scalar(72);
  constexpr Scalar m4 = Scalar(-43) / Scalar(540);
  constexpr Scalar m5 = Scalar(769) / Scalar(17280);
  constexpr Scalar m6 = Scalar(-221) / Scalar(8505);
  constexpr Scalar m7 = Scalar(680863) / Scalar(43545600);
  return Scalar(-1) +
         p * (Scalar(1) +
              p * (m2 + p * (m3 + p * (m4 + p * (m5 + p * (m6 + p * m7))))));
}

/// Halley refinement of w*exp(w) = c. Quadratic-plus convergence from any
/// reasonable initial guess; the step degenerates at w = -1 where the
/// derivative vanishes, so callers near the branch point use the series.
template <typename Scalar>
Scalar lambert_w_halley(Scalar w, Scalar c) {
  for (int iter = 0; iter < 64; ++iter) {
    const Scalar ew = std::exp(w);
    const Scalar f = w * ew - c;
    const Scalar wp1 = w + Scalar(1);
    if (std::abs(wp1) < Scalar(1e-12)) break;
    const Scalar denom = ew * wp1 - (w + Scalar(2)) * f / (Scalar(2) * wp1);
    const Scalar step = f / denom;
    w -= step;
    if (std::abs(step) <= Scalar(4) * std::numeric_limits<Scalar>::epsilon() *
                              (Scalar(1) + std::abs(w))) {
      break;
    }
  }
  return w;
}

/// Bisection fallback for the lower branch on [lo, -1]; used only if the
/// Halley iterate escapes the branch. f(w) = w e^w - c is positive at the
/// far-left end and non-positive at -1 for any c in [-1/e, 0).
template <typename Scalar>
Scalar lambert_wm1_bisect(Scalar c) {
  Scalar lo = Scalar(-700), hi = Scalar(-1);
  for (int iter = 0; iter < 200; ++iter) {
    const Scalar mid = Scalar(0.5) * (lo + hi);
    const Scalar f = mid * std::exp(mid) - c;
    (f > Scalar(0) ? lo : hi) = mid;
  }
  return Scalar(0.5) * (lo + hi);
}

}  // namespace detail

/// Lambert W on the requested real branch. Throws std::domain_error when c
/// lies outside the branch's real range. Accuracy: |w e^w - c| within
/// ~1e-13 of c's scale.
template <typename Scalar>
Scalar lambert_w(WBranch branch, Scalar c) {
  constexpr Scalar e_inv = Scalar(kExpMinusOne);
  // Tolerate a few ulp of slack below the cut from callers that compute
  // -exp(-1) in floating point.
  if (c < -e_inv) {
    if (c > -e_inv - Scalar(1e-14)) {
      c = -e_inv;
    } else {
      throw std::domain_error("lambert_w: c below the branch point -1/e");
    }
  }

  const Scalar q = Scalar(2) * (std::exp(Scalar(1)) * c + Scalar(1));
  const Scalar p = std::sqrt(std::max(q, Scalar(0)));

  if (branch == WBranch::k0) {
    if (c == Scalar(0)) return Scalar(0);
    if (p < Scalar(0.01)) {
      // Within |c + 1/e| ~ 2e-5 of the cut the series alone already meets
      // tolerance and Halley's denominator is ill-conditioned.
      const Scalar w = detail::lambert_w_branch_series(p);
      return p < Scalar(1e-4) ? w : detail::lambert_w_halley(w, c);
    }
    Scalar w;
    if (c < Scalar(1)) {
      // Global rational initial guess (error < 1e-2 over [-1/e, 1]).
      const Scalar s2 = std::sqrt(Scalar(2));
      const Scalar e1 = std::exp(Scalar(1));
      const Scalar n2 =
          Scalar(3) * s2 + Scalar(6) -
          (((Scalar(2237) + Scalar(1457) * s2) * e1 - Scalar(4108) * s2 -
            Scalar(5764)) *
           p) /
              ((Scalar(215) + Scalar(199) * s2) * e1 - Scalar(430) * s2 -
               Scalar(796));
      const Scalar n1 = (Scalar(1) - Scalar(1) / s2) * (n2 + s2);
      w = Scalar(-1) + p / (Scalar(1) + n1 * p / (n2 + p));
    } else {
      w = std::log(Scalar(6) * c /
                   (Scalar(5) *
                    std::log(Scalar(12) / Scalar(5) *
                             (c / std::log(Scalar(1) + Scalar(12) * c /
                                                           Scalar(5))))));
    }
    return detail::lambert_w_halley(w, c);
  }

  // Lower branch: real only on [-1/e, 0).
  if (c >= Scalar(0)) {
    throw std::domain_error("lambert_w: K-1 branch requires -1/e <= c < 0");
  }
  if (p < Scalar(0.01)) {
    const Scalar w = detail::lambert_w_branch_series(-p);
    return p < Scalar(1e-4) ? w : detail::lambert_w_halley(w, c);
  }
  Scalar w;
  if (c < Scalar(-0.27)) {
    w = detail::lambert_w_branch_series(-p);
  } else {
    const Scalar l1 = std::log(-c);
    w = l1 - std::log(-l1);
  }
  w = detail::lambert_w_halley(w, c);
  if (!(w <= Scalar(-1))) {
    // Halley escaped into the principal branch; recover by bisection.
    w = detail::lambert_w_halley(detail::lambert_wm1_bisect(c), c);
  }
  return w;
}

}  // namespace cfx

#endif  // CFX_LAMBERT_W_HPP_
