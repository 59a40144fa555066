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

#ifndef CFX_POTENTIAL_HPP_
#define CFX_POTENTIAL_HPP_

#include <limits>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "cfx/lambert_w.hpp"

namespace cfx {

/// Exponential-polynomial potential family over scalar model outputs.
/// AEP+ rewards outputs above the center, AEP- below, SEP both sides.
/// All operations in this header are pure functions of their arguments.
enum class PotentialKind { aep_plus, aep_minus, sep };

std::string to_string(PotentialKind kind);
PotentialKind potential_kind_from_string(const std::string& name);

/// An EP potential: rho(y) = [z]^2 exp(-[z]^2) with z = (y - center)/width,
/// one-sided rectification selected by `kind`. The maximum value e^{-1} is
/// attained at y = center +- width.
struct PotentialSpec {
  PotentialKind kind = PotentialKind::sep;
  double center = 0.0;  ///< the query output the potential is anchored to
  double width = 1.0;   ///< strictly positive scale of the sweet spot

  PotentialSpec() = default;
  PotentialSpec(PotentialKind k, double c, double w)
      : kind(k), center(c), width(w) {
    if (!(width > 0.0)) {
      throw std::invalid_argument("PotentialSpec: width must be positive");
    }
  }
};

namespace detail {

/// z^2 exp(-z^2), evaluated so that extreme z underflows to 0 instead of
/// producing inf * 0.
template <typename Scalar>
Scalar ep_kernel(Scalar z) {
  const Scalar z2 = z * z;
  if (z2 > Scalar(708)) return Scalar(0);
  return z2 * std::exp(-z2);
}

/// d/dz of z^2 exp(-z^2).
template <typename Scalar>
Scalar ep_kernel_grad(Scalar z) {
  const Scalar z2 = z * z;
  if (z2 > Scalar(708)) return Scalar(0);
  return Scalar(2) * z * (Scalar(1) - z2) * std::exp(-z2);
}

}  // namespace detail

/// Potential value at a raw model output y. Always in [0, e^{-1}].
double ep_value(const PotentialSpec& spec, double y);

/// d rho / d y. Zero on the rectified side of the AEP potentials.
double ep_grad(const PotentialSpec& spec, double y);

/// The set {y : rho(y) >= level} as disjoint sorted closed intervals in
/// output units. SEP yields two intervals for level < e^{-1}, AEP one;
/// at level = e^{-1} the intervals degenerate to points.
struct SuperlevelSet {
  struct Interval {
    double lo = 0.0;
    double hi = 0.0;
  };
  std::vector<Interval> intervals;
  double level = 0.0;

  bool contains(double y) const {
    for (const auto& iv : intervals) {
      if (y >= iv.lo && y <= iv.hi) return true;
    }
    return false;
  }
};

/// Roots of the kernel level equation in z-units: r0 = sqrt(-W0(-level)),
/// rm1 = sqrt(-W-1(-level)), with 0 < r0 <= 1 <= rm1. Levels below 1e-300
/// degenerate to the 0-superlevel pair (0, +inf).
std::pair<double, double> superlevel_z_roots(double level);

/// Superlevel intervals of the potential at `level` in (0, e^{-1}].
SuperlevelSet superlevel_roots(const PotentialSpec& spec, double level);

/// Membership circuit for the epsilon-optimal target set:
/// true iff rho(y) >= (1 - eps) * rho_star.
bool target_membership(const PotentialSpec& spec, double rho_star, double eps,
                       double y);

}  // namespace cfx

#endif  // CFX_POTENTIAL_HPP_
