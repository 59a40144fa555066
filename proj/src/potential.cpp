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

#include "cfx/potential.hpp"

#include <algorithm>
#include <cmath>

namespace cfx {

std::string to_string(PotentialKind kind) {
  switch (kind) {
    case PotentialKind::aep_plus:
      return "aep_plus";
    case PotentialKind::aep_minus:
      return "aep_minus";
    case PotentialKind::sep:
      return "sep";
  }
  return "sep";
}

PotentialKind potential_kind_from_string(const std::string& name) {
  if (name == "aep_plus" || name == "aep+") return PotentialKind::aep_plus;
  if (name == "aep_minus" || name == "aep-") return PotentialKind::aep_minus;
  if (name == "sep") return PotentialKind::sep;
  throw std::invalid_argument("unknown potential kind: " + name);
}

double ep_value(const PotentialSpec& spec, double y) {
  const double z = (y - spec.center) / spec.width;
  switch (spec.kind) {
    case PotentialKind::aep_plus:
      return z > 0.0 ? detail::ep_kernel(z) : 0.0;
    case PotentialKind::aep_minus:
      return z < 0.0 ? detail::ep_kernel(-z) : 0.0;
    case PotentialKind::sep:
      // [z]+^2 and [z]-^2 add up to z^2, so the symmetric potential is the
      // plain kernel of z.
      return detail::ep_kernel(z);
  }
  return 0.0;
}

double ep_grad(const PotentialSpec& spec, double y) {
  const double z = (y - spec.center) / spec.width;
  switch (spec.kind) {
    case PotentialKind::aep_plus:
      return z > 0.0 ? detail::ep_kernel_grad(z) / spec.width : 0.0;
    case PotentialKind::aep_minus:
      return z < 0.0 ? -detail::ep_kernel_grad(-z) / spec.width : 0.0;
    case PotentialKind::sep:
      return detail::ep_kernel_grad(z) / spec.width;
  }
  return 0.0;
}

std::pair<double, double> superlevel_z_roots(double level) {
  if (level > kExpMinusOne + 1e-15) {
    throw std::domain_error("superlevel_z_roots: level above e^{-1}");
  }
  level = std::min(level, kExpMinusOne);
  if (level < 1e-300) {
    // 0-superlevel: W0(-0) = 0 and W-1 diverges, so the band spans the
    // whole half line.
    return {0.0, std::numeric_limits<double>::infinity()};
  }
  const double r0 = std::sqrt(-lambert_w(WBranch::k0, -level));
  const double rm1 = std::sqrt(-lambert_w(WBranch::km1, -level));
  return {std::min(r0, rm1), std::max(r0, rm1)};
}

SuperlevelSet superlevel_roots(const PotentialSpec& spec, double level) {
  if (!(level > 0.0) || level > kExpMinusOne + 1e-15) {
    throw std::domain_error("superlevel_roots: level must be in (0, e^{-1}]");
  }
  const auto [r0, rm1] = superlevel_z_roots(level);
  SuperlevelSet out;
  out.level = std::min(level, kExpMinusOne);
  const double c = spec.center;
  const double w = spec.width;
  if (spec.kind == PotentialKind::aep_minus || spec.kind == PotentialKind::sep) {
    out.intervals.push_back({c - w * rm1, c - w * r0});
  }
  if (spec.kind == PotentialKind::aep_plus || spec.kind == PotentialKind::sep) {
    out.intervals.push_back({c + w * r0, c + w * rm1});
  }
  return out;
}

bool target_membership(const PotentialSpec& spec, double rho_star, double eps,
                       double y) {
  return ep_value(spec, y) >= (1.0 - eps) * rho_star;
}

}  // namespace cfx
