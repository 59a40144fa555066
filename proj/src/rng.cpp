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

#include "cfx/rng.hpp"

#include <numeric>

namespace cfx {

std::vector<Eigen::VectorXd> latin_hypercube(Rng& rng, int count,
                                             const Eigen::VectorXd& lower,
                                             const Eigen::VectorXd& upper) {
  const int dim = static_cast<int>(lower.size());
  std::vector<Eigen::VectorXd> points(static_cast<std::size_t>(count),
                                      Eigen::VectorXd::Zero(dim));
  std::vector<int> strata(static_cast<std::size_t>(count));
  for (int j = 0; j < dim; ++j) {
    std::iota(strata.begin(), strata.end(), 0);
    rng.shuffle(strata);
    for (int i = 0; i < count; ++i) {
      const double u = (strata[static_cast<std::size_t>(i)] + rng.uniform()) /
                       count;
      points[static_cast<std::size_t>(i)][j] =
          lower[j] + (upper[j] - lower[j]) * u;
    }
  }
  return points;
}

}  // namespace cfx
