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

#ifndef CFX_SEARCH_HPP_
#define CFX_SEARCH_HPP_

#include <Eigen/Core>
#include <cstdint>
#include <functional>
#include <optional>
#include <stdexcept>
#include <vector>

#include "cfx/potential.hpp"
#include "cfx/surrogate.hpp"

namespace cfx {

/// Raised when the constraint set admits no feasible point.
struct InfeasibleError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Halfspace normal . x <= offset.
struct LinearConstraint {
  Eigen::VectorXd normal;
  double offset = 0.0;
};

/// Per-dimension actionability: a feature may be frozen to move only one
/// way relative to the query.
enum class SignConstraint { free_dir, increase_only, decrease_only };

/// A counterfactual search instance: black-box model, query point, box
/// domain with optional linear constraints, and the structural constraints
/// (integrality, sparsity, actionability) on candidate points.
struct SearchProblem {
  std::function<double(const Eigen::VectorXd&)> model;
  /// Analytic model gradient; when absent, central finite differences with
  /// step 1e-6 * box scale are used where a gradient is required.
  std::function<Eigen::VectorXd(const Eigen::VectorXd&)> model_gradient;
  Eigen::VectorXd query;
  Eigen::VectorXd lower;
  Eigen::VectorXd upper;
  std::vector<LinearConstraint> linear;
  std::vector<int> integer_dims;
  std::optional<int> l0_bound;
  std::vector<SignConstraint> sign;  // empty means all free

  int dim() const { return static_cast<int>(query.size()); }
  /// Throws std::invalid_argument when the query is not strictly inside
  /// the box, shapes disagree, or the l0 bound exceeds the dimension.
  void validate() const;

  /// Box bounds with sign constraints folded in (they are exact box
  /// tightenings around the query).
  Eigen::VectorXd effective_lower() const;
  Eigen::VectorXd effective_upper() const;

  bool is_integer_dim(int j) const;
  /// Round integer dimensions to the nearest integer inside the effective
  /// box. When linear constraints are present the nearest feasible
  /// floor/ceil combination is selected instead.
  Eigen::VectorXd snap_integers(const Eigen::VectorXd& x) const;
  /// Euclidean projection onto the effective box intersected with the
  /// linear constraints (Dykstra's alternating projections).
  Eigen::VectorXd project(const Eigen::VectorXd& x) const;
  /// Feasibility check for box, linear, sign, integer and l0 constraints.
  bool feasible(const Eigen::VectorXd& x, double tol = 1e-9) const;

  double eval_gradient_step() const;
  Eigen::VectorXd gradient_at(const Eigen::VectorXd& x) const;
};

struct LocalOptParams {
  double step = 0.1;    ///< eta
  double tol = 1e-6;    ///< delta
  int max_iters = 5000;

  LocalOptParams() = default;
  LocalOptParams(double eta, double delta, int iters)
      : step(eta), tol(delta), max_iters(iters) {
    if (!(step > 0.0) || !(tol > 0.0) || iters <= 0) {
      throw std::invalid_argument("LocalOptParams: step, tol, iters positive");
    }
  }
};

struct TraceRecord {
  Eigen::VectorXd x;
  double fx = 0.0;
  double rho = 0.0;
  double incumbent = 0.0;    ///< rho*_n including this sample
  double acquisition = 0.0;  ///< acquisition value at the selected point
  double wall_time_s = 0.0;  ///< not serialized; runs must be reproducible
};

struct Trace {
  std::vector<TraceRecord> records;
  Eigen::VectorXd best_x;
  double best_f = 0.0;
  double best_rho = 0.0;
  double epsilon = 0.0;
  /// Best known rho-star: an external oracle value when supplied, else the
  /// best observed potential (always an estimate; global optimality is not
  /// certifiable).
  double rho_star_estimate = 0.0;
  bool rho_star_is_oracle = false;
  bool target_reached = false;
  bool budget_exhausted = false;
};

struct BoOptions {
  int initial_design = 5;
  double epsilon = 0.05;
  std::optional<double> rho_star_hint;
  int acquisition_starts = 32;
};

/// Bayesian counterfactual search: the surrogate models f (never the
/// composition), each iteration maximizes the closed-form expected
/// counterfactual improvement over the constrained domain, evaluates the
/// true model and refits with re-estimated hyperparameters. The loop is
/// sequential (each step depends on the refit posterior); the engine
/// treats the supplied model as pure.
Trace run_bayes_cfx(const SearchProblem& problem,
                    const PotentialSpec& potential, int budget,
                    std::uint64_t seed, const BoOptions& options = {});

/// Baseline: the surrogate is fit on the composed observations rho(f(x_i))
/// and classic expected improvement is maximized.
Trace run_bayes_naive(const SearchProblem& problem,
                      const PotentialSpec& potential, int budget,
                      std::uint64_t seed, const BoOptions& options = {});

/// Baseline: uniform sampling within the constraint set.
Trace run_random(const SearchProblem& problem, const PotentialSpec& potential,
                 int budget, std::uint64_t seed,
                 const BoOptions& options = {});

/// Several potentials searched in one pass over a single shared sample
/// set; each iteration solves every potential's acquisition and evaluates
/// the deduplicated union of proposals. Total model evaluations <= budget.
std::vector<Trace> run_multi_cfx(const SearchProblem& problem,
                                 const std::vector<PotentialSpec>& potentials,
                                 int budget, std::uint64_t seed,
                                 const BoOptions& options = {});

struct LocalOptResult {
  Eigen::VectorXd x;
  bool converged = false;
  int iterations = 0;
};

/// Projected-gradient recurrence x <- Proj[x + eta grad rho(f(x))] run to
/// delta-stationarity: ||c - Proj[c + eta grad rho(f(c))]|| <= delta.
LocalOptResult projected_gradient_search(const SearchProblem& problem,
                                         const PotentialSpec& potential,
                                         const Eigen::VectorXd& x0,
                                         const LocalOptParams& params);

struct AcquisitionOptimum {
  Eigen::VectorXd x;
  double value = 0.0;
};

/// Approximate argmax of EI-CFX over the constrained domain by multi-start
/// projected gradient ascent (32 Latin-hypercube starts plus the current
/// best sample). l0 bounds are enforced by exact enumeration of coordinate
/// subsets with the remaining coordinates frozen at the query.
AcquisitionOptimum optimize_acquisition(const GpPosterior& posterior,
                                        const PotentialSpec& potential,
                                        double incumbent,
                                        const SearchProblem& problem,
                                        std::uint64_t seed,
                                        const BoOptions& options = {});

}  // namespace cfx

#endif  // CFX_SEARCH_HPP_
