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

#include "cfx/search.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

#include "cfx/acquisition.hpp"
#include "cfx/rng.hpp"

namespace cfx {
namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

std::vector<std::vector<int>> combinations(int d, int k) {
  std::vector<std::vector<int>> result;
  std::vector<int> current;
  std::function<void(int)> recurse = [&](int next) {
    if (static_cast<int>(current.size()) == k) {
      result.push_back(current);
      return;
    }
    for (int j = next; j < d; ++j) {
      current.push_back(j);
      recurse(j + 1);
      current.pop_back();
    }
  };
  recurse(0);
  return result;
}

std::vector<int> all_dims(int d) {
  std::vector<int> dims(static_cast<std::size_t>(d));
  std::iota(dims.begin(), dims.end(), 0);
  return dims;
}

// Projection of the free coordinates onto box /\ halfspaces with the
// remaining coordinates held fixed (Dykstra's alternating projections;
// plain clamping when no linear constraints are active).
Eigen::VectorXd project_free(const SearchProblem& pb, Eigen::VectorXd x,
                             const std::vector<int>& free_dims) {
  const Eigen::VectorXd lo = pb.effective_lower();
  const Eigen::VectorXd hi = pb.effective_upper();
  auto clamp_box = [&](Eigen::VectorXd& v) {
    for (int j : free_dims) v[j] = std::clamp(v[j], lo[j], hi[j]);
  };
  if (pb.linear.empty()) {
    clamp_box(x);
    return x;
  }
  const std::size_t sets = pb.linear.size() + 1;
  std::vector<Eigen::VectorXd> corr(sets, Eigen::VectorXd::Zero(x.size()));
  for (int cycle = 0; cycle < 200; ++cycle) {
    const Eigen::VectorXd before = x;
    for (std::size_t s = 0; s < sets; ++s) {
      Eigen::VectorXd y = x + corr[s];
      if (s == 0) {
        clamp_box(y);
      } else {
        const LinearConstraint& lc = pb.linear[s - 1];
        double rhs = lc.offset;
        double sq = 0.0, dot = 0.0;
        for (int j = 0; j < x.size(); ++j) {
          const bool is_free =
              std::find(free_dims.begin(), free_dims.end(), j) !=
              free_dims.end();
          if (is_free) {
            sq += lc.normal[j] * lc.normal[j];
            dot += lc.normal[j] * y[j];
          } else {
            rhs -= lc.normal[j] * y[j];
          }
        }
        if (sq > 0.0 && dot > rhs) {
          const double shift = (dot - rhs) / sq;
          for (int j : free_dims) y[j] -= shift * lc.normal[j];
        }
      }
      corr[s] = x + corr[s] - y;
      x = y;
    }
    if ((x - before).cwiseAbs().maxCoeff() < 1e-13 * (1.0 + x.norm())) break;
  }
  return x;
}

struct Objective {
  std::function<double(const Eigen::VectorXd&)> value;
  std::function<Eigen::VectorXd(const Eigen::VectorXd&)> grad;
};

// Projected gradient ascent with backtracking, preconditioned by squared
// box widths so that steps are comparable across differently scaled
// dimensions. Deterministic.
std::pair<Eigen::VectorXd, double> ascend(const SearchProblem& pb,
                                          const Objective& obj,
                                          Eigen::VectorXd x,
                                          const std::vector<int>& free_dims) {
  const Eigen::VectorXd lo = pb.effective_lower();
  const Eigen::VectorXd hi = pb.effective_upper();
  double v = obj.value(x);
  double t = -1.0;
  for (int it = 0; it < 60; ++it) {
    const Eigen::VectorXd g = obj.grad(x);
    Eigen::VectorXd dir = Eigen::VectorXd::Zero(x.size());
    double rel = 0.0;
    for (int j : free_dims) {
      const double s = std::max(hi[j] - lo[j], 1e-12);
      dir[j] = g[j] * s * s;
      rel = std::max(rel, std::abs(dir[j]) / s);
    }
    if (rel < 1e-14) break;
    if (t <= 0.0) t = 0.1 / rel;
    bool accepted = false;
    for (int bt = 0; bt < 24; ++bt) {
      const Eigen::VectorXd cand = project_free(pb, x + t * dir, free_dims);
      const double vc = obj.value(cand);
      if (vc > v) {
        x = cand;
        v = vc;
        t *= 2.0;
        accepted = true;
        break;
      }
      t *= 0.25;
    }
    if (!accepted) break;
  }
  return {x, v};
}

// Multi-start maximization of an acquisition objective under the problem
// constraints: evaluate all starts, refine the most promising ones by
// projected gradient ascent; l0 bounds handled by subset enumeration.
AcquisitionOptimum maximize_acquisition(const SearchProblem& pb,
                                        const Objective& obj,
                                        const std::vector<Eigen::VectorXd>&
                                            starts) {
  const int d = pb.dim();
  std::vector<std::vector<int>> subsets;
  if (pb.l0_bound && *pb.l0_bound < d) {
    subsets = combinations(d, std::max(*pb.l0_bound, 0));
    if (subsets.empty()) subsets.push_back({});
  } else {
    subsets.push_back(all_dims(d));
  }

  AcquisitionOptimum best;
  bool have_best = false;
  for (const std::vector<int>& free_dims : subsets) {
    struct Cand {
      Eigen::VectorXd x;
      double v;
      int idx;
    };
    std::vector<Cand> cands;
    cands.reserve(starts.size());
    for (std::size_t i = 0; i < starts.size(); ++i) {
      Eigen::VectorXd x = pb.query;
      for (int j : free_dims) x[j] = starts[i][j];
      x = project_free(pb, x, free_dims);
      cands.push_back({x, obj.value(x), static_cast<int>(i)});
    }
    std::stable_sort(cands.begin(), cands.end(),
                     [](const Cand& a, const Cand& b) {
                       if (a.v != b.v) return a.v > b.v;
                       return a.idx < b.idx;
                     });
    const std::size_t refine = std::min<std::size_t>(cands.size(), 10);
    for (std::size_t i = 0; i < cands.size(); ++i) {
      Eigen::VectorXd x = cands[i].x;
      double v = cands[i].v;
      if (i < refine && !free_dims.empty()) {
        std::tie(x, v) = ascend(pb, obj, x, free_dims);
      }
      if (!have_best || v > best.value) {
        best = {x, v};
        have_best = true;
      }
    }
  }
  if (!have_best) best = {pb.query, 0.0};
  return best;
}

// A uniformly drawn feasible point: uniform in the effective box with a
// random l0 subset (others frozen at the query), integers snapped, linear
// constraints handled by rejection.
Eigen::VectorXd feasible_random(const SearchProblem& pb, Rng& rng) {
  const Eigen::VectorXd lo = pb.effective_lower();
  const Eigen::VectorXd hi = pb.effective_upper();
  const int d = pb.dim();
  for (int attempt = 0; attempt < 2000; ++attempt) {
    std::vector<int> dims = all_dims(d);
    if (pb.l0_bound && *pb.l0_bound < d) {
      rng.shuffle(dims);
      dims.resize(static_cast<std::size_t>(std::max(*pb.l0_bound, 0)));
      std::sort(dims.begin(), dims.end());
    }
    Eigen::VectorXd x = pb.query;
    for (int j : dims) x[j] = rng.uniform(lo[j], hi[j]);
    x = pb.snap_integers(x);
    if (pb.feasible(x)) return x;
  }
  throw InfeasibleError(
      "search: could not draw a feasible point (empty constraint set?)");
}

double best_potential(const std::vector<double>& outputs,
                      const PotentialSpec& pot) {
  double best = 0.0;
  for (double f : outputs) best = std::max(best, ep_value(pot, f));
  return best;
}

void finalize_trace(Trace& trace, const PotentialSpec& potential,
                    const BoOptions& options) {
  trace.epsilon = options.epsilon;
  if (trace.records.empty()) return;
  std::size_t best = 0;
  for (std::size_t i = 1; i < trace.records.size(); ++i) {
    if (trace.records[i].rho > trace.records[best].rho) best = i;
  }
  trace.best_x = trace.records[best].x;
  trace.best_f = trace.records[best].fx;
  trace.best_rho = trace.records[best].rho;
  if (options.rho_star_hint) {
    trace.rho_star_estimate = *options.rho_star_hint;
    trace.rho_star_is_oracle = true;
  } else {
    trace.rho_star_estimate = trace.best_rho;
    trace.rho_star_is_oracle = false;
  }
  trace.target_reached =
      trace.rho_star_estimate > 0.0 &&
      target_membership(potential, trace.rho_star_estimate, options.epsilon,
                        trace.best_f);
  trace.budget_exhausted = !trace.target_reached;
}

enum class SurrogateMode { direct, composed };

std::vector<Trace> run_bo_core(const SearchProblem& problem,
                               const std::vector<PotentialSpec>& potentials,
                               int budget, std::uint64_t seed,
                               const BoOptions& options, SurrogateMode mode) {
  problem.validate();
  if (potentials.empty()) {
    throw std::invalid_argument("run: need at least one potential");
  }
  if (mode == SurrogateMode::composed && potentials.size() != 1) {
    throw std::invalid_argument("naive search supports a single potential");
  }
  if (budget < 1) throw std::invalid_argument("run: budget must be >= 1");

  const auto t0 = Clock::now();
  Rng rng(seed);
  const int d = problem.dim();
  const Eigen::VectorXd lo = problem.effective_lower();
  const Eigen::VectorXd hi = problem.effective_upper();
  const std::size_t npot = potentials.size();

  std::vector<Trace> traces(npot);
  SampleSet data;
  std::vector<double> raw_outputs;  // f(x_i) in evaluation order

  auto record_sample = [&](const Eigen::VectorXd& x,
                           const std::vector<double>& acq) {
    const double fx = problem.model(x);
    data.add(x, fx);
    raw_outputs.push_back(fx);
    const double now = seconds_since(t0);
    for (std::size_t t = 0; t < npot; ++t) {
      TraceRecord rec;
      rec.x = x;
      rec.fx = fx;
      rec.rho = ep_value(potentials[t], fx);
      const double prev = traces[t].records.empty()
                              ? 0.0
                              : traces[t].records.back().incumbent;
      rec.incumbent = std::max(prev, rec.rho);
      rec.acquisition = acq.empty() ? 0.0 : acq[t];
      rec.wall_time_s = now;
      traces[t].records.push_back(std::move(rec));
    }
  };

  // Initial design: Latin hypercube restricted to the constraint set.
  const int design_size = std::min(options.initial_design, budget);
  {
    std::vector<Eigen::VectorXd> design =
        latin_hypercube(rng, design_size, lo, hi);
    for (Eigen::VectorXd& x : design) {
      std::vector<int> dims = all_dims(d);
      if (problem.l0_bound && *problem.l0_bound < d) {
        rng.shuffle(dims);
        dims.resize(static_cast<std::size_t>(std::max(*problem.l0_bound, 0)));
        std::sort(dims.begin(), dims.end());
        Eigen::VectorXd sparse = problem.query;
        for (int j : dims) sparse[j] = x[j];
        x = sparse;
      }
      x = problem.snap_integers(project_free(problem, x, dims));
      if (!problem.feasible(x)) x = feasible_random(problem, rng);
      if (data.size() > 0 && data.min_distance(x) < 1e-9) {
        x = feasible_random(problem, rng);
      }
      record_sample(x, {});
    }
  }

  while (data.size() < budget) {
    // Incumbents are recomputed from the live sample set every iteration.
    std::vector<double> incumbents(npot);
    for (std::size_t t = 0; t < npot; ++t) {
      incumbents[t] = best_potential(raw_outputs, potentials[t]);
    }

    const Eigen::VectorXd span = hi - lo;
    GpPosterior posterior;
    std::vector<GpPosterior> composed(npot);
    if (mode == SurrogateMode::direct) {
      const KernelParams kp = select_hyperparameters(data, span, rng.raw());
      posterior = fit(data, kp);
    } else {
      for (std::size_t t = 0; t < npot; ++t) {
        SampleSet comp = data;
        for (int i = 0; i < comp.size(); ++i) {
          comp.outputs[i] = ep_value(potentials[t], comp.outputs[i]);
        }
        const KernelParams kp =
            select_hyperparameters(comp, span, rng.raw());
        composed[t] = fit(comp, kp);
      }
    }

    // One proposal per potential against the shared posterior.
    struct Proposal {
      Eigen::VectorXd x;
      std::vector<double> acq;
    };
    std::vector<Proposal> accepted;
    for (std::size_t t = 0; t < npot; ++t) {
      AcquisitionOptimum opt;
      if (mode == SurrogateMode::direct) {
        opt = optimize_acquisition(posterior, potentials[t], incumbents[t],
                                   problem, rng.raw(), options);
      } else {
        const GpPosterior& comp = composed[t];
        Objective obj{
            [&](const Eigen::VectorXd& x) {
              return ei_naive(comp, incumbents[t], x);
            },
            [&](const Eigen::VectorXd& x) {
              return ei_naive_grad(comp, incumbents[t], x);
            }};
        std::vector<Eigen::VectorXd> starts =
            latin_hypercube(rng, options.acquisition_starts, lo, hi);
        int best_i = 0;
        for (int i = 1; i < data.size(); ++i) {
          if (comp.data().outputs[i] > comp.data().outputs[best_i]) best_i = i;
        }
        starts.push_back(data.inputs.row(best_i).transpose());
        opt = maximize_acquisition(problem, obj, starts);
      }

      Eigen::VectorXd x = problem.snap_integers(opt.x);
      const bool dup_data = data.min_distance(x) < 1e-9;
      bool dup_accepted = false;
      for (const Proposal& p : accepted) {
        if ((p.x - x).cwiseAbs().maxCoeff() < 1e-9) {
          dup_accepted = true;
          break;
        }
      }
      if (dup_accepted) continue;  // shared evaluation across potentials
      if (dup_data) x = feasible_random(problem, rng);

      Proposal prop;
      prop.x = x;
      prop.acq.resize(npot);
      for (std::size_t u = 0; u < npot; ++u) {
        prop.acq[u] =
            mode == SurrogateMode::direct
                ? ei_cfx({&posterior, potentials[u], incumbents[u]}, prop.x)
                : ei_naive(composed[u], incumbents[u], prop.x);
      }
      accepted.push_back(std::move(prop));
    }
    for (const Proposal& p : accepted) {
      if (data.size() >= budget) break;
      record_sample(p.x, p.acq);
    }
    if (accepted.empty()) {
      // All proposals collapsed onto each other; spend one evaluation on a
      // fresh point to keep the loop advancing.
      record_sample(feasible_random(problem, rng), {});
    }
  }

  for (std::size_t t = 0; t < npot; ++t) {
    finalize_trace(traces[t], potentials[t], options);
  }
  return traces;
}

}  // namespace

void SearchProblem::validate() const {
  const int d = dim();
  if (d == 0) throw std::invalid_argument("SearchProblem: empty query");
  if (lower.size() != d || upper.size() != d) {
    throw std::invalid_argument("SearchProblem: bounds shape mismatch");
  }
  if (!model) throw std::invalid_argument("SearchProblem: missing model");
  for (int j = 0; j < d; ++j) {
    if (!(lower[j] < upper[j])) {
      throw std::invalid_argument("SearchProblem: lower must be < upper");
    }
    if (!(query[j] > lower[j] && query[j] < upper[j])) {
      throw std::invalid_argument(
          "SearchProblem: query must lie strictly inside the box");
    }
  }
  if (l0_bound && (*l0_bound < 0 || *l0_bound > d)) {
    throw std::invalid_argument("SearchProblem: l0 bound exceeds dimension");
  }
  if (!sign.empty() && static_cast<int>(sign.size()) != d) {
    throw std::invalid_argument("SearchProblem: sign constraint shape");
  }
  for (int j : integer_dims) {
    if (j < 0 || j >= d) {
      throw std::invalid_argument("SearchProblem: integer dim out of range");
    }
    if (query[j] != std::round(query[j])) {
      throw std::invalid_argument(
          "SearchProblem: query must be integral on integer dimensions");
    }
  }
  for (const LinearConstraint& lc : linear) {
    if (lc.normal.size() != d) {
      throw std::invalid_argument("SearchProblem: linear constraint shape");
    }
  }
}

Eigen::VectorXd SearchProblem::effective_lower() const {
  Eigen::VectorXd lo = lower;
  for (int j = 0; j < dim() && j < static_cast<int>(sign.size()); ++j) {
    if (sign[static_cast<std::size_t>(j)] == SignConstraint::increase_only) {
      lo[j] = std::max(lo[j], query[j]);
    }
  }
  return lo;
}

Eigen::VectorXd SearchProblem::effective_upper() const {
  Eigen::VectorXd hi = upper;
  for (int j = 0; j < dim() && j < static_cast<int>(sign.size()); ++j) {
    if (sign[static_cast<std::size_t>(j)] == SignConstraint::decrease_only) {
      hi[j] = std::min(hi[j], query[j]);
    }
  }
  return hi;
}

bool SearchProblem::is_integer_dim(int j) const {
  return std::find(integer_dims.begin(), integer_dims.end(), j) !=
         integer_dims.end();
}

Eigen::VectorXd SearchProblem::snap_integers(const Eigen::VectorXd& x) const {
  if (integer_dims.empty()) return x;
  const Eigen::VectorXd lo = effective_lower();
  const Eigen::VectorXd hi = effective_upper();
  auto snap_dim = [&](double v, int j) {
    double r = std::round(v);
    r = std::clamp(r, std::ceil(lo[j] - 1e-12), std::floor(hi[j] + 1e-12));
    return r;
  };
  Eigen::VectorXd out = x;
  for (int j : integer_dims) out[j] = snap_dim(x[j], j);
  if (linear.empty() || feasible(out)) return out;
  // Rounding can push a point across a halfspace; search the floor/ceil
  // lattice corners for the nearest feasible rounding.
  const std::size_t m = integer_dims.size();
  if (m <= 12) {
    double best_dist = std::numeric_limits<double>::infinity();
    Eigen::VectorXd best = out;
    for (std::size_t mask = 0; mask < (std::size_t{1} << m); ++mask) {
      Eigen::VectorXd cand = x;
      for (std::size_t i = 0; i < m; ++i) {
        const int j = integer_dims[i];
        double v = (mask >> i) & 1 ? std::ceil(x[j]) : std::floor(x[j]);
        v = std::clamp(v, std::ceil(lo[j] - 1e-12),
                       std::floor(hi[j] + 1e-12));
        cand[j] = v;
      }
      if (!feasible(cand)) continue;
      const double dist = (cand - x).squaredNorm();
      if (dist < best_dist) {
        best_dist = dist;
        best = cand;
      }
    }
    if (std::isfinite(best_dist)) return best;
  }
  return out;
}

Eigen::VectorXd SearchProblem::project(const Eigen::VectorXd& x) const {
  return project_free(*this, x, all_dims(dim()));
}

bool SearchProblem::feasible(const Eigen::VectorXd& x, double tol) const {
  const Eigen::VectorXd lo = effective_lower();
  const Eigen::VectorXd hi = effective_upper();
  if (x.size() != dim()) return false;
  for (int j = 0; j < dim(); ++j) {
    if (x[j] < lo[j] - tol || x[j] > hi[j] + tol) return false;
  }
  for (int j : integer_dims) {
    if (std::abs(x[j] - std::round(x[j])) > tol) return false;
  }
  if (l0_bound) {
    int changed = 0;
    for (int j = 0; j < dim(); ++j) {
      if (std::abs(x[j] - query[j]) > tol) ++changed;
    }
    if (changed > *l0_bound) return false;
  }
  for (const LinearConstraint& lc : linear) {
    if (lc.normal.dot(x) > lc.offset + tol) return false;
  }
  return true;
}

double SearchProblem::eval_gradient_step() const { return 1e-6; }

Eigen::VectorXd SearchProblem::gradient_at(const Eigen::VectorXd& x) const {
  if (model_gradient) return model_gradient(x);
  Eigen::VectorXd g(dim());
  Eigen::VectorXd probe = x;
  for (int j = 0; j < dim(); ++j) {
    const double h =
        eval_gradient_step() * std::max(upper[j] - lower[j], 1.0);
    probe[j] = x[j] + h;
    const double up = model(probe);
    probe[j] = x[j] - h;
    const double dn = model(probe);
    probe[j] = x[j];
    g[j] = (up - dn) / (2.0 * h);
  }
  return g;
}

Trace run_bayes_cfx(const SearchProblem& problem,
                    const PotentialSpec& potential, int budget,
                    std::uint64_t seed, const BoOptions& options) {
  return run_bo_core(problem, {potential}, budget, seed, options,
                     SurrogateMode::direct)[0];
}

Trace run_bayes_naive(const SearchProblem& problem,
                      const PotentialSpec& potential, int budget,
                      std::uint64_t seed, const BoOptions& options) {
  return run_bo_core(problem, {potential}, budget, seed, options,
                     SurrogateMode::composed)[0];
}

std::vector<Trace> run_multi_cfx(const SearchProblem& problem,
                                 const std::vector<PotentialSpec>& potentials,
                                 int budget, std::uint64_t seed,
                                 const BoOptions& options) {
  return run_bo_core(problem, potentials, budget, seed, options,
                     SurrogateMode::direct);
}

Trace run_random(const SearchProblem& problem, const PotentialSpec& potential,
                 int budget, std::uint64_t seed, const BoOptions& options) {
  problem.validate();
  if (budget < 1) throw std::invalid_argument("run: budget must be >= 1");
  const auto t0 = Clock::now();
  Rng rng(seed);
  Trace trace;
  for (int i = 0; i < budget; ++i) {
    const Eigen::VectorXd x = feasible_random(problem, rng);
    TraceRecord rec;
    rec.x = x;
    rec.fx = problem.model(x);
    rec.rho = ep_value(potential, rec.fx);
    rec.incumbent = trace.records.empty()
                        ? rec.rho
                        : std::max(trace.records.back().incumbent, rec.rho);
    rec.acquisition = 0.0;
    rec.wall_time_s = seconds_since(t0);
    trace.records.push_back(std::move(rec));
  }
  finalize_trace(trace, potential, options);
  return trace;
}

LocalOptResult projected_gradient_search(const SearchProblem& problem,
                                         const PotentialSpec& potential,
                                         const Eigen::VectorXd& x0,
                                         const LocalOptParams& params) {
  problem.validate();
  Eigen::VectorXd x = x0;
  for (int it = 0; it < params.max_iters; ++it) {
    const double fx = problem.model(x);
    const Eigen::VectorXd g =
        ep_grad(potential, fx) * problem.gradient_at(x);
    const Eigen::VectorXd target = problem.project(x + params.step * g);
    if ((x - target).norm() <= params.tol) return {x, true, it};
    x = target;
  }
  return {x, false, params.max_iters};
}

AcquisitionOptimum optimize_acquisition(const GpPosterior& posterior,
                                        const PotentialSpec& potential,
                                        double incumbent,
                                        const SearchProblem& problem,
                                        std::uint64_t seed,
                                        const BoOptions& options) {
  problem.validate();
  Rng rng(seed);
  const Eigen::VectorXd lo = problem.effective_lower();
  const Eigen::VectorXd hi = problem.effective_upper();
  std::vector<Eigen::VectorXd> starts =
      latin_hypercube(rng, options.acquisition_starts, lo, hi);
  // The sample with the highest observed potential seeds exploitation.
  const SampleSet& data = posterior.data();
  if (data.size() > 0) {
    int best_i = 0;
    double best_rho = -1.0;
    for (int i = 0; i < data.size(); ++i) {
      const double rho = ep_value(potential, data.outputs[i]);
      if (rho > best_rho) {
        best_rho = rho;
        best_i = i;
      }
    }
    starts.push_back(data.inputs.row(best_i).transpose());
  }
  AcquisitionInputs inputs{&posterior, potential, incumbent};
  Objective obj{
      [&](const Eigen::VectorXd& x) { return ei_cfx(inputs, x); },
      [&](const Eigen::VectorXd& x) { return ei_cfx_grad(inputs, x); }};
  return maximize_acquisition(problem, obj, starts);
}

}  // namespace cfx
