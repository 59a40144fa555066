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

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <cmath>

#include "cfx/acquisition.hpp"
#include "cfx/search.hpp"
#include "doctest.h"

using cfx::PotentialKind;
using cfx::PotentialSpec;
using cfx::SearchProblem;
using cfx::Trace;
using Eigen::VectorXd;

namespace {

SearchProblem line_problem() {
  SearchProblem pb;
  pb.model = [](const VectorXd& x) { return 2.0 * x[0]; };
  pb.model_gradient = [](const VectorXd& x) {
    (void)x;
    return Eigen::VectorXd::Constant(1, 2.0);
  };
  pb.query = VectorXd::Constant(1, 0.01);
  pb.lower = VectorXd::Zero(1);
  pb.upper = VectorXd::Ones(1);
  return pb;
}

SearchProblem constrained_problem() {
  SearchProblem pb;
  pb.model = [](const VectorXd& x) {
    return 0.3 * x[0] - 0.2 * x[1] + 0.15 * x[2] * x[2] + 0.05 * x[3];
  };
  pb.query = VectorXd(4);
  pb.query << 0.5, -1.0, 0.0, 1.0;
  pb.lower = VectorXd::Constant(4, -2.0);
  pb.upper = VectorXd::Constant(4, 2.0);
  pb.integer_dims = {1};
  pb.l0_bound = 2;
  pb.sign = {cfx::SignConstraint::increase_only, cfx::SignConstraint::free_dir,
             cfx::SignConstraint::free_dir, cfx::SignConstraint::free_dir};
  cfx::LinearConstraint lc;
  lc.normal = VectorXd::Zero(4);
  lc.normal[0] = 1.0;
  lc.normal[2] = 1.0;
  lc.offset = 2.5;
  pb.linear.push_back(lc);
  return pb;
}

bool traces_identical(const Trace& a, const Trace& b) {
  if (a.records.size() != b.records.size()) return false;
  for (std::size_t i = 0; i < a.records.size(); ++i) {
    const auto& ra = a.records[i];
    const auto& rb = b.records[i];
    if (ra.x != rb.x || ra.fx != rb.fx || ra.rho != rb.rho ||
        ra.incumbent != rb.incumbent || ra.acquisition != rb.acquisition) {
      return false;
    }
  }
  return a.best_x == b.best_x && a.best_f == b.best_f &&
         a.best_rho == b.best_rho;
}

}  // namespace

TEST_CASE("random search: incumbent monotone, exact budget, determinism") {
  const SearchProblem pb = line_problem();
  const PotentialSpec sep(PotentialKind::sep, 0.0, 1.0);
  const Trace tr = cfx::run_random(pb, sep, 40, 123);
  REQUIRE(tr.records.size() == 40);
  for (std::size_t i = 1; i < tr.records.size(); ++i) {
    CHECK(tr.records[i].incumbent >= tr.records[i - 1].incumbent);
    CHECK(tr.records[i].incumbent ==
          std::max(tr.records[i - 1].incumbent, tr.records[i].rho));
  }
  CHECK(traces_identical(tr, cfx::run_random(pb, sep, 40, 123)));
  CHECK_FALSE(traces_identical(tr, cfx::run_random(pb, sep, 40, 124)));
}

TEST_CASE("random search marginals are uniform over the box") {
  SearchProblem pb;
  pb.model = [](const VectorXd&) { return 0.0; };
  pb.query = VectorXd::Constant(2, 0.25);
  pb.lower = VectorXd::Zero(2);
  pb.upper = VectorXd::Ones(2);
  pb.upper[1] = 3.0;
  const PotentialSpec sep(PotentialKind::sep, 0.0, 1.0);
  const Trace tr = cfx::run_random(pb, sep, 10000, 7);
  for (int j = 0; j < 2; ++j) {
    double mean = 0.0;
    for (const auto& rec : tr.records) mean += rec.x[j];
    mean /= static_cast<double>(tr.records.size());
    const double width = pb.upper[j] - pb.lower[j];
    const double se = width / std::sqrt(12.0 * tr.records.size());
    CHECK(std::abs(mean - 0.5 * (pb.lower[j] + pb.upper[j])) <= 3.0 * se);
  }
}

TEST_CASE("random search honors the sparsity bound") {
  SearchProblem pb = constrained_problem();
  const PotentialSpec sep(PotentialKind::sep, 0.0, 1.0);
  const Trace tr = cfx::run_random(pb, sep, 200, 11);
  for (const auto& rec : tr.records) {
    int changed = 0;
    for (int j = 0; j < 4; ++j) {
      if (std::abs(rec.x[j] - pb.query[j]) > 1e-12) ++changed;
    }
    CHECK(changed <= 2);
  }
}

TEST_CASE("budget equal to the design size yields only the design") {
  const SearchProblem pb = line_problem();
  const PotentialSpec sep(PotentialKind::sep, 0.0, 1.0);
  const Trace tr = cfx::run_bayes_cfx(pb, sep, 5, 3);
  REQUIRE(tr.records.size() == 5);
  double best = 0.0;
  for (const auto& rec : tr.records) {
    CHECK(rec.acquisition == 0.0);  // no acquisition drove the design
    best = std::max(best, rec.rho);
  }
  CHECK(tr.records.back().incumbent == best);
  CHECK(tr.best_rho == best);
}

TEST_CASE("bayes-cfx traces are deterministic per seed") {
  const SearchProblem pb = line_problem();
  const PotentialSpec sep(PotentialKind::sep, 0.0, 1.0);
  const Trace a = cfx::run_bayes_cfx(pb, sep, 10, 42);
  const Trace b = cfx::run_bayes_cfx(pb, sep, 10, 42);
  CHECK(traces_identical(a, b));
  const Trace c = cfx::run_bayes_naive(pb, sep, 10, 42);
  const Trace d = cfx::run_bayes_naive(pb, sep, 10, 42);
  CHECK(traces_identical(c, d));
}

TEST_CASE("every evaluated point satisfies all constraints") {
  const SearchProblem pb = constrained_problem();
  const PotentialSpec pot(PotentialKind::aep_plus, 0.0, 0.4);
  for (std::uint64_t seed : {1ull, 2ull, 3ull}) {
    for (const Trace& tr :
         {cfx::run_bayes_cfx(pb, pot, 12, seed),
          cfx::run_bayes_naive(pb, pot, 12, seed),
          cfx::run_random(pb, pot, 12, seed)}) {
      REQUIRE(tr.records.size() == 12);
      for (const auto& rec : tr.records) {
        CHECK(pb.feasible(rec.x));
        CHECK(rec.x[1] == std::round(rec.x[1]));  // integer dim is exact
        CHECK(rec.x[0] >= pb.query[0]);           // increase-only
        int changed = 0;
        for (int j = 0; j < 4; ++j) {
          if (std::abs(rec.x[j] - pb.query[j]) > 1e-12) ++changed;
        }
        CHECK(changed <= 2);
        CHECK(rec.fx == pb.model(rec.x));  // trace stores evaluated points
      }
    }
  }
}

TEST_CASE("bayes-cfx finds the unit-output point of the doubling map") {
  const SearchProblem pb = line_problem();
  const PotentialSpec sep(PotentialKind::sep, 0.0, 1.0);
  int hits = 0;
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    const Trace tr = cfx::run_bayes_cfx(pb, sep, 15, seed);
    CHECK(tr.records.size() == 15);
    if (std::abs(tr.best_f - 1.0) <= 0.01) ++hits;
  }
  CHECK(hits >= 4);
}

TEST_CASE("naive search underperforms bayes-cfx on the composed objective") {
  const SearchProblem pb = line_problem();
  const PotentialSpec sep(PotentialKind::sep, 0.0, 1.0);
  int cfx_wins = 0;
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    const Trace a = cfx::run_bayes_cfx(pb, sep, 12, seed);
    const Trace b = cfx::run_bayes_naive(pb, sep, 12, seed);
    if (b.records.back().incumbent <= a.records.back().incumbent) ++cfx_wins;
  }
  CHECK(cfx_wins >= 7);
}

TEST_CASE("budget exhaustion flag reflects the epsilon-optimality test") {
  const SearchProblem pb = line_problem();
  const PotentialSpec sep(PotentialKind::sep, 0.0, 1.0);
  cfx::BoOptions opts;
  opts.epsilon = 0.05;
  opts.rho_star_hint = cfx::kExpMinusOne;  // true optimum of the potential
  const Trace good = cfx::run_bayes_cfx(pb, sep, 15, 1, opts);
  CHECK(good.rho_star_is_oracle);
  CHECK(good.target_reached ==
        (good.best_rho >= (1.0 - 0.05) * cfx::kExpMinusOne));
  CHECK(good.target_reached);
  CHECK_FALSE(good.budget_exhausted);

  // Starve the search: with only the design there is no way to hit the top.
  const Trace bad = cfx::run_random(pb, sep, 2, 5, opts);
  CHECK(bad.target_reached == (bad.best_rho >= 0.95 * cfx::kExpMinusOne));
  CHECK(bad.budget_exhausted == !bad.target_reached);
}

TEST_CASE("multi-potential search with one potential reduces exactly") {
  const SearchProblem pb = line_problem();
  const PotentialSpec sep(PotentialKind::sep, 0.0, 1.0);
  const Trace single = cfx::run_bayes_cfx(pb, sep, 10, 77);
  const std::vector<Trace> multi = cfx::run_multi_cfx(pb, {sep}, 10, 77);
  REQUIRE(multi.size() == 1);
  CHECK(traces_identical(single, multi[0]));
}

TEST_CASE("multi-potential search shares one sample pool") {
  SearchProblem pb = line_problem();
  int evals = 0;
  auto base = pb.model;
  pb.model = [&evals, base](const VectorXd& x) {
    ++evals;
    return base(x);
  };
  const std::vector<cfx::PotentialSpec> pots{
      PotentialSpec(PotentialKind::sep, 0.0, 1.0),
      PotentialSpec(PotentialKind::aep_plus, 0.0, 0.7),
      PotentialSpec(PotentialKind::aep_minus, 1.2, 0.5)};
  const int budget = 18;
  const std::vector<Trace> traces = cfx::run_multi_cfx(pb, pots, budget, 5);
  CHECK(evals <= budget);
  REQUIRE(traces.size() == 3);
  for (const Trace& tr : traces) {
    // Every potential's trace sees the full shared dataset.
    CHECK(static_cast<int>(tr.records.size()) == evals);
    for (std::size_t i = 1; i < tr.records.size(); ++i) {
      CHECK(tr.records[i].incumbent >= tr.records[i - 1].incumbent);
    }
  }
  // Shared data never shrinks the per-potential sample count relative to
  // a solo run at the per-potential budget share.
  const Trace solo = cfx::run_bayes_cfx(pb, pots[0], budget / 3, 5);
  CHECK(traces[0].records.size() >= solo.records.size());
}

TEST_CASE("distinct questions are answered in one shared-pool pass") {
  // Three different potentials over one model, one budget: the shared
  // sample set must drive every question to (near) its own optimum.
  SearchProblem pb;
  pb.model = [](const VectorXd& x) {
    return 1.0 / (1.0 + std::exp(-3.0 * x[0]));
  };
  pb.query = VectorXd::Constant(1, 0.6);  // f(q) ~ 0.858
  pb.lower = VectorXd::Constant(1, -1.5);
  pb.upper = VectorXd::Constant(1, 1.5);
  const double fq = pb.model(pb.query);
  const std::vector<PotentialSpec> pots{
      PotentialSpec(PotentialKind::aep_minus, fq, fq - 0.5),
      PotentialSpec(PotentialKind::aep_minus, fq, fq - 0.25),
      PotentialSpec(PotentialKind::sep, fq, 0.1)};
  const std::vector<Trace> traces = cfx::run_multi_cfx(pb, pots, 24, 3);
  REQUIRE(traces.size() == 3);
  for (const Trace& tr : traces) {
    // Every target level is attainable inside the box, so each question
    // should get close to the potential's maximum from the shared pool.
    CHECK(tr.best_rho >= 0.9 * cfx::kExpMinusOne);
  }
}

TEST_CASE("identical potentials collapse to shared evaluations") {
  SearchProblem pb = line_problem();
  int evals = 0;
  auto base = pb.model;
  pb.model = [&evals, base](const VectorXd& x) {
    ++evals;
    return base(x);
  };
  const PotentialSpec sep(PotentialKind::sep, 0.0, 1.0);
  const std::vector<Trace> traces =
      cfx::run_multi_cfx(pb, {sep, sep, sep}, 12, 9);
  CHECK(evals == 12);  // duplicate proposals are deduplicated, never re-run
  REQUIRE(traces.size() == 3);
  CHECK(traces_identical(traces[0], traces[1]));
  CHECK(traces_identical(traces[1], traces[2]));
}

TEST_CASE("integer rounding searches the lattice under linear constraints") {
  SearchProblem pb;
  pb.model = [](const VectorXd&) { return 0.0; };
  pb.query = VectorXd::Ones(2);
  pb.lower = VectorXd::Zero(2);
  pb.upper = VectorXd::Constant(2, 3.0);
  pb.integer_dims = {0, 1};
  cfx::LinearConstraint lc;
  lc.normal = VectorXd::Ones(2);
  lc.offset = 2.5;
  pb.linear.push_back(lc);

  VectorXd x(2);
  x << 1.4, 0.8;  // plain rounding gives (1, 1), already feasible
  VectorXd snapped = pb.snap_integers(x);
  CHECK(snapped[0] == 1.0);
  CHECK(snapped[1] == 1.0);

  x << 1.6, 1.6;  // plain rounding gives (2, 2), infeasible; corners win
  snapped = pb.snap_integers(x);
  CHECK(pb.feasible(snapped));
  CHECK(snapped.sum() <= 2.5);
  CHECK(snapped[0] == std::round(snapped[0]));
  CHECK(snapped[1] == std::round(snapped[1]));
}

TEST_CASE("projected gradient accepts an already stationary start") {
  const SearchProblem pb = line_problem();
  // rho is flat at the query output scale: center far away, gradient ~ 0.
  const PotentialSpec far(PotentialKind::sep, 50.0, 1.0);
  const cfx::LocalOptParams params(0.05, 1e-6, 100);
  const VectorXd x0 = VectorXd::Constant(1, 0.4);
  const auto res = cfx::projected_gradient_search(pb, far, x0, params);
  CHECK(res.converged);
  CHECK(res.iterations == 0);
  CHECK(res.x == x0);
}

TEST_CASE("projected gradient converges to the interior composite maximum") {
  SearchProblem pb;
  pb.model = [](const VectorXd& x) { return x[0]; };
  pb.model_gradient = [](const VectorXd&) {
    return Eigen::VectorXd::Constant(1, 1.0);
  };
  pb.query = VectorXd::Constant(1, 0.1);
  pb.lower = VectorXd::Zero(1);
  pb.upper = VectorXd::Constant(1, 2.0);
  const PotentialSpec sep(PotentialKind::sep, 0.0, 1.0);
  // rho(f(x)) = x^2 exp(-x^2) has its interior maximizer at exactly 1.
  const cfx::LocalOptParams params(0.05, 1e-8, 20000);
  const auto res = cfx::projected_gradient_search(
      pb, sep, VectorXd::Constant(1, 0.3), params);
  CHECK(res.converged);
  CHECK(res.x[0] == doctest::Approx(1.0).epsilon(1e-5));
  // Independent re-evaluation of the delta-stationarity criterion.
  const double fx = pb.model(res.x);
  const double g = cfx::ep_grad(sep, fx) * 1.0;
  const double target = std::clamp(res.x[0] + params.step * g, 0.0, 2.0);
  CHECK(std::abs(res.x[0] - target) <= params.tol);
}

TEST_CASE("projected gradient stops at a boundary fixed point") {
  SearchProblem pb;
  pb.model = [](const VectorXd& x) { return x[0]; };
  pb.model_gradient = [](const VectorXd&) {
    return Eigen::VectorXd::Constant(1, 1.0);
  };
  pb.query = VectorXd::Constant(1, 0.1);
  pb.lower = VectorXd::Zero(1);
  pb.upper = VectorXd::Constant(1, 0.5);
  const PotentialSpec sep(PotentialKind::sep, 0.0, 1.0);
  const cfx::LocalOptParams params(0.05, 1e-8, 20000);
  const auto res = cfx::projected_gradient_search(
      pb, sep, VectorXd::Constant(1, 0.2), params);
  CHECK(res.converged);
  CHECK(res.x[0] == doctest::Approx(0.5).epsilon(1e-12));
}

TEST_CASE("acquisition argmax matches a dense grid scan in 1D") {
  const SearchProblem pb = line_problem();
  cfx::SampleSet data;
  for (double x : {0.05, 0.3, 0.55, 0.8, 0.95}) {
    data.add(VectorXd::Constant(1, x), 2.0 * x);
  }
  const cfx::GpPosterior post =
      cfx::fit(data, cfx::select_hyperparameters(
                         data, VectorXd::Constant(1, 1.0), 9));
  const PotentialSpec sep(PotentialKind::sep, 0.0, 1.0);
  const double incumbent = 0.25;
  const auto opt = cfx::optimize_acquisition(post, sep, incumbent, pb, 17);

  double grid_best = -1.0, grid_arg = 0.0;
  const cfx::AcquisitionInputs inputs{&post, sep, incumbent};
  for (int i = 0; i <= 10000; ++i) {
    const double x = i / 10000.0;
    const double v = cfx::ei_cfx(inputs, VectorXd::Constant(1, x));
    if (v > grid_best) {
      grid_best = v;
      grid_arg = x;
    }
  }
  CHECK(opt.value >= grid_best - 1e-10);
  CHECK(std::abs(opt.x[0] - grid_arg) <= 1e-3);
}

TEST_CASE("flat acquisition still returns a feasible point") {
  const SearchProblem pb = constrained_problem();
  cfx::SampleSet data;
  data.add(pb.query, pb.model(pb.query));
  Eigen::VectorXd other = pb.query;
  other[2] = 0.5;
  data.add(other, pb.model(other));
  const cfx::GpPosterior post = cfx::fit(data, cfx::KernelParams{});
  const PotentialSpec sep(PotentialKind::sep, 0.0, 1.0);
  const auto opt =
      cfx::optimize_acquisition(post, sep, cfx::kExpMinusOne, pb, 23);
  CHECK(opt.value == 0.0);
  CHECK(pb.feasible(pb.snap_integers(opt.x)));
}

TEST_CASE("acquisition argmax respects the sparsity bound") {
  SearchProblem pb = constrained_problem();
  pb.l0_bound = 1;
  cfx::SampleSet data;
  data.add(pb.query, pb.model(pb.query));
  Eigen::VectorXd other = pb.query;
  other[2] = 0.8;
  data.add(other, pb.model(other));
  const cfx::GpPosterior post = cfx::fit(data, cfx::KernelParams{});
  const PotentialSpec pot(PotentialKind::aep_plus, 0.0, 0.3);
  const auto opt = cfx::optimize_acquisition(post, pot, 0.01, pb, 31);
  int changed = 0;
  for (int j = 0; j < 4; ++j) {
    if (std::abs(opt.x[j] - pb.query[j]) > 1e-12) ++changed;
  }
  CHECK(changed <= 1);
}

TEST_CASE("problem validation rejects malformed instances") {
  SearchProblem pb = line_problem();
  pb.query[0] = 1.5;  // outside the box
  CHECK_THROWS_AS(pb.validate(), std::invalid_argument);
  pb = line_problem();
  pb.l0_bound = 7;
  CHECK_THROWS_AS(pb.validate(), std::invalid_argument);
  pb = line_problem();
  pb.lower[0] = 2.0;
  CHECK_THROWS_AS(pb.validate(), std::invalid_argument);
}

TEST_CASE("an empty constraint set is reported") {
  SearchProblem pb = line_problem();
  cfx::LinearConstraint impossible;
  impossible.normal = VectorXd::Ones(1);
  impossible.offset = -10.0;  // x <= -10 contradicts the box [0, 1]
  pb.linear.push_back(impossible);
  const PotentialSpec sep(PotentialKind::sep, 0.0, 1.0);
  CHECK_THROWS_AS(cfx::run_random(pb, sep, 5, 1), std::runtime_error);
}
