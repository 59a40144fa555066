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
//
// Command-line driver: config-driven counterfactual search runs, quadrature
// rule export and the numerical self-check suite.

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "cfx/acquisition.hpp"
#include "cfx/gaussian.hpp"
#include "cfx/models.hpp"
#include "cfx/quadrature.hpp"
#include "cfx/rng.hpp"
#include "cfx/search.hpp"
#include "json.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitConfig = 2;
constexpr int kExitInfeasible = 3;
constexpr int kExitValidation = 4;

using nlohmann::json;

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

std::filesystem::path output_dir(const json& config) {
  if (const char* env = std::getenv("CFX_OUTPUT_DIR")) {
    return env;
  }
  if (config.contains("output_dir")) {
    return config.at("output_dir").get<std::string>();
  }
  return ".";
}

Eigen::VectorXd to_vector(const json& arr) {
  Eigen::VectorXd v(arr.size());
  for (std::size_t i = 0; i < arr.size(); ++i) {
    v[static_cast<Eigen::Index>(i)] = arr[i].get<double>();
  }
  return v;
}

struct RunSetup {
  cfx::SearchProblem problem;
  cfx::PotentialSpec potential;
  std::string strategy;
  int budget = 0;
  std::vector<std::uint64_t> seeds;
  cfx::BoOptions options;
  cfx::LocalOptParams localopt;
  std::vector<std::optional<int>> l0_sweep;  // nullopt = unbounded row
  std::vector<std::string> feature_names;
};

// Build the search problem from a parsed config. Throws
// std::invalid_argument / nlohmann::json exceptions on config errors.
RunSetup parse_run_config(const json& config) {
  RunSetup setup;

  const cfx::LoadedModel model =
      cfx::load_model(config.at("model").get<std::string>());
  setup.problem.model = model.predict;
  if (model.gradient) setup.problem.model_gradient = model.gradient;

  std::optional<cfx::TabularDataset> dataset;
  if (config.contains("dataset")) {
    const auto& ds = config.at("dataset");
    const auto schema = cfx::load_schema(ds.at("schema").get<std::string>());
    dataset = cfx::load_dataset(ds.at("path").get<std::string>(), schema);
    setup.feature_names = dataset->feature_names();
  }

  // Query: an explicit point, or a selection rule over the dataset.
  const auto& query = config.at("query");
  if (query.is_array()) {
    setup.problem.query = to_vector(query);
  } else {
    if (!dataset) {
      throw std::invalid_argument(
          "query selection rules require a dataset section");
    }
    const std::string rule = query.at("select").get<std::string>();
    if (rule != "output_at_least") {
      throw std::invalid_argument("unknown query selection rule: " + rule);
    }
    const double threshold = query.at("threshold").get<double>();
    bool found = false;
    for (int i = 0; i < dataset->row_count(); ++i) {
      const Eigen::VectorXd x = dataset->encoded(i);
      if (setup.problem.model(x) >= threshold) {
        setup.problem.query = x;
        found = true;
        break;
      }
    }
    if (!found) {
      throw std::invalid_argument(
          "no dataset row satisfies the query selection threshold");
    }
  }
  const int d = setup.problem.dim();
  if (setup.feature_names.empty()) {
    for (int j = 0; j < d; ++j) {
      setup.feature_names.push_back("x" + std::to_string(j));
    }
  }

  const auto& constraints = config.at("constraints");
  setup.problem.lower = to_vector(constraints.at("lower"));
  setup.problem.upper = to_vector(constraints.at("upper"));
  if (constraints.contains("integer_dims")) {
    for (const auto& j : constraints.at("integer_dims")) {
      setup.problem.integer_dims.push_back(j.get<int>());
    }
  }
  if (constraints.contains("sign")) {
    for (const auto& s : constraints.at("sign")) {
      const std::string name = s.get<std::string>();
      if (name == "free") {
        setup.problem.sign.push_back(cfx::SignConstraint::free_dir);
      } else if (name == "increase") {
        setup.problem.sign.push_back(cfx::SignConstraint::increase_only);
      } else if (name == "decrease") {
        setup.problem.sign.push_back(cfx::SignConstraint::decrease_only);
      } else {
        throw std::invalid_argument("unknown sign constraint: " + name);
      }
    }
  }
  if (constraints.contains("linear")) {
    for (const auto& lc : constraints.at("linear")) {
      cfx::LinearConstraint c;
      c.normal = to_vector(lc.at("normal"));
      c.offset = lc.at("offset").get<double>();
      setup.problem.linear.push_back(std::move(c));
    }
  }
  if (constraints.contains("l0")) {
    setup.problem.l0_bound = constraints.at("l0").get<int>();
  }
  if (constraints.contains("l0_sweep")) {
    for (const auto& k : constraints.at("l0_sweep")) {
      if (k.is_string()) {
        setup.l0_sweep.push_back(std::nullopt);  // "inf"
      } else {
        setup.l0_sweep.push_back(k.get<int>());
      }
    }
  } else {
    setup.l0_sweep.push_back(setup.problem.l0_bound);
  }

  // Potential: explicit width, or a width rule anchored at a target output.
  const auto& pot = config.at("potential");
  const cfx::PotentialKind kind =
      cfx::potential_kind_from_string(pot.at("kind").get<std::string>());
  const double center = setup.problem.model(setup.problem.query);
  double width = 0.0;
  if (pot.contains("width")) {
    width = pot.at("width").get<double>();
  } else if (pot.contains("target")) {
    width = std::abs(center - pot.at("target").get<double>());
  } else {
    throw std::invalid_argument("potential needs a width or a target");
  }
  setup.potential = cfx::PotentialSpec(kind, center, width);

  setup.strategy = config.at("strategy").get<std::string>();
  const bool is_bo =
      setup.strategy == "bayes-cfx" || setup.strategy == "bayes-naive";
  if (setup.strategy != "bayes-cfx" && setup.strategy != "bayes-naive" &&
      setup.strategy != "random" && setup.strategy != "localopt") {
    throw std::invalid_argument("unknown strategy: " + setup.strategy);
  }
  if (setup.strategy == "localopt") {
    // The recurrence is a continuous projected-gradient iteration; sparsity
    // and integrality cannot be expressed through its Euclidean projection.
    const bool sweep_bounded =
        std::any_of(setup.l0_sweep.begin(), setup.l0_sweep.end(),
                    [](const std::optional<int>& b) { return b.has_value(); });
    if (sweep_bounded || !setup.problem.integer_dims.empty()) {
      throw std::invalid_argument(
          "localopt does not support l0 or integer constraints");
    }
  }
  setup.budget = config.at("budget").get<int>();
  if (is_bo && setup.budget < 5) {
    throw std::invalid_argument("budget must be >= 5 for BO strategies");
  }
  for (const auto& s : config.at("seeds")) {
    setup.seeds.push_back(s.get<std::uint64_t>());
  }
  if (setup.seeds.empty()) {
    throw std::invalid_argument("at least one seed required");
  }
  setup.options.epsilon = config.value("epsilon", 0.05);

  if (config.contains("localopt")) {
    const auto& lo = config.at("localopt");
    setup.localopt = cfx::LocalOptParams(lo.value("step", 0.05),
                                         lo.value("tol", 1e-6),
                                         lo.value("max_iters", 5000));
  }

  // Optional grid oracle for the epsilon-optimality flag (cheap models,
  // dimension <= 2).
  if (config.contains("rho_star_grid")) {
    const int points = config.at("rho_star_grid").get<int>();
    if (d > 2) {
      throw std::invalid_argument("rho_star_grid supports dimension <= 2");
    }
    double best = 0.0;
    if (d == 1) {
      for (int i = 0; i <= points; ++i) {
        Eigen::VectorXd x(1);
        x[0] = setup.problem.lower[0] +
               (setup.problem.upper[0] - setup.problem.lower[0]) * i / points;
        best = std::max(best, cfx::ep_value(setup.potential,
                                            setup.problem.model(x)));
      }
    } else {
      const int side = std::max(2, static_cast<int>(std::sqrt(points)));
      for (int i = 0; i <= side; ++i) {
        for (int j = 0; j <= side; ++j) {
          Eigen::VectorXd x(2);
          x[0] = setup.problem.lower[0] +
                 (setup.problem.upper[0] - setup.problem.lower[0]) * i / side;
          x[1] = setup.problem.lower[1] +
                 (setup.problem.upper[1] - setup.problem.lower[1]) * j / side;
          best = std::max(best, cfx::ep_value(setup.potential,
                                              setup.problem.model(x)));
        }
      }
    }
    setup.options.rho_star_hint = best;
  }
  return setup;
}

cfx::Trace run_strategy(const RunSetup& setup, const cfx::SearchProblem& pb,
                        std::uint64_t seed) {
  if (setup.strategy == "bayes-cfx") {
    return cfx::run_bayes_cfx(pb, setup.potential, setup.budget, seed,
                              setup.options);
  }
  if (setup.strategy == "bayes-naive") {
    return cfx::run_bayes_naive(pb, setup.potential, setup.budget, seed,
                                setup.options);
  }
  if (setup.strategy == "random") {
    return cfx::run_random(pb, setup.potential, setup.budget, seed,
                           setup.options);
  }
  // localopt: the projected-gradient recurrence. The query itself is a
  // stationary point of the composed potential (rho' vanishes at its own
  // center), so each seed starts from a random feasible point instead.
  const cfx::Trace start = cfx::run_random(pb, setup.potential, 1, seed);
  const auto res = cfx::projected_gradient_search(
      pb, setup.potential, start.records.front().x, setup.localopt);
  cfx::Trace trace;
  cfx::TraceRecord rec;
  rec.x = res.x;
  rec.fx = pb.model(res.x);
  rec.rho = cfx::ep_value(setup.potential, rec.fx);
  rec.incumbent = rec.rho;
  rec.acquisition = 0.0;
  trace.records.push_back(rec);
  trace.best_x = res.x;
  trace.best_f = rec.fx;
  trace.best_rho = rec.rho;
  trace.epsilon = setup.options.epsilon;
  trace.rho_star_estimate = setup.options.rho_star_hint.value_or(rec.rho);
  trace.rho_star_is_oracle = setup.options.rho_star_hint.has_value();
  trace.target_reached =
      trace.rho_star_estimate > 0.0 &&
      cfx::target_membership(setup.potential, trace.rho_star_estimate,
                             trace.epsilon, trace.best_f);
  trace.budget_exhausted = !res.converged;
  return trace;
}

void write_trace(const std::filesystem::path& path, const cfx::Trace& trace) {
  std::ofstream out(path);
  for (std::size_t i = 0; i < trace.records.size(); ++i) {
    const auto& rec = trace.records[i];
    json line;
    line["iter"] = i;
    line["x"] = std::vector<double>(rec.x.data(), rec.x.data() + rec.x.size());
    line["fx"] = rec.fx;
    line["rho"] = rec.rho;
    line["incumbent"] = rec.incumbent;
    line["acquisition"] = rec.acquisition;
    out << line.dump() << '\n';
  }
}

int cmd_run(const std::string& config_path) {
  json config;
  {
    std::ifstream in(config_path);
    if (!in) {
      std::cerr << "cannot open config: " << config_path << '\n';
      return kExitConfig;
    }
    try {
      in >> config;
    } catch (const json::exception& e) {
      std::cerr << "config parse error: " << e.what() << '\n';
      return kExitConfig;
    }
  }

  RunSetup setup;
  try {
    setup = parse_run_config(config);
    setup.problem.validate();
  } catch (const std::exception& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kExitConfig;
  }

  const std::filesystem::path dir = output_dir(config);
  std::filesystem::create_directories(dir);
  const double fq = setup.problem.model(setup.problem.query);

  try {
    // Per-seed traces at the configured bound.
    std::vector<cfx::Trace> traces;
    for (std::uint64_t seed : setup.seeds) {
      traces.push_back(run_strategy(setup, setup.problem, seed));
      write_trace(dir / ("trace_" + std::to_string(seed) + ".jsonl"),
                  traces.back());
    }

    json summary;
    summary["strategy"] = setup.strategy;
    summary["budget"] = setup.budget;
    summary["epsilon"] = setup.options.epsilon;
    summary["potential"] = {{"kind", cfx::to_string(setup.potential.kind)},
                            {"center", setup.potential.center},
                            {"width", setup.potential.width}};
    summary["query_output"] = fq;
    double mean = 0.0;
    json per_seed = json::array();
    for (std::size_t i = 0; i < traces.size(); ++i) {
      json row;
      row["seed"] = setup.seeds[i];
      row["terminal_incumbent"] = traces[i].best_rho;
      row["target_reached"] = traces[i].target_reached;
      row["rho_star_estimate"] = traces[i].rho_star_estimate;
      row["rho_star_is_oracle"] = traces[i].rho_star_is_oracle;
      per_seed.push_back(row);
      mean += traces[i].best_rho;
    }
    mean /= static_cast<double>(traces.size());
    double var = 0.0;
    for (const auto& tr : traces) {
      var += (tr.best_rho - mean) * (tr.best_rho - mean);
    }
    var = traces.size() > 1 ? var / (traces.size() - 1.0) : 0.0;
    summary["seeds"] = per_seed;
    summary["mean_terminal_incumbent"] = mean;
    summary["stderr_terminal_incumbent"] =
        std::sqrt(var / static_cast<double>(traces.size()));
    {
      std::ofstream out(dir / "summary.json");
      out << summary.dump(2) << '\n';
    }

    // Counterfactual table: one row per sparsity bound, best seed per bound.
    std::ofstream csv(dir / "counterfactuals.csv");
    csv << "target,l0_bound";
    for (const auto& name : setup.feature_names) csv << ",change_" << name;
    csv << ",result_change\n";
    // Semicolon-separated so the field never collides with the CSV commas.
    const std::string target_desc =
        cfx::to_string(setup.potential.kind) +
        "(center=" + format_double(setup.potential.center) +
        ";width=" + format_double(setup.potential.width) + ")";
    for (const auto& bound : setup.l0_sweep) {
      cfx::SearchProblem pb = setup.problem;
      pb.l0_bound = bound;
      const cfx::Trace* best = nullptr;
      std::vector<cfx::Trace> sweep_traces;
      if (bound == setup.problem.l0_bound) {
        sweep_traces = traces;  // the per-seed runs already used this bound
      } else {
        for (std::uint64_t seed : setup.seeds) {
          sweep_traces.push_back(run_strategy(setup, pb, seed));
        }
      }
      for (const auto& tr : sweep_traces) {
        if (!best || tr.best_rho > best->best_rho) best = &tr;
      }
      csv << target_desc << ','
          << (bound ? std::to_string(*bound) : std::string("inf"));
      for (int j = 0; j < setup.problem.dim(); ++j) {
        csv << ',' << format_double(best->best_x[j] - setup.problem.query[j]);
      }
      csv << ',' << format_double(best->best_f - fq) << '\n';
    }
  } catch (const cfx::InfeasibleError& e) {
    std::cerr << "infeasible constraint set: " << e.what() << '\n';
    return kExitInfeasible;
  } catch (const std::exception& e) {
    std::cerr << "run failed: " << e.what() << '\n';
    return kExitConfig;
  }
  return kExitOk;
}

int cmd_quadrature(const std::string& family, int n,
                   const std::string& out_path) {
  if (n < 1 || n > 256) {
    std::cerr << "n must be in [1, 256]\n";
    return kExitConfig;
  }
  cfx::QuadratureRule rule;
  if (family == "hermite") {
    rule = cfx::gauss_hermite(n);
  } else if (family == "legendre") {
    rule = cfx::gauss_legendre(n);
  } else {
    std::cerr << "unknown family: " << family << '\n';
    return kExitConfig;
  }
  std::ofstream out(out_path);
  if (!out) {
    std::cerr << "cannot write " << out_path << '\n';
    return kExitConfig;
  }
  out << "# mass=" << format_double(rule.mass) << '\n';
  out << "node,weight\n";
  for (int i = 0; i < rule.nodes.size(); ++i) {
    out << format_double(rule.nodes[i]) << ','
        << format_double(rule.weights[i]) << '\n';
  }
  return kExitOk;
}

struct CheckResult {
  std::string name;
  double max_error = 0.0;
  double tolerance = 0.0;
  bool ok() const { return max_error <= tolerance; }
};

// The oracle-equivalence suite: closed forms against independent numerics.
std::vector<CheckResult> run_validation() {
  std::vector<CheckResult> results;
  cfx::Rng rng(20260801);

  {
    CheckResult check{"ei-cfx closed form vs 64-node quadrature", 0.0, 1e-8};
    const cfx::QuadratureRule gh = cfx::gauss_hermite(64);
    const double span = gh.nodes.cwiseAbs().maxCoeff() + 2.0;
    int done = 0;
    while (done < 500) {
      const auto kind = static_cast<cfx::PotentialKind>(rng.uniform_int(3));
      const double width =
          std::exp(rng.uniform(std::log(0.1), std::log(10.0)));
      const cfx::PotentialSpec spec(kind, rng.uniform(-2.0, 2.0), width);
      const double sigma =
          width * std::exp(rng.uniform(std::log(1e-6), std::log(1e-3)));
      const double mu = spec.center + width * rng.uniform(-1.5, 1.5);
      const double rho_star =
          rng.uniform() < 0.1
              ? 0.0
              : std::exp(rng.uniform(std::log(1e-6),
                                     std::log(cfx::kExpMinusOne)));
      // Usable only while every superlevel kink stays outside the node
      // span; the kinked regime is covered by the piecewise oracle in the
      // test suite.
      const auto [r0, rm1] = cfx::superlevel_z_roots(rho_star);
      bool kink = false;
      for (double edge : {width * r0, width * rm1, -width * r0, -width * rm1}) {
        if (std::isfinite(edge) &&
            std::abs(edge - (mu - spec.center)) < span * sigma) {
          kink = true;
        }
      }
      if (kink) continue;
      const double cf = cfx::ei_cfx_value(spec, mu, sigma, rho_star);
      const double qd =
          cfx::ei_cfx_gauss_hermite(spec, mu, sigma, rho_star, gh);
      const double rel = std::abs(cf - qd) /
                         std::max({std::abs(cf), std::abs(qd), 1e-4});
      check.max_error = std::max(check.max_error, rel);
      ++done;
    }
    results.push_back(check);
  }

  {
    CheckResult check{"ei-cfx gradient vs central differences", 0.0, 1e-5};
    for (int trial = 0; trial < 50; ++trial) {
      cfx::SampleSet data;
      for (int i = 0; i < 7; ++i) {
        Eigen::VectorXd x(2);
        x << rng.uniform(-3.0, 3.0), rng.uniform(-3.0, 3.0);
        if (data.size() > 0 && data.min_distance(x) < 1e-2) {
          --i;
          continue;
        }
        data.add(x, std::sin(1.3 * x.sum()) + 0.2 * x.squaredNorm());
      }
      const cfx::GpPosterior post = cfx::fit(data, cfx::KernelParams{});
      const cfx::PotentialSpec spec(
          static_cast<cfx::PotentialKind>(rng.uniform_int(3)),
          rng.uniform(-1.0, 1.0), rng.uniform(0.3, 2.0));
      const cfx::AcquisitionInputs inputs{
          &post, spec, rng.uniform(0.0, cfx::kExpMinusOne * 0.9)};
      Eigen::VectorXd x(2);
      x << rng.uniform(-3.0, 3.0), rng.uniform(-3.0, 3.0);
      const Eigen::VectorXd ga = cfx::ei_cfx_grad(inputs, x);
      const Eigen::VectorXd gf = cfx::ei_cfx_grad_fd(inputs, x, 1e-5);
      const double rel = (ga - gf).norm() / std::max(gf.norm(), 1e-9);
      check.max_error = std::max(check.max_error, rel);
    }
    results.push_back(check);
  }

  {
    CheckResult check{"quadrature exactness to degree 2n-1", 0.0, 1e-10};
    for (int n = 1; n <= 10; ++n) {
      const cfx::QuadratureRule h = cfx::gauss_hermite(n);
      const cfx::QuadratureRule l = cfx::gauss_legendre(n);
      for (int k = 0; k <= 2 * n - 1; ++k) {
        double m = cfx::kSqrt2Pi;
        for (int j = k - 1; j > 0; j -= 2) m *= j;
        const double want_h = k % 2 == 1 ? 0.0 : m;
        const double got_h =
            cfx::integrate(h, [k](double x) { return std::pow(x, k); });
        check.max_error =
            std::max(check.max_error, std::abs(got_h - want_h) / m);

        const double want_l = k % 2 == 1 ? 0.0 : 2.0 / (k + 1);
        const double got_l =
            cfx::integrate(l, [k](double x) { return std::pow(x, k); });
        check.max_error = std::max(check.max_error,
                                   std::abs(got_l - want_l) * (k + 1) / 2.0);
      }
    }
    results.push_back(check);
  }

  {
    CheckResult check{"lambert w round trip", 0.0, 1e-12};
    for (int i = 0; i < 2000; ++i) {
      const double c0 = -cfx::kExpMinusOne + 10.0 * rng.uniform();
      const double w0 = cfx::lambert_w(cfx::WBranch::k0, c0);
      check.max_error =
          std::max(check.max_error, std::abs(w0 * std::exp(w0) - c0) /
                                        std::max(std::abs(c0), 1.0));
      const double cm =
          -std::exp(rng.uniform(std::log(1e-12), std::log(cfx::kExpMinusOne)));
      const double wm = cfx::lambert_w(cfx::WBranch::km1, cm);
      check.max_error = std::max(
          check.max_error, std::abs(wm * std::exp(wm) - cm) / std::abs(cm));
    }
    results.push_back(check);
  }
  return results;
}

int cmd_validate() {
  const std::vector<CheckResult> results = run_validation();
  bool all_ok = true;
  std::printf("%-45s %-12s %-12s %s\n", "check", "max error", "tolerance",
              "status");
  for (const auto& r : results) {
    std::printf("%-45s %-12.3e %-12.3e %s\n", r.name.c_str(), r.max_error,
                r.tolerance, r.ok() ? "pass" : "FAIL");
    all_ok = all_ok && r.ok();
  }
  return all_ok ? kExitOk : kExitValidation;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"counterfactual search via potential-based Bayesian "
               "optimisation"};
  app.require_subcommand(1);

  std::string config_path;
  CLI::App* run = app.add_subcommand("run", "execute a configured experiment");
  run->add_option("config", config_path, "JSON run configuration")
      ->required();

  std::string family = "hermite";
  int n = 8;
  std::string out_path = "rule.csv";
  CLI::App* quad =
      app.add_subcommand("quadrature", "emit a Gaussian quadrature rule");
  quad->add_option("--family", family, "hermite or legendre")->required();
  quad->add_option("--n", n, "number of nodes")->required();
  quad->add_option("--out", out_path, "output CSV path")->required();

  CLI::App* validate =
      app.add_subcommand("validate", "run the numerical self-check suite");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitConfig;
  }

  if (run->parsed()) return cmd_run(config_path);
  if (quad->parsed()) return cmd_quadrature(family, n, out_path);
  if (validate->parsed()) return cmd_validate();
  return kExitConfig;
}
