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
#include <cstdio>
#include <filesystem>
#include <fstream>

#include "cfx/models.hpp"
#include "cfx/rng.hpp"
#include "doctest.h"

using cfx::ColumnKind;
using cfx::ColumnSpec;
using cfx::LogisticModel;
using cfx::StepEnsembleModel;
using cfx::StepRule;
using cfx::TabularDataset;

namespace {

std::filesystem::path temp_file(const std::string& name) {
  return std::filesystem::temp_directory_path() / ("cfx_models_" + name);
}

}  // namespace

TEST_CASE("logistic hand values") {
  LogisticModel m;
  m.weights = Eigen::VectorXd::Zero(2);
  m.bias = 0.0;
  Eigen::VectorXd x(2);
  x << 3.0, -4.0;
  CHECK(m.predict(x) == doctest::Approx(0.5));
  m.bias = 40.0;
  CHECK(m.predict(x) == doctest::Approx(1.0).epsilon(1e-12));
  m.bias = 0.0;
  m.weights << 1.0, -1.0;
  Eigen::VectorXd y(2);
  y << 2.0, 1.0;
  CHECK(m.predict(y) ==
        doctest::Approx(1.0 / (1.0 + std::exp(-1.0))).epsilon(1e-15));
}

TEST_CASE("logistic output range and monotonicity") {
  LogisticModel m;
  m.weights = Eigen::VectorXd::Ones(1);
  cfx::Rng rng(41);
  double prev_t = -1e9, prev_p = 0.0;
  std::vector<double> ts;
  // Strict openness is representable in double only up to |t| ~ 36.
  for (int i = 0; i < 500; ++i) ts.push_back(rng.uniform(-30.0, 30.0));
  std::sort(ts.begin(), ts.end());
  for (double t : ts) {
    Eigen::VectorXd x(1);
    x[0] = t;
    const double p = m.predict(x);
    CHECK(p > 0.0);
    CHECK(p < 1.0);
    if (t > prev_t) CHECK(p >= prev_p);
    prev_t = t;
    prev_p = p;
  }
  // Saturation at extreme logits stays finite and ordered.
  Eigen::VectorXd lo(1), hi(1);
  lo[0] = -700.0;
  hi[0] = 700.0;
  CHECK(m.predict(lo) > 0.0);
  CHECK(m.predict(hi) <= 1.0);
  CHECK(m.predict(hi) == doctest::Approx(1.0).epsilon(1e-15));
}

TEST_CASE("logistic gradient matches finite differences") {
  LogisticModel m;
  m.weights = Eigen::VectorXd(3);
  m.weights << 0.5, -1.2, 2.0;
  m.bias = 0.3;
  cfx::Rng rng(42);
  for (int i = 0; i < 100; ++i) {
    Eigen::VectorXd x(3);
    for (int j = 0; j < 3; ++j) x[j] = rng.uniform(-2.0, 2.0);
    const Eigen::VectorXd g = m.gradient(x);
    for (int j = 0; j < 3; ++j) {
      Eigen::VectorXd xp = x, xm = x;
      xp[j] += 1e-6;
      xm[j] -= 1e-6;
      const double fd = (m.predict(xp) - m.predict(xm)) / 2e-6;
      CHECK(g[j] == doctest::Approx(fd).epsilon(1e-6));
    }
  }
}

TEST_CASE("step ensemble hand values") {
  StepEnsembleModel m;
  m.base = 2.5;
  Eigen::VectorXd x = Eigen::VectorXd::Zero(2);
  CHECK(m.predict(x) == 2.5);

  m.rules.push_back({0, 1.0, 0.7});
  Eigen::VectorXd left(2), right(2);
  left << 1.0 - 1e-9, 0.0;
  right << 1.0, 0.0;
  CHECK(m.predict(right) - m.predict(left) == doctest::Approx(0.7));
}

TEST_CASE("step ensemble matches a direct summation oracle") {
  cfx::Rng rng(43);
  StepEnsembleModel m;
  m.base = rng.uniform(-1.0, 1.0);
  for (int i = 0; i < 40; ++i) {
    m.rules.push_back({static_cast<int>(rng.uniform_int(4)),
                       rng.uniform(-2.0, 2.0), rng.uniform(-0.5, 0.5)});
  }
  for (int i = 0; i < 500; ++i) {
    Eigen::VectorXd x(4);
    for (int j = 0; j < 4; ++j) x[j] = rng.uniform(-3.0, 3.0);
    double want = m.base;
    for (const StepRule& r : m.rules) {
      if (x[r.dim] >= r.threshold) want += r.value;
    }
    CHECK(m.predict(x) == want);
  }
}

TEST_CASE("step ensemble is flat off its thresholds") {
  StepEnsembleModel m;
  m.base = 0.3;
  m.rules.push_back({0, 0.5, 1.0});
  m.rules.push_back({1, -0.25, -2.0});
  cfx::Rng rng(44);
  for (int i = 0; i < 300; ++i) {
    Eigen::VectorXd x(2);
    x << rng.uniform(-3.0, 3.0), rng.uniform(-3.0, 3.0);
    bool near = false;
    for (const StepRule& r : m.rules) {
      if (std::abs(x[r.dim] - r.threshold) < 1e-3) near = true;
    }
    if (near) continue;
    for (int j = 0; j < 2; ++j) {
      Eigen::VectorXd xp = x, xm = x;
      xp[j] += 1e-6;
      xm[j] -= 1e-6;
      CHECK((m.predict(xp) - m.predict(xm)) == 0.0);
    }
  }
}

TEST_CASE("single-row dataset standardizes to zero with unit fallback") {
  const std::vector<ColumnSpec> schema{{"v", ColumnKind::numeric, {}}};
  const TabularDataset data(schema, {{"7.25"}});
  const Eigen::VectorXd enc = data.encoded(0);
  REQUIRE(enc.size() == 1);
  CHECK(enc[0] == 0.0);
  CHECK(data.column_std(0) == 1.0);
  const auto decoded = data.decode_row(enc);
  CHECK(std::stod(decoded[0]) == doctest::Approx(7.25).epsilon(1e-15));
}

TEST_CASE("two-category one-hot rows sum to one") {
  const std::vector<ColumnSpec> schema{
      {"c", ColumnKind::categorical, {"a", "b"}}};
  const TabularDataset data(schema, {{"a"}, {"b"}, {"a"}});
  CHECK(data.encoded_dim() == 2);
  for (int i = 0; i < data.row_count(); ++i) {
    CHECK(data.encoded(i).sum() == doctest::Approx(1.0));
    CHECK(data.encoded(i).maxCoeff() == 1.0);
  }
}

TEST_CASE("round trip on a generated CSV fixture") {
  const auto csv = temp_file("roundtrip.csv");
  const auto schema_path = temp_file("roundtrip_schema.json");
  {
    std::ofstream out(csv);
    out << "num,level,kind\n";
    cfx::Rng rng(45);
    const char* levels[3] = {"low", "mid", "high"};
    const char* kinds[2] = {"x", "y"};
    for (int i = 0; i < 100; ++i) {
      out << rng.uniform(-50.0, 50.0) << ','
          << levels[rng.uniform_int(3)] << ',' << kinds[rng.uniform_int(2)]
          << '\n';
    }
  }
  {
    std::ofstream out(schema_path);
    out << R"({"columns":[
      {"name":"num","kind":"numeric"},
      {"name":"level","kind":"ordinal","categories":["low","mid","high"]},
      {"name":"kind","kind":"categorical","categories":["x","y"]}]})";
  }
  const auto schema = cfx::load_schema(schema_path.string());
  const TabularDataset data = cfx::load_dataset(csv.string(), schema);
  REQUIRE(data.row_count() == 100);
  CHECK(data.encoded_dim() == 4);  // numeric + ordinal + 2 one-hot
  for (int i = 0; i < 100; ++i) {
    const Eigen::VectorXd enc = data.encoded(i);
    const auto decoded = data.decode_row(enc);
    const Eigen::VectorXd re = data.encode_row(decoded);
    CHECK((re - enc).cwiseAbs().maxCoeff() <= 1e-12);
  }
  std::filesystem::remove(csv);
  std::filesystem::remove(schema_path);
}

TEST_CASE("encoding is deterministic") {
  const std::vector<ColumnSpec> schema{
      {"n", ColumnKind::numeric, {}},
      {"c", ColumnKind::categorical, {"p", "q"}}};
  const std::vector<std::vector<std::string>> rows{{"1.5", "p"},
                                                   {"-2.25", "q"},
                                                   {"0.125", "p"}};
  const TabularDataset a(schema, rows);
  const TabularDataset b(schema, rows);
  for (int i = 0; i < 3; ++i) {
    const Eigen::VectorXd ea = a.encoded(i);
    const Eigen::VectorXd eb = b.encoded(i);
    CHECK(std::memcmp(ea.data(), eb.data(),
                      sizeof(double) * static_cast<std::size_t>(ea.size())) ==
          0);
  }
}

TEST_CASE("dataset error paths") {
  const std::vector<ColumnSpec> schema{
      {"n", ColumnKind::numeric, {}},
      {"c", ColumnKind::categorical, {"p", "q"}}};
  const TabularDataset data(schema, {{"1.0", "p"}});
  CHECK_THROWS_WITH_AS(data.encode_row({"1.0", "zebra"}),
                       doctest::Contains("unknown category"),
                       std::runtime_error);
  CHECK_THROWS_WITH_AS(data.encode_row({"abc", "p"}),
                       doctest::Contains("non-numeric"), std::runtime_error);

  const auto csv = temp_file("badheader.csv");
  {
    std::ofstream out(csv);
    out << "wrong,c\n1.0,p\n";
  }
  CHECK_THROWS_WITH_AS(cfx::load_dataset(csv.string(), schema),
                       doctest::Contains("missing column"),
                       std::runtime_error);
  std::filesystem::remove(csv);
}

TEST_CASE("model files load and predict") {
  const auto path = temp_file("logistic.json");
  {
    std::ofstream out(path);
    out << R"({"type":"logistic","weights":[1.0,-1.0],"bias":0.0})";
  }
  const cfx::LoadedModel m = cfx::load_model(path.string());
  CHECK(m.type == "logistic");
  CHECK(m.dim == 2);
  Eigen::VectorXd x(2);
  x << 2.0, 1.0;
  CHECK(m.predict(x) ==
        doctest::Approx(1.0 / (1.0 + std::exp(-1.0))).epsilon(1e-15));
  REQUIRE(static_cast<bool>(m.gradient));

  const auto step_path = temp_file("step.json");
  {
    std::ofstream out(step_path);
    out << R"({"type":"step_ensemble","base":1.0,
          "rules":[{"dim":0,"threshold":0.5,"value":2.0}]})";
  }
  const cfx::LoadedModel s = cfx::load_model(step_path.string());
  CHECK(s.type == "step_ensemble");
  Eigen::VectorXd z = Eigen::VectorXd::Ones(1);
  CHECK(s.predict(z) == 3.0);
  CHECK_FALSE(static_cast<bool>(s.gradient));
  std::filesystem::remove(path);
  std::filesystem::remove(step_path);
}
