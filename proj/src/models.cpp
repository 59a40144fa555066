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

#include "cfx/models.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <memory>
#include <sstream>
#include <stdexcept>

#include "json.hpp"

namespace cfx {
namespace {

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> cells;
  std::string cell;
  std::stringstream ss(line);
  while (std::getline(ss, cell, ',')) cells.push_back(cell);
  if (!line.empty() && line.back() == ',') cells.emplace_back();
  return cells;
}

double parse_numeric(const std::string& cell, const std::string& column) {
  std::size_t pos = 0;
  double v = 0.0;
  try {
    v = std::stod(cell, &pos);
  } catch (const std::exception&) {
    throw std::runtime_error("non-numeric cell '" + cell + "' in column " +
                             column);
  }
  if (pos != cell.size()) {
    throw std::runtime_error("non-numeric cell '" + cell + "' in column " +
                             column);
  }
  return v;
}

int category_index(const ColumnSpec& spec, const std::string& value) {
  const auto it =
      std::find(spec.categories.begin(), spec.categories.end(), value);
  if (it == spec.categories.end()) {
    throw std::runtime_error("unknown category '" + value + "' in column " +
                             spec.name);
  }
  return static_cast<int>(it - spec.categories.begin());
}

}  // namespace

double LogisticModel::predict(
    const Eigen::Ref<const Eigen::VectorXd>& x) const {
  if (x.size() != weights.size()) {
    throw std::invalid_argument("LogisticModel: dimension mismatch");
  }
  const double t = weights.dot(x) + bias;
  // Stable sigmoid on both tails.
  if (t >= 0.0) return 1.0 / (1.0 + std::exp(-t));
  const double e = std::exp(t);
  return e / (1.0 + e);
}

Eigen::VectorXd LogisticModel::gradient(
    const Eigen::Ref<const Eigen::VectorXd>& x) const {
  const double p = predict(x);
  return (p * (1.0 - p)) * weights;
}

double StepEnsembleModel::predict(
    const Eigen::Ref<const Eigen::VectorXd>& x) const {
  double total = base;
  for (const StepRule& rule : rules) {
    if (rule.dim < 0 || rule.dim >= x.size()) {
      throw std::invalid_argument("StepEnsembleModel: dimension mismatch");
    }
    if (x[rule.dim] >= rule.threshold) total += rule.value;
  }
  return total;
}

TabularDataset::TabularDataset(std::vector<ColumnSpec> schema,
                               std::vector<std::vector<std::string>> rows)
    : schema_(std::move(schema)), rows_(std::move(rows)) {
  means_.assign(schema_.size(), 0.0);
  stds_.assign(schema_.size(), 1.0);
  encoded_dim_ = 0;
  for (std::size_t c = 0; c < schema_.size(); ++c) {
    const ColumnSpec& spec = schema_[c];
    encoded_dim_ += spec.kind == ColumnKind::categorical
                        ? static_cast<int>(spec.categories.size())
                        : 1;
    if (spec.kind != ColumnKind::numeric) continue;
    double mean = 0.0;
    for (const auto& row : rows_) {
      mean += parse_numeric(row.at(c), spec.name);
    }
    if (!rows_.empty()) mean /= static_cast<double>(rows_.size());
    double var = 0.0;
    for (const auto& row : rows_) {
      const double d = parse_numeric(row.at(c), spec.name) - mean;
      var += d * d;
    }
    if (!rows_.empty()) var /= static_cast<double>(rows_.size());
    means_[c] = mean;
    stds_[c] = var > 0.0 ? std::sqrt(var) : 1.0;  // degenerate-std fallback
  }
}

Eigen::VectorXd TabularDataset::encode_row(
    const std::vector<std::string>& row) const {
  if (row.size() != schema_.size()) {
    throw std::runtime_error("encode_row: wrong number of cells");
  }
  Eigen::VectorXd out = Eigen::VectorXd::Zero(encoded_dim_);
  int at = 0;
  for (std::size_t c = 0; c < schema_.size(); ++c) {
    const ColumnSpec& spec = schema_[c];
    switch (spec.kind) {
      case ColumnKind::numeric:
        out[at++] = (parse_numeric(row[c], spec.name) - means_[c]) / stds_[c];
        break;
      case ColumnKind::ordinal:
        out[at++] = static_cast<double>(category_index(spec, row[c]));
        break;
      case ColumnKind::categorical:
        out[at + category_index(spec, row[c])] = 1.0;
        at += static_cast<int>(spec.categories.size());
        break;
    }
  }
  return out;
}

Eigen::VectorXd TabularDataset::encoded(int row_index) const {
  return encode_row(rows_.at(static_cast<std::size_t>(row_index)));
}

std::vector<std::string> TabularDataset::decode_row(
    const Eigen::Ref<const Eigen::VectorXd>& encoded) const {
  if (encoded.size() != encoded_dim_) {
    throw std::runtime_error("decode_row: wrong encoded dimension");
  }
  std::vector<std::string> row;
  row.reserve(schema_.size());
  int at = 0;
  for (std::size_t c = 0; c < schema_.size(); ++c) {
    const ColumnSpec& spec = schema_[c];
    std::ostringstream cell;
    switch (spec.kind) {
      case ColumnKind::numeric:
        cell.precision(17);
        cell << encoded[at++] * stds_[c] + means_[c];
        break;
      case ColumnKind::ordinal: {
        const int idx = static_cast<int>(std::lround(encoded[at++]));
        cell << spec.categories.at(static_cast<std::size_t>(idx));
        break;
      }
      case ColumnKind::categorical: {
        int best = 0;
        for (int j = 1; j < static_cast<int>(spec.categories.size()); ++j) {
          if (encoded[at + j] > encoded[at + best]) best = j;
        }
        cell << spec.categories.at(static_cast<std::size_t>(best));
        at += static_cast<int>(spec.categories.size());
        break;
      }
    }
    row.push_back(cell.str());
  }
  return row;
}

std::vector<std::string> TabularDataset::feature_names() const {
  std::vector<std::string> names;
  for (const ColumnSpec& spec : schema_) {
    if (spec.kind == ColumnKind::categorical) {
      for (const std::string& cat : spec.categories) {
        names.push_back(spec.name + "=" + cat);
      }
    } else {
      names.push_back(spec.name);
    }
  }
  return names;
}

std::vector<ColumnSpec> load_schema(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open schema file: " + path);
  nlohmann::json j;
  in >> j;
  std::vector<ColumnSpec> schema;
  for (const auto& col : j.at("columns")) {
    ColumnSpec spec;
    spec.name = col.at("name").get<std::string>();
    const std::string kind = col.at("kind").get<std::string>();
    if (kind == "numeric") {
      spec.kind = ColumnKind::numeric;
    } else if (kind == "ordinal") {
      spec.kind = ColumnKind::ordinal;
    } else if (kind == "categorical") {
      spec.kind = ColumnKind::categorical;
    } else {
      throw std::runtime_error("unknown column kind: " + kind);
    }
    if (spec.kind != ColumnKind::numeric) {
      for (const auto& cat : col.at("categories")) {
        spec.categories.push_back(cat.get<std::string>());
      }
    }
    schema.push_back(std::move(spec));
  }
  return schema;
}

TabularDataset load_dataset(const std::string& csv_path,
                            const std::vector<ColumnSpec>& schema) {
  std::ifstream in(csv_path);
  if (!in) throw std::runtime_error("cannot open dataset file: " + csv_path);
  std::string line;
  if (!std::getline(in, line)) {
    throw std::runtime_error("empty dataset file: " + csv_path);
  }
  if (!line.empty() && line.back() == '\r') line.pop_back();
  const std::vector<std::string> header = split_csv_line(line);

  // Column order in the file may differ from the schema; build the map.
  std::vector<int> source(schema.size(), -1);
  for (std::size_t c = 0; c < schema.size(); ++c) {
    const auto it = std::find(header.begin(), header.end(), schema[c].name);
    if (it == header.end()) {
      throw std::runtime_error("missing column in CSV header: " +
                               schema[c].name);
    }
    source[c] = static_cast<int>(it - header.begin());
  }

  std::vector<std::vector<std::string>> rows;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const std::vector<std::string> cells = split_csv_line(line);
    std::vector<std::string> row(schema.size());
    for (std::size_t c = 0; c < schema.size(); ++c) {
      row[c] = cells.at(static_cast<std::size_t>(source[c]));
    }
    rows.push_back(std::move(row));
  }
  return TabularDataset(schema, std::move(rows));
}

LoadedModel load_model(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open model file: " + path);
  nlohmann::json j;
  in >> j;
  LoadedModel out;
  out.type = j.at("type").get<std::string>();
  if (out.type == "logistic") {
    auto model = std::make_shared<LogisticModel>();
    const auto& w = j.at("weights");
    model->weights.resize(static_cast<Eigen::Index>(w.size()));
    for (std::size_t i = 0; i < w.size(); ++i) {
      model->weights[static_cast<Eigen::Index>(i)] = w[i].get<double>();
    }
    model->bias = j.at("bias").get<double>();
    out.dim = static_cast<int>(model->weights.size());
    out.predict = [model](const Eigen::VectorXd& x) {
      return model->predict(x);
    };
    out.gradient = [model](const Eigen::VectorXd& x) {
      return model->gradient(x);
    };
  } else if (out.type == "step_ensemble") {
    auto model = std::make_shared<StepEnsembleModel>();
    model->base = j.at("base").get<double>();
    int dim = 0;
    for (const auto& r : j.at("rules")) {
      StepRule rule;
      rule.dim = r.at("dim").get<int>();
      rule.threshold = r.at("threshold").get<double>();
      rule.value = r.at("value").get<double>();
      dim = std::max(dim, rule.dim + 1);
      model->rules.push_back(rule);
    }
    out.dim = j.contains("dim") ? j.at("dim").get<int>() : dim;
    out.predict = [model](const Eigen::VectorXd& x) {
      return model->predict(x);
    };
  } else {
    throw std::runtime_error("unknown model type: " + out.type);
  }
  return out;
}

}  // namespace cfx
