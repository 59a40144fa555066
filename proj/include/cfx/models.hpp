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

#ifndef CFX_MODELS_HPP_
#define CFX_MODELS_HPP_

#include <Eigen/Core>
#include <functional>
#include <string>
#include <vector>

namespace cfx {

/// sigmoid(w^T x + b); outputs strictly in (0, 1).
struct LogisticModel {
  Eigen::VectorXd weights;
  double bias = 0.0;

  double predict(const Eigen::Ref<const Eigen::VectorXd>& x) const;
  Eigen::VectorXd gradient(const Eigen::Ref<const Eigen::VectorXd>& x) const;
};

/// One axis-aligned step: adds `value` when x[dim] >= threshold.
struct StepRule {
  int dim = 0;
  double threshold = 0.0;
  double value = 0.0;
};

/// Piecewise-constant sum of axis-aligned steps; a desk-scale stand-in for
/// a boosted-tree regressor. Nondifferentiable by construction.
struct StepEnsembleModel {
  double base = 0.0;
  std::vector<StepRule> rules;

  double predict(const Eigen::Ref<const Eigen::VectorXd>& x) const;
};

enum class ColumnKind { numeric, ordinal, categorical };

struct ColumnSpec {
  std::string name;
  ColumnKind kind = ColumnKind::numeric;
  /// Declared value order for ordinal columns, category list for
  /// categorical ones; empty for numeric.
  std::vector<std::string> categories;
};

/// A parsed CSV with fitted transforms: numeric columns standardized
/// (zero-variance columns fall back to unit scale), ordinals integer-coded
/// in declared order, categoricals one-hot. decode inverts encode exactly.
class TabularDataset {
 public:
  TabularDataset() = default;
  TabularDataset(std::vector<ColumnSpec> schema,
                 std::vector<std::vector<std::string>> rows);

  int row_count() const { return static_cast<int>(rows_.size()); }
  int encoded_dim() const { return encoded_dim_; }
  const std::vector<ColumnSpec>& schema() const { return schema_; }
  double column_mean(int col) const { return means_[static_cast<std::size_t>(col)]; }
  double column_std(int col) const { return stds_[static_cast<std::size_t>(col)]; }

  Eigen::VectorXd encode_row(const std::vector<std::string>& row) const;
  Eigen::VectorXd encoded(int row_index) const;
  std::vector<std::string> decode_row(
      const Eigen::Ref<const Eigen::VectorXd>& encoded) const;

  /// Names of the encoded feature axes (one-hot columns expanded).
  std::vector<std::string> feature_names() const;

 private:
  std::vector<ColumnSpec> schema_;
  std::vector<std::vector<std::string>> rows_;
  std::vector<double> means_;
  std::vector<double> stds_;
  int encoded_dim_ = 0;
};

/// Parse a schema description (JSON) from a file.
std::vector<ColumnSpec> load_schema(const std::string& path);

/// Load a CSV with a header row matching the schema. Throws on unknown
/// categories, missing columns or non-numeric cells in numeric columns.
TabularDataset load_dataset(const std::string& csv_path,
                            const std::vector<ColumnSpec>& schema);

/// Model file loading: a JSON object with "type" of "logistic" or
/// "step_ensemble" plus coefficients. Returns predict/gradient closures.
struct LoadedModel {
  std::string type;
  int dim = 0;
  std::function<double(const Eigen::VectorXd&)> predict;
  /// Analytic gradient when the model is differentiable, else empty.
  std::function<Eigen::VectorXd(const Eigen::VectorXd&)> gradient;
};
LoadedModel load_model(const std::string& path);

}  // namespace cfx

#endif  // CFX_MODELS_HPP_
