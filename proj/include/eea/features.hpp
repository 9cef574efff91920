#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "eea/data.hpp"

namespace eea {

struct FeatureMatrix {
  std::vector<std::string> names;
  std::size_t n_rows = 0;
  std::vector<double> values;  // row-major, n_rows x names.size()

  std::size_t n_cols() const { return names.size(); }
  double at(std::size_t row, std::size_t col) const {
    return values[row * names.size() + col];
  }
  double& at(std::size_t row, std::size_t col) {
    return values[row * names.size() + col];
  }
  std::span<const double> row(std::size_t r) const {
    return {values.data() + r * names.size(), names.size()};
  }

  FeatureMatrix select_rows(std::span<const std::size_t> rows) const;
};

// Fixed encoding order; categoricals one-hot with a fixed level order so that
// runs are deterministic.
const std::vector<std::string>& feature_schema();

FeatureMatrix encode_features(const ScenarioDataset& dataset);

}  // namespace eea
