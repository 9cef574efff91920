#pragma once

#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "eea/models.hpp"
#include "json.hpp"

// Internal model representations shared by the solver translation units and
// the persistence loader.

namespace eea::detail {

using nlohmann::json;

// Doubles travel through persistence as hexfloat strings so a round trip is
// bit-exact.
inline std::string hex_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%a", v);
  return buf;
}

inline double unhex_double(const std::string& text) {
  return std::strtod(text.c_str(), nullptr);
}

inline json vec_to_json(std::span<const double> v) {
  json arr = json::array();
  for (double x : v) arr.push_back(hex_double(x));
  return arr;
}

inline std::vector<double> vec_from_json(const json& arr) {
  std::vector<double> v;
  v.reserve(arr.size());
  for (const auto& item : arr) v.push_back(unhex_double(item.get<std::string>()));
  return v;
}

double sigmoid(double x);

// --------------------------------------------------------------------------
// Linear models (logistic regression and elastic-net logistic). Coefficients
// live in internally standardized coordinates.

class LinearLogisticModel : public TrainedModel {
 public:
  double intercept = 0.0;
  std::vector<double> beta;   // per feature, standardized scale
  std::vector<double> mean;   // standardization offsets
  std::vector<double> scale;  // standardization divisors (1 for constants)

  static std::unique_ptr<LinearLogisticModel> fit_logistic(
      const ModelSpec& spec, const FeatureMatrix& X, std::span<const double> y);
  static std::unique_ptr<LinearLogisticModel> fit_elastic_net(
      const ModelSpec& spec, const FeatureMatrix& X, std::span<const double> y);
  static std::unique_ptr<TrainedModel> from_json(const ModelSpec& spec,
                                                 std::vector<std::string> schema,
                                                 const json& params);

 protected:
  std::vector<double> predict_impl(const FeatureMatrix& X) const override;
  void serialize_parameters(void* json_object) const override;
};

// --------------------------------------------------------------------------
// Shared quantile binning for the tree learners. Edges are stored in original
// feature units; bin(v) = index of the first edge >= v. Quantile placement
// makes binning equivariant under strictly monotone feature transforms.

struct BinnedFeatures {
  std::size_t n_rows = 0;
  std::size_t n_features = 0;
  std::vector<std::vector<double>> edges;  // ascending, per feature
  std::vector<std::uint8_t> codes;         // row-major n_rows x n_features

  int n_bins(std::size_t f) const { return static_cast<int>(edges[f].size()) + 1; }
};

BinnedFeatures build_bins(const FeatureMatrix& X, int max_bins);
std::uint8_t code_for(const std::vector<double>& edges, double v);
std::vector<std::uint8_t> codes_for(const std::vector<std::vector<double>>& edges,
                                    const FeatureMatrix& X);

// --------------------------------------------------------------------------
// Trees. A node is internal when feature >= 0. Internal nodes route row r
// left when x[feature] <= threshold (raw units) or code <= bin (binned).

struct TreeNode {
  int feature = -1;
  double threshold = 0.0;  // raw-unit learners
  int bin = -1;            // binned learners
  int left = -1;
  int right = -1;
  double value = 0.0;  // leaf payload
};

json tree_to_json(const std::vector<TreeNode>& nodes);
std::vector<TreeNode> tree_from_json(const json& arr);

class RandomForestModel : public TrainedModel {
 public:
  std::vector<std::vector<double>> edges;
  std::vector<std::vector<TreeNode>> trees;

  static std::unique_ptr<RandomForestModel> fit_forest(const ModelSpec& spec,
                                                       const FeatureMatrix& X,
                                                       std::span<const double> y);
  static std::unique_ptr<TrainedModel> from_json(const ModelSpec& spec,
                                                 std::vector<std::string> schema,
                                                 const json& params);

 protected:
  std::vector<double> predict_impl(const FeatureMatrix& X) const override;
  void serialize_parameters(void* json_object) const override;
};

class GbtLevelwiseModel : public TrainedModel {
 public:
  double base_score = 0.0;  // log-odds
  std::vector<std::vector<TreeNode>> trees;  // leaf values include the learning rate

  static std::unique_ptr<GbtLevelwiseModel> fit_boost(const ModelSpec& spec,
                                                      const FeatureMatrix& X,
                                                      std::span<const double> y);
  static std::unique_ptr<TrainedModel> from_json(const ModelSpec& spec,
                                                 std::vector<std::string> schema,
                                                 const json& params);

 protected:
  std::vector<double> predict_impl(const FeatureMatrix& X) const override;
  void serialize_parameters(void* json_object) const override;
};

class GbtHistLeafwiseModel : public TrainedModel {
 public:
  double base_score = 0.0;
  std::vector<std::vector<double>> edges;
  std::vector<std::vector<TreeNode>> trees;

  static std::unique_ptr<GbtHistLeafwiseModel> fit_boost(const ModelSpec& spec,
                                                         const FeatureMatrix& X,
                                                         std::span<const double> y);
  static std::unique_ptr<TrainedModel> from_json(const ModelSpec& spec,
                                                 std::vector<std::string> schema,
                                                 const json& params);

 protected:
  std::vector<double> predict_impl(const FeatureMatrix& X) const override;
  void serialize_parameters(void* json_object) const override;
};

}  // namespace eea::detail
