#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "eea/data.hpp"
#include "eea/features.hpp"
#include "eea/folds.hpp"
#include "eea/metrics.hpp"

namespace eea {

enum class Algorithm {
  LogisticRegression,
  ElasticNetLogistic,
  RandomForest,
  GradientBoostLevelwise,
  GradientBoostHistLeafwise,
};

const char* algorithm_name(Algorithm a);
Algorithm parse_algorithm(const std::string& name);
const std::vector<Algorithm>& all_algorithms();

// Probabilities are clamped into [kProbFloor, 1 - kProbFloor] at prediction
// time so that log loss and log risk ratios stay finite.
inline constexpr double kProbFloor = 1e-6;

struct ModelSpec {
  Algorithm algorithm = Algorithm::LogisticRegression;
  std::map<std::string, double> hyperparameters;  // keys from the declared grid
  std::uint64_t seed = 0;

  double hyper(const std::string& key, double fallback) const;
  std::string label() const { return algorithm_name(algorithm); }
  std::string describe() const;  // label plus non-default hyperparameters
};

// Declared defaults; the grids are artifact choices, not paper values.
std::vector<ModelSpec> default_grid(Algorithm a, std::uint64_t seed = 0);
ModelSpec default_spec(Algorithm a, std::uint64_t seed = 0);
void validate_hyperparameters(const ModelSpec& spec);

class TrainedModel {
 public:
  virtual ~TrainedModel() = default;

  const ModelSpec& spec() const { return spec_; }
  const std::vector<std::string>& feature_schema() const { return schema_; }

  // Clamped probabilities; throws SchemaMismatch if X disagrees with the
  // training schema.
  std::vector<double> predict(const FeatureMatrix& X) const;

  std::string save() const;  // versioned JSON, doubles as hexfloat
  static std::unique_ptr<TrainedModel> load(const std::string& text);

 protected:
  virtual std::vector<double> predict_impl(const FeatureMatrix& X) const = 0;
  virtual void serialize_parameters(void* json_object) const = 0;

  ModelSpec spec_;
  std::vector<std::string> schema_;
};

std::unique_ptr<TrainedModel> fit(const ModelSpec& spec, const FeatureMatrix& X,
                                  std::span<const double> y);
std::unique_ptr<TrainedModel> fit(const ModelSpec& spec, const ScenarioDataset& train);

struct PredictionSet {
  std::string model_label;
  ScenarioId scenario_id;
  std::vector<std::int64_t> day_ids;
  std::vector<double> probs;
  std::vector<std::string> fold_of_day;  // aligned to day_ids when out_of_sample
  bool out_of_sample = false;

  double mean() const;
};

PredictionSet predict_proba(const TrainedModel& model, const ScenarioDataset& X);

// Picks the grid member with the best mean out-of-fold criterion; ties break
// in grid order.
ModelSpec tune_cv(const std::vector<ModelSpec>& spec_grid, const ScenarioDataset& dataset,
                  const FoldPlan& folds, MetricId criterion);

struct CrossFitResult {
  PredictionSet factual_oos;                 // block b predicted by a model trained off-block
  std::vector<PredictionSet> counterfactual; // from one model trained on the full data
  std::shared_ptr<const TrainedModel> full_model;
};

CrossFitResult cross_fit(const ModelSpec& spec, const ScenarioDataset& dataset,
                         const FoldPlan& folds,
                         const std::vector<const ScenarioDataset*>& targets);

// Exposed for the finite-difference gradient checks: value and gradient of the
// unpenalized mean log loss at theta = (intercept, beta...). This is the same
// code path the linear solvers differentiate.
double log_loss_value(const FeatureMatrix& X, std::span<const double> y,
                      std::span<const double> theta);
std::vector<double> log_loss_gradient(const FeatureMatrix& X, std::span<const double> y,
                                      std::span<const double> theta);

}  // namespace eea
