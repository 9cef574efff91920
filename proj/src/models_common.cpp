#include <algorithm>
#include <cmath>
#include <set>

#include "eea/error.hpp"
#include "eea/rng.hpp"
#include "eea/util.hpp"
#include "models_detail.hpp"

namespace eea {

using detail::json;

const char* algorithm_name(Algorithm a) {
  switch (a) {
    case Algorithm::LogisticRegression: return "logistic";
    case Algorithm::ElasticNetLogistic: return "elastic_net";
    case Algorithm::RandomForest: return "random_forest";
    case Algorithm::GradientBoostLevelwise: return "gbt_levelwise";
    case Algorithm::GradientBoostHistLeafwise: return "gbt_hist";
  }
  return "?";
}

Algorithm parse_algorithm(const std::string& name) {
  for (Algorithm a : all_algorithms())
    if (name == algorithm_name(a)) return a;
  throw Error(ErrorCode::ConfigParse, "unknown algorithm '" + name + "'");
}

const std::vector<Algorithm>& all_algorithms() {
  static const std::vector<Algorithm> kAll = {
      Algorithm::LogisticRegression, Algorithm::ElasticNetLogistic,
      Algorithm::RandomForest, Algorithm::GradientBoostLevelwise,
      Algorithm::GradientBoostHistLeafwise};
  return kAll;
}

double ModelSpec::hyper(const std::string& key, double fallback) const {
  const auto it = hyperparameters.find(key);
  return it == hyperparameters.end() ? fallback : it->second;
}

std::string ModelSpec::describe() const {
  std::string out = label();
  if (!hyperparameters.empty()) {
    out += '(';
    bool first = true;
    for (const auto& [k, v] : hyperparameters) {
      if (!first) out += ',';
      first = false;
      out += k + "=" + fmt_double(v);
    }
    out += ')';
  }
  return out;
}

namespace {

const std::set<std::string>& allowed_keys(Algorithm a) {
  static const std::set<std::string> kLogistic = {"l2", "max_iter", "tol"};
  static const std::set<std::string> kElasticNet = {"alpha", "lambda", "max_iter", "tol"};
  static const std::set<std::string> kForest = {"n_trees", "max_depth",
                                                "min_samples_leaf", "mtry"};
  static const std::set<std::string> kGbtLevel = {"n_trees", "learning_rate",
                                                  "max_depth", "min_samples_leaf", "l2"};
  static const std::set<std::string> kGbtHist = {"n_trees", "learning_rate",
                                                 "max_leaves", "min_samples_leaf", "l2"};
  switch (a) {
    case Algorithm::LogisticRegression: return kLogistic;
    case Algorithm::ElasticNetLogistic: return kElasticNet;
    case Algorithm::RandomForest: return kForest;
    case Algorithm::GradientBoostLevelwise: return kGbtLevel;
    case Algorithm::GradientBoostHistLeafwise: return kGbtHist;
  }
  return kLogistic;
}

}  // namespace

void validate_hyperparameters(const ModelSpec& spec) {
  const auto& allowed = allowed_keys(spec.algorithm);
  for (const auto& [key, value] : spec.hyperparameters) {
    if (!allowed.count(key))
      throw Error(ErrorCode::ConfigParse,
                  "hyperparameter '" + key + "' is not declared for " +
                      spec.label());
    if (!std::isfinite(value))
      throw Error(ErrorCode::ConfigParse, "hyperparameter '" + key + "' is not finite");
  }
}

ModelSpec default_spec(Algorithm a, std::uint64_t seed) {
  ModelSpec spec;
  spec.algorithm = a;
  spec.seed = seed;
  switch (a) {
    case Algorithm::LogisticRegression:
      spec.hyperparameters = {{"l2", 1e-6}};
      break;
    case Algorithm::ElasticNetLogistic:
      spec.hyperparameters = {{"alpha", 0.5}, {"lambda", 1e-3}};
      break;
    case Algorithm::RandomForest:
      spec.hyperparameters = {{"n_trees", 300}, {"max_depth", 12},
                              {"min_samples_leaf", 5}, {"mtry", 0}};
      break;
    case Algorithm::GradientBoostLevelwise:
      spec.hyperparameters = {{"n_trees", 100}, {"learning_rate", 0.1},
                              {"max_depth", 3}, {"min_samples_leaf", 5},
                              {"l2", 1.0}};
      break;
    case Algorithm::GradientBoostHistLeafwise:
      spec.hyperparameters = {{"n_trees", 100}, {"learning_rate", 0.1},
                              {"max_leaves", 15}, {"min_samples_leaf", 5},
                              {"l2", 1.0}};
      break;
  }
  return spec;
}

std::vector<ModelSpec> default_grid(Algorithm a, std::uint64_t seed) {
  std::vector<ModelSpec> grid;
  switch (a) {
    case Algorithm::LogisticRegression:
      grid.push_back(default_spec(a, seed));
      break;
    case Algorithm::ElasticNetLogistic:
      for (const double alpha : {0.1, 0.5, 0.9})
        for (int k = 0; k < 8; ++k) {
          ModelSpec spec = default_spec(a, seed);
          spec.hyperparameters["alpha"] = alpha;
          spec.hyperparameters["lambda"] = std::pow(10.0, -4.0 + k);
          grid.push_back(std::move(spec));
        }
      break;
    case Algorithm::RandomForest:
      grid.push_back(default_spec(a, seed));
      break;
    case Algorithm::GradientBoostLevelwise:
      for (const double lr : {0.05, 0.1})
        for (const double trees : {100.0, 300.0})
          for (const double depth : {3.0, 6.0}) {
            ModelSpec spec = default_spec(a, seed);
            spec.hyperparameters["learning_rate"] = lr;
            spec.hyperparameters["n_trees"] = trees;
            spec.hyperparameters["max_depth"] = depth;
            grid.push_back(std::move(spec));
          }
      break;
    case Algorithm::GradientBoostHistLeafwise:
      for (const double lr : {0.05, 0.1})
        for (const double trees : {100.0, 300.0})
          for (const double leaves : {15.0, 31.0}) {
            ModelSpec spec = default_spec(a, seed);
            spec.hyperparameters["learning_rate"] = lr;
            spec.hyperparameters["n_trees"] = trees;
            spec.hyperparameters["max_leaves"] = leaves;
            grid.push_back(std::move(spec));
          }
      break;
  }
  return grid;
}

// ---------------------------------------------------------------------------

std::vector<double> TrainedModel::predict(const FeatureMatrix& X) const {
  if (X.names != schema_)
    throw Error(ErrorCode::SchemaMismatch,
                "feature schema differs from the training schema (" +
                    std::to_string(X.names.size()) + " vs " +
                    std::to_string(schema_.size()) + " features)");
  std::vector<double> probs = predict_impl(X);
  for (double& p : probs) p = std::clamp(p, kProbFloor, 1.0 - kProbFloor);
  return probs;
}

std::unique_ptr<TrainedModel> fit(const ModelSpec& spec, const FeatureMatrix& X,
                                  std::span<const double> y) {
  validate_hyperparameters(spec);
  if (X.n_rows != y.size() || X.n_rows == 0)
    throw Error(ErrorCode::MisalignedPair, "X and y must be nonempty and aligned");
  std::size_t n_pos = 0;
  for (double v : y) n_pos += v > 0.5;
  if (n_pos == 0 || n_pos == y.size())
    throw Error(ErrorCode::SingleClassTraining,
                "training data contains a single outcome class (" +
                    std::to_string(n_pos) + "/" + std::to_string(y.size()) +
                    " positives)");
  switch (spec.algorithm) {
    case Algorithm::LogisticRegression:
      return detail::LinearLogisticModel::fit_logistic(spec, X, y);
    case Algorithm::ElasticNetLogistic:
      return detail::LinearLogisticModel::fit_elastic_net(spec, X, y);
    case Algorithm::RandomForest:
      return detail::RandomForestModel::fit_forest(spec, X, y);
    case Algorithm::GradientBoostLevelwise:
      return detail::GbtLevelwiseModel::fit_boost(spec, X, y);
    case Algorithm::GradientBoostHistLeafwise:
      return detail::GbtHistLeafwiseModel::fit_boost(spec, X, y);
  }
  throw Error(ErrorCode::ConfigParse, "unhandled algorithm");
}

std::unique_ptr<TrainedModel> fit(const ModelSpec& spec, const ScenarioDataset& train) {
  return fit(spec, encode_features(train), train.outcomes());
}

double PredictionSet::mean() const {
  double s = 0.0;
  for (double p : probs) s += p;
  return probs.empty() ? 0.0 : s / static_cast<double>(probs.size());
}

PredictionSet predict_proba(const TrainedModel& model, const ScenarioDataset& X) {
  PredictionSet out;
  out.model_label = model.spec().label();
  out.scenario_id = X.scenario_id;
  out.day_ids = X.day_ids();
  out.probs = model.predict(encode_features(X));
  out.out_of_sample = false;
  return out;
}

// ---------------------------------------------------------------------------
// Persistence

std::string TrainedModel::save() const {
  json doc;
  doc["format_version"] = 1;
  doc["algorithm"] = algorithm_name(spec_.algorithm);
  doc["seed"] = spec_.seed;
  json hp = json::object();
  for (const auto& [k, v] : spec_.hyperparameters) hp[k] = detail::hex_double(v);
  doc["hyperparameters"] = hp;
  doc["feature_schema"] = schema_;
  json params = json::object();
  serialize_parameters(&params);
  doc["parameters"] = params;
  return doc.dump(2);
}

std::unique_ptr<TrainedModel> TrainedModel::load(const std::string& text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::exception& e) {
    throw Error(ErrorCode::ConfigParse, std::string("model file is not valid JSON: ") + e.what());
  }
  if (!doc.contains("format_version") || doc["format_version"].get<int>() != 1)
    throw Error(ErrorCode::ConfigParse, "unsupported model format version");
  ModelSpec spec;
  spec.algorithm = parse_algorithm(doc["algorithm"].get<std::string>());
  spec.seed = doc["seed"].get<std::uint64_t>();
  for (const auto& [k, v] : doc["hyperparameters"].items())
    spec.hyperparameters[k] = detail::unhex_double(v.get<std::string>());
  std::vector<std::string> schema = doc["feature_schema"].get<std::vector<std::string>>();
  const json& params = doc["parameters"];
  switch (spec.algorithm) {
    case Algorithm::LogisticRegression:
    case Algorithm::ElasticNetLogistic:
      return detail::LinearLogisticModel::from_json(spec, std::move(schema), params);
    case Algorithm::RandomForest:
      return detail::RandomForestModel::from_json(spec, std::move(schema), params);
    case Algorithm::GradientBoostLevelwise:
      return detail::GbtLevelwiseModel::from_json(spec, std::move(schema), params);
    case Algorithm::GradientBoostHistLeafwise:
      return detail::GbtHistLeafwiseModel::from_json(spec, std::move(schema), params);
  }
  throw Error(ErrorCode::ConfigParse, "unhandled algorithm");
}

// ---------------------------------------------------------------------------
// Cross-validation

namespace {

struct FoldIndex {
  // dataset row indices per block, dataset order preserved
  std::vector<std::vector<std::size_t>> rows_in_block;
  std::vector<int> block_of_row;
};

FoldIndex index_folds(const ScenarioDataset& dataset, const FoldPlan& folds) {
  FoldIndex fi;
  fi.rows_in_block.resize(folds.n_blocks());
  fi.block_of_row.resize(dataset.size(), -1);
  const auto by_day = folds.block_of_day();
  for (std::size_t i = 0; i < dataset.records.size(); ++i) {
    const auto it = by_day.find(dataset.records[i].day_id);
    if (it == by_day.end())
      throw Error(ErrorCode::MisalignedPair,
                  "day " + std::to_string(dataset.records[i].day_id) +
                      " is missing from the fold plan");
    fi.block_of_row[i] = it->second;
    fi.rows_in_block[static_cast<std::size_t>(it->second)].push_back(i);
  }
  return fi;
}

}  // namespace

ModelSpec tune_cv(const std::vector<ModelSpec>& spec_grid, const ScenarioDataset& dataset,
                  const FoldPlan& folds, MetricId criterion) {
  if (spec_grid.empty()) throw Error(ErrorCode::EmptyGrid, "spec grid is empty");
  if (folds.n_blocks() < 2)
    throw Error(ErrorCode::InsufficientSpan, "tuning needs at least 2 folds");

  const FeatureMatrix X = encode_features(dataset);
  const std::vector<double> y = dataset.outcomes();
  const FoldIndex fi = index_folds(dataset, folds);
  const bool maximize = metric_higher_is_better(criterion);

  std::size_t best_idx = 0;
  double best_score = 0.0;
  bool have_best = false;
  for (std::size_t s = 0; s < spec_grid.size(); ++s) {
    double score_sum = 0.0;
    for (std::size_t b = 0; b < folds.n_blocks(); ++b) {
      std::vector<std::size_t> train_rows;
      train_rows.reserve(dataset.size());
      for (std::size_t ob = 0; ob < folds.n_blocks(); ++ob)
        if (ob != b)
          train_rows.insert(train_rows.end(), fi.rows_in_block[ob].begin(),
                            fi.rows_in_block[ob].end());
      std::vector<double> y_train;
      y_train.reserve(train_rows.size());
      for (const auto r : train_rows) y_train.push_back(y[r]);
      const auto model = fit(spec_grid[s], X.select_rows(train_rows), y_train);

      const auto& test_rows = fi.rows_in_block[b];
      const auto probs = model->predict(X.select_rows(test_rows));
      std::vector<double> y_test;
      y_test.reserve(test_rows.size());
      for (const auto r : test_rows) y_test.push_back(y[r]);
      score_sum += metric_value(criterion, probs, y_test);
    }
    const double score = score_sum / static_cast<double>(folds.n_blocks());
    const bool better = !have_best || (maximize ? score > best_score : score < best_score);
    if (better) {
      best_idx = s;
      best_score = score;
      have_best = true;
    }
  }
  return spec_grid[best_idx];
}

CrossFitResult cross_fit(const ModelSpec& spec, const ScenarioDataset& dataset,
                         const FoldPlan& folds,
                         const std::vector<const ScenarioDataset*>& targets) {
  const FeatureMatrix X = encode_features(dataset);
  const std::vector<double> y = dataset.outcomes();
  const FoldIndex fi = index_folds(dataset, folds);

  CrossFitResult result;
  result.factual_oos.model_label = spec.label();
  result.factual_oos.scenario_id = dataset.scenario_id;
  result.factual_oos.day_ids = dataset.day_ids();
  result.factual_oos.probs.assign(dataset.size(), 0.0);
  result.factual_oos.fold_of_day.assign(dataset.size(), "");
  result.factual_oos.out_of_sample = true;

  for (std::size_t b = 0; b < folds.n_blocks(); ++b) {
    std::vector<std::size_t> train_rows;
    train_rows.reserve(dataset.size());
    for (std::size_t ob = 0; ob < folds.n_blocks(); ++ob)
      if (ob != b)
        train_rows.insert(train_rows.end(), fi.rows_in_block[ob].begin(),
                          fi.rows_in_block[ob].end());
    std::vector<double> y_train;
    y_train.reserve(train_rows.size());
    for (const auto r : train_rows) y_train.push_back(y[r]);

    ModelSpec block_spec = spec;
    block_spec.seed = rng::derive(spec.seed, "cross_fit/block", b);
    const auto model = fit(block_spec, X.select_rows(train_rows), y_train);

    const auto& test_rows = fi.rows_in_block[b];
    const auto probs = model->predict(X.select_rows(test_rows));
    for (std::size_t k = 0; k < test_rows.size(); ++k) {
      result.factual_oos.probs[test_rows[k]] = probs[k];
      result.factual_oos.fold_of_day[test_rows[k]] = folds.blocks[b].label;
    }
  }

  result.full_model = fit(spec, X, y);
  for (const ScenarioDataset* target : targets) {
    check_pairing(dataset, *target);
    PredictionSet ps;
    ps.model_label = spec.label();
    ps.scenario_id = target->scenario_id;
    ps.day_ids = target->day_ids();
    ps.probs = result.full_model->predict(encode_features(*target));
    ps.out_of_sample = false;
    result.counterfactual.push_back(std::move(ps));
  }
  return result;
}

}  // namespace eea
