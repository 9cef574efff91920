#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "eea/data.hpp"
#include "eea/folds.hpp"
#include "eea/models.hpp"

namespace eea {

struct PropensityScores {
  std::vector<double> factual;         // P(factual | x), out-of-sample per fold
  std::vector<double> counterfactual;
  std::vector<std::string> fold_of_day;
};

// Source classifier on the combined dataset (label 1 = factual), cross-fitted
// by the temporal fold plan.
PropensityScores fit_propensity(const ScenarioDataset& factual,
                                const ScenarioDataset& counterfactual,
                                const FoldPlan& folds, const ModelSpec& spec);

// accuracy at the 0.5 threshold; d_hat = 2 - 4(1 - accuracy). Reported raw,
// so values below 0 indicate worse-than-chance separation.
struct ProxyADistance {
  double accuracy = 0.0;
  double distance = 0.0;
};
ProxyADistance proxy_a_distance(std::span<const double> scores,
                                std::span<const double> labels, double threshold = 0.5);

// w_i = (1 - e_i) / e_i after clipping scores into [clip_lo, clip_hi],
// normalized to mean 1; reweights factual days toward the counterfactual
// population.
struct ImportanceWeights {
  std::vector<double> weights;
  std::size_t clipped = 0;
  double clip_lo = 0.01;
  double clip_hi = 0.99;
};
ImportanceWeights importance_weights(std::span<const double> scores_factual,
                                     double clip_lo = 0.01, double clip_hi = 0.99);

struct SubgroupBin {
  std::string label;  // "octile_1" ... coolest first
  double temp_lo = 0.0;
  double temp_hi = 0.0;
  std::size_t n = 0;
  double mean_calibration_error = 0.0;
};

// Equal-count temperature bins with per-bin mean calibration error.
std::vector<SubgroupBin> temperature_subgroups(const ScenarioDataset& dataset,
                                               const PredictionSet& preds, int k = 8);

struct PcaShiftSummary {
  std::vector<std::string> feature_names;   // numeric features entering the PCA
  std::vector<double> loading1;             // top eigenvector
  std::vector<double> loading2;
  double eigenvalue1 = 0.0;
  double eigenvalue2 = 0.0;
  std::vector<std::string> scenario_labels;  // factual first
  std::vector<double> proj1;                 // mean projection per scenario
  std::vector<double> proj2;
};

// Top-2 PCA of the factual correlation structure; scenario means projected so
// arrows (counterfactual minus factual) summarize the covariate shift.
PcaShiftSummary pca_shift_summary(const ScenarioDataset& factual,
                                  const std::vector<const ScenarioDataset*>& counterfactuals);

struct ShiftReport {
  PropensityScores propensity;
  ProxyADistance proxy_a;
  ImportanceWeights weights;
  std::vector<SubgroupBin> subgroup_curve;
  PcaShiftSummary pca;

  std::string to_json() const;
  std::string subgroup_csv() const;
  std::string pca_csv() const;
  std::string propensity_csv(const std::vector<std::int64_t>& day_ids) const;
};

}  // namespace eea
