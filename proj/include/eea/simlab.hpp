#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "eea/attribution.hpp"
#include "eea/models.hpp"
#include "eea/synthetic.hpp"

namespace eea {

// A truth-known world: per-day probabilities under both scenarios plus the
// exact estimands they imply.
struct TruthScenario {
  std::string label;
  std::vector<double> pi0;  // factual
  std::vector<double> pi1;  // counterfactual
  double mu0 = 0.0;
  double mu1 = 0.0;
  double rr_star = 1.0;   // warmer over cooler
  double far_star = 0.0;
  double ate_star = 0.0;  // warmer minus cooler
  ComparisonSpec comparison;
};

TruthScenario build_truth(const PredictionSet& preds_factual,
                          const PredictionSet& preds_cf, const std::string& label,
                          const ComparisonSpec& comparison);
TruthScenario build_truth_from_generator(const SyntheticTruth& truth,
                                         const std::string& label,
                                         const ComparisonSpec& comparison);

struct SimResultRow {
  std::string truth_label;
  std::string model_label;
  int replicate = 0;
  // cross-validated metrics on the replicate's factual data
  double auc = 0.0;
  double brier = 0.0;
  double brier_skill = 0.0;
  double mce = 0.0;
  // the same metrics against counterfactual outcome draws
  double oos_auc = 0.0;
  double oos_brier = 0.0;
  double oos_brier_skill = 0.0;
  double oos_mce = 0.0;
  double est_cf_mean = 0.0;
  double abs_log_rr_error = 0.0;
  double est_cf_mean_ppi = 0.0;
  double abs_log_rr_error_ppi = 0.0;

  static std::string csv_header();
  std::string to_csv_row() const;
  static SimResultRow from_csv_row(const std::string& line);

  double in_sample_metric(MetricId id) const;
};

// Bernoulli outcomes on the factual design, one model retrained per
// replicate; returns nullopt when the replicate cannot be trained (single
// class drawn overall or within a training block) so the caller can record
// the skip without disturbing replicate indexing.
std::optional<SimResultRow> run_replicate(const TruthScenario& truth,
                                          const ScenarioDataset& factual,
                                          const ScenarioDataset& counterfactual,
                                          const ModelSpec& zoo_spec,
                                          const FoldPlan& folds, int r,
                                          std::uint64_t master_seed);

struct CorrelationReport {
  std::string metric;
  double r = 0.0;
  double p_value = 1.0;
  std::size_t n = 0;
};

// Pearson correlation between an in-sample metric column and the absolute
// log risk ratio error across rows.
CorrelationReport correlate(const std::vector<SimResultRow>& rows, MetricId metric_id);

struct RegretReport {
  std::string metric;
  double mean_error = 0.0;
  std::size_t n_samples = 0;
  std::size_t sample_size = 0;
  std::size_t n_models = 0;
};

// Repeatedly samples replicate sets, picks the best model by the metric, and
// averages the chosen model's log-RR error over the sampled sets.
RegretReport regret(const std::vector<SimResultRow>& rows,
                    const std::function<double(const SimResultRow&)>& metric,
                    bool higher_is_better, const std::string& metric_label,
                    int n_samples, int sample_size, std::uint64_t seed);
RegretReport regret(const std::vector<SimResultRow>& rows, MetricId metric_id,
                    int n_samples, int sample_size, std::uint64_t seed);

}  // namespace eea
