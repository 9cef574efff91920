#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "eea/models.hpp"

namespace eea {

enum class Estimator { MeanPrediction, PPI, PPIWeighted };
const char* estimator_name(Estimator e);

// RR is always warmer-over-cooler, so RR > 1 means warming increases risk.
// Against PreIndustrial the factual scenario is the warmer one; against
// SSP5-8.5 end-of-century the counterfactual is.
struct ComparisonSpec {
  std::string label;                   // "preindustrial" or "ssp585"
  bool counterfactual_is_warmer = false;

  static ComparisonSpec preindustrial() { return {"preindustrial", false}; }
  static ComparisonSpec ssp585() { return {"ssp585", true}; }
  static ComparisonSpec for_scenario(const ScenarioId& counterfactual);
  ComparisonSpec swapped() const { return {label, !counterfactual_is_warmer}; }
};

struct AttributionEstimate {
  double rr = 1.0;
  double far = 0.0;
  double ate = 0.0;
  double ci_lo = 0.0;
  double ci_hi = 0.0;
  Estimator estimator = Estimator::MeanPrediction;
  std::string comparison;
  std::string model_label;
  int bootstrap_b = 0;
  std::uint64_t seed = 0;
  std::size_t skipped_resamples = 0;

  static std::string csv_header();
  std::string to_csv_row() const;
  std::string to_json() const;
};

// One row per day: factual outcome, counterfactual prediction, and optional
// out-of-sample factual prediction / importance weight for the PPI variants.
struct PairedRows {
  std::vector<double> y_factual;
  std::vector<double> p_counterfactual;
  std::vector<double> p_factual_oos;  // empty unless PPI
  std::vector<double> weights;        // empty unless PPIWeighted

  std::size_t size() const { return y_factual.size(); }
  void validate(Estimator estimator) const;
};

// Point estimate from a full rows table (or any resample of it).
double estimate_cf_mean(const PairedRows& rows, Estimator estimator);
double estimate_rr(const PairedRows& rows, Estimator estimator,
                   const ComparisonSpec& comparison);

AttributionEstimate estimate_attribution(std::span<const double> y_factual,
                                         const PredictionSet& preds_cf,
                                         const ComparisonSpec& comparison);

// mean(p_cf) + (mean(y) - mean(p_factual_oos)); the rectifier corrects the
// counterfactual mean by the model's labeled-data bias.
double ppi_mean(std::span<const double> y_factual, const PredictionSet& preds_factual_oos,
                const PredictionSet& preds_cf,
                std::span<const double> weights = {});

struct BootstrapInterval {
  double lo = 0.0;
  double hi = 0.0;
  std::size_t skipped = 0;  // resamples with zero factual positives
};

BootstrapInterval bootstrap_ci(const PairedRows& rows, Estimator estimator,
                               const ComparisonSpec& comparison, int B, double level,
                               std::uint64_t seed);

AttributionEstimate attribution_with_bootstrap(const PairedRows& rows,
                                               Estimator estimator,
                                               const ComparisonSpec& comparison,
                                               const std::string& model_label, int B,
                                               double level, std::uint64_t seed);

// Same-day risk ratio between the warmer and cooler scenario predictors.
double per_event_rr(const TrainedModel& model, const FeatureMatrix& x_factual_day,
                    const FeatureMatrix& x_cf_day, const ComparisonSpec& comparison);

}  // namespace eea
