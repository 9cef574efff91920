#pragma once

#include <span>
#include <string>
#include <vector>

namespace eea {

enum class MetricId { Auc, Brier, BrierSkill, Mce, LogLoss };

const char* metric_name(MetricId id);
// true when larger values of the metric indicate a better model
bool metric_higher_is_better(MetricId id);

struct MetricsReport {
  double auc = 0.0;
  double brier = 0.0;
  double brier_skill = 0.0;
  double mean_calibration_error = 0.0;
  std::size_t n = 0;
  bool weights_used = false;

  std::string to_json() const;
  static std::string csv_header();
  std::string to_csv_row() const;
};

// Rank statistic: (#concordant + 0.5 #tied) / (#pos * #neg).
double auc(std::span<const double> probs, std::span<const double> y);
double brier(std::span<const double> probs, std::span<const double> y);
// 1 - BS_model / BS_ref where the reference predicts mean(probs) everywhere.
double brier_skill(std::span<const double> probs, std::span<const double> y);
// |mean(probs) - mean(y)|
double mean_calibration_error(std::span<const double> probs, std::span<const double> y);
double log_loss(std::span<const double> probs, std::span<const double> y);

MetricsReport metrics_report(std::span<const double> probs, std::span<const double> y);

// Hajek-normalized weighted variants; AUC uses weight-pair products.
double weighted_auc(std::span<const double> probs, std::span<const double> y,
                    std::span<const double> weights);
double weighted_brier(std::span<const double> probs, std::span<const double> y,
                      std::span<const double> weights);
double weighted_brier_skill(std::span<const double> probs, std::span<const double> y,
                            std::span<const double> weights);
double weighted_mean_calibration_error(std::span<const double> probs,
                                       std::span<const double> y,
                                       std::span<const double> weights);
MetricsReport weighted_metrics(std::span<const double> probs, std::span<const double> y,
                               std::span<const double> weights);

double metric_value(MetricId id, std::span<const double> probs, std::span<const double> y);

// |log(est_cf_mean) - log(true_cf_mean)|; the factual mean cancels out of the
// paper's two-ratio form, so only the counterfactual means enter.
double log_rr_error(double true_cf_mean, double est_cf_mean);

}  // namespace eea
