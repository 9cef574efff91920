#include "eea/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "eea/error.hpp"
#include "eea/util.hpp"

namespace eea {

namespace {

constexpr double kLogGuard = 1e-9;

void require_aligned(std::span<const double> probs, std::span<const double> y) {
  if (probs.size() != y.size() || probs.empty())
    throw Error(ErrorCode::MisalignedPair,
                "probs (" + std::to_string(probs.size()) + ") and y (" +
                    std::to_string(y.size()) + ") must be nonempty and aligned");
}

}  // namespace

const char* metric_name(MetricId id) {
  switch (id) {
    case MetricId::Auc: return "auc";
    case MetricId::Brier: return "brier";
    case MetricId::BrierSkill: return "brier_skill";
    case MetricId::Mce: return "mce";
    case MetricId::LogLoss: return "log_loss";
  }
  return "?";
}

bool metric_higher_is_better(MetricId id) {
  return id == MetricId::Auc || id == MetricId::BrierSkill;
}

double auc(std::span<const double> probs, std::span<const double> y) {
  require_aligned(probs, y);
  std::size_t n_pos = 0;
  for (double v : y) n_pos += v > 0.5;
  const std::size_t n_neg = y.size() - n_pos;
  if (n_pos == 0 || n_neg == 0)
    throw Error(ErrorCode::SingleClass, "AUC needs both classes present");

  // Sort by score; walk tie groups and credit 0.5 per tied pos-neg pair.
  std::vector<std::size_t> order(y.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return probs[a] < probs[b];
  });
  double concordant = 0.0;  // integer-valued; exact up to 2^53 pairs
  double neg_below = 0.0;
  std::size_t i = 0;
  while (i < order.size()) {
    std::size_t j = i;
    double tie_pos = 0.0, tie_neg = 0.0;
    while (j < order.size() && probs[order[j]] == probs[order[i]]) {
      (y[order[j]] > 0.5 ? tie_pos : tie_neg) += 1.0;
      ++j;
    }
    concordant += tie_pos * neg_below + 0.5 * tie_pos * tie_neg;
    neg_below += tie_neg;
    i = j;
  }
  return concordant / (static_cast<double>(n_pos) * static_cast<double>(n_neg));
}

double brier(std::span<const double> probs, std::span<const double> y) {
  require_aligned(probs, y);
  double s = 0.0;
  for (std::size_t i = 0; i < probs.size(); ++i) {
    const double d = probs[i] - y[i];
    s += d * d;
  }
  return s / static_cast<double>(probs.size());
}

double brier_skill(std::span<const double> probs, std::span<const double> y) {
  require_aligned(probs, y);
  double mean_p = 0.0;
  for (double p : probs) mean_p += p;
  mean_p /= static_cast<double>(probs.size());
  double bs_ref = 0.0;
  for (double v : y) {
    const double d = mean_p - v;
    bs_ref += d * d;
  }
  bs_ref /= static_cast<double>(y.size());
  if (bs_ref == 0.0)
    throw Error(ErrorCode::DegenerateReference,
                "reference Brier score is zero (constant outcomes matching the mean)");
  return 1.0 - brier(probs, y) / bs_ref;
}

double mean_calibration_error(std::span<const double> probs, std::span<const double> y) {
  require_aligned(probs, y);
  double mp = 0.0, my = 0.0;
  for (std::size_t i = 0; i < probs.size(); ++i) {
    mp += probs[i];
    my += y[i];
  }
  return std::abs(mp - my) / static_cast<double>(probs.size());
}

double log_loss(std::span<const double> probs, std::span<const double> y) {
  require_aligned(probs, y);
  double s = 0.0;
  for (std::size_t i = 0; i < probs.size(); ++i) {
    const double p = std::clamp(probs[i], kLogGuard, 1.0 - kLogGuard);
    s += y[i] > 0.5 ? -std::log(p) : -std::log1p(-p);
  }
  return s / static_cast<double>(probs.size());
}

MetricsReport metrics_report(std::span<const double> probs, std::span<const double> y) {
  MetricsReport report;
  report.auc = auc(probs, y);
  report.brier = brier(probs, y);
  report.brier_skill = brier_skill(probs, y);
  report.mean_calibration_error = mean_calibration_error(probs, y);
  report.n = probs.size();
  report.weights_used = false;
  return report;
}

namespace {

double check_weights(std::span<const double> probs, std::span<const double> y,
                     std::span<const double> weights) {
  require_aligned(probs, y);
  if (weights.size() != probs.size())
    throw Error(ErrorCode::MisalignedPair, "weights not aligned to probs");
  double total = 0.0;
  for (double w : weights) {
    if (!(w >= 0.0))
      throw Error(ErrorCode::AllZeroWeights, "weights must be >= 0");
    total += w;
  }
  if (total <= 0.0)
    throw Error(ErrorCode::AllZeroWeights, "weights sum to zero");
  return total;
}

}  // namespace

double weighted_auc(std::span<const double> probs, std::span<const double> y,
                    std::span<const double> weights) {
  check_weights(probs, y, weights);
  double w_pos = 0.0, w_neg = 0.0;
  for (std::size_t i = 0; i < y.size(); ++i)
    (y[i] > 0.5 ? w_pos : w_neg) += weights[i];
  if (w_pos == 0.0 || w_neg == 0.0)
    throw Error(ErrorCode::SingleClass, "weighted AUC needs both classes with weight");

  std::vector<std::size_t> order(y.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return probs[a] < probs[b];
  });
  double concordant = 0.0;
  double wneg_below = 0.0;
  std::size_t i = 0;
  while (i < order.size()) {
    std::size_t j = i;
    double tie_pos = 0.0, tie_neg = 0.0;
    while (j < order.size() && probs[order[j]] == probs[order[i]]) {
      (y[order[j]] > 0.5 ? tie_pos : tie_neg) += weights[order[j]];
      ++j;
    }
    concordant += tie_pos * wneg_below + 0.5 * tie_pos * tie_neg;
    wneg_below += tie_neg;
    i = j;
  }
  return concordant / (w_pos * w_neg);
}

double weighted_brier(std::span<const double> probs, std::span<const double> y,
                      std::span<const double> weights) {
  const double total = check_weights(probs, y, weights);
  double s = 0.0;
  for (std::size_t i = 0; i < probs.size(); ++i) {
    const double d = probs[i] - y[i];
    s += weights[i] * d * d;
  }
  return s / total;
}

double weighted_brier_skill(std::span<const double> probs, std::span<const double> y,
                            std::span<const double> weights) {
  const double total = check_weights(probs, y, weights);
  double mean_p = 0.0;
  for (std::size_t i = 0; i < probs.size(); ++i) mean_p += weights[i] * probs[i];
  mean_p /= total;
  double bs_ref = 0.0;
  for (std::size_t i = 0; i < y.size(); ++i) {
    const double d = mean_p - y[i];
    bs_ref += weights[i] * d * d;
  }
  bs_ref /= total;
  if (bs_ref == 0.0)
    throw Error(ErrorCode::DegenerateReference, "weighted reference Brier score is zero");
  return 1.0 - weighted_brier(probs, y, weights) / bs_ref;
}

double weighted_mean_calibration_error(std::span<const double> probs,
                                       std::span<const double> y,
                                       std::span<const double> weights) {
  const double total = check_weights(probs, y, weights);
  double mp = 0.0, my = 0.0;
  for (std::size_t i = 0; i < probs.size(); ++i) {
    mp += weights[i] * probs[i];
    my += weights[i] * y[i];
  }
  return std::abs(mp - my) / total;
}

MetricsReport weighted_metrics(std::span<const double> probs, std::span<const double> y,
                               std::span<const double> weights) {
  MetricsReport report;
  report.auc = weighted_auc(probs, y, weights);
  report.brier = weighted_brier(probs, y, weights);
  report.brier_skill = weighted_brier_skill(probs, y, weights);
  report.mean_calibration_error = weighted_mean_calibration_error(probs, y, weights);
  report.n = probs.size();
  report.weights_used = true;
  return report;
}

double metric_value(MetricId id, std::span<const double> probs, std::span<const double> y) {
  switch (id) {
    case MetricId::Auc: return auc(probs, y);
    case MetricId::Brier: return brier(probs, y);
    case MetricId::BrierSkill: return brier_skill(probs, y);
    case MetricId::Mce: return mean_calibration_error(probs, y);
    case MetricId::LogLoss: return log_loss(probs, y);
  }
  return 0.0;
}

double log_rr_error(double true_cf_mean, double est_cf_mean) {
  if (!(true_cf_mean > kLogGuard) || !(est_cf_mean > kLogGuard))
    throw Error(ErrorCode::NonPositiveMean,
                "counterfactual means must exceed " + fmt_double(kLogGuard) +
                    " (got true=" + fmt_double(true_cf_mean) +
                    ", est=" + fmt_double(est_cf_mean) + ")");
  return std::abs(std::log(est_cf_mean) - std::log(true_cf_mean));
}

std::string MetricsReport::to_json() const {
  std::string out = "{";
  out += "\"auc\":" + fmt_double(auc) + ",";
  out += "\"brier\":" + fmt_double(brier) + ",";
  out += "\"brier_skill\":" + fmt_double(brier_skill) + ",";
  out += "\"mean_calibration_error\":" + fmt_double(mean_calibration_error) + ",";
  out += "\"n\":" + std::to_string(n) + ",";
  out += std::string("\"weights_used\":") + (weights_used ? "true" : "false");
  out += "}";
  return out;
}

std::string MetricsReport::csv_header() {
  return "auc,brier,brier_skill,mean_calibration_error,n,weights_used";
}

std::string MetricsReport::to_csv_row() const {
  return fmt_double(auc) + "," + fmt_double(brier) + "," + fmt_double(brier_skill) +
         "," + fmt_double(mean_calibration_error) + "," + std::to_string(n) + "," +
         (weights_used ? "1" : "0");
}

}  // namespace eea
