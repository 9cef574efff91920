#include "eea/attribution.hpp"

#include <algorithm>
#include <cmath>

#include "eea/error.hpp"
#include "eea/rng.hpp"
#include "eea/util.hpp"

namespace eea {

const char* estimator_name(Estimator e) {
  switch (e) {
    case Estimator::MeanPrediction: return "MeanPrediction";
    case Estimator::PPI: return "PPI";
    case Estimator::PPIWeighted: return "PPIWeighted";
  }
  return "?";
}

ComparisonSpec ComparisonSpec::for_scenario(const ScenarioId& counterfactual) {
  switch (counterfactual.kind) {
    case ScenarioId::Kind::PreIndustrial: return preindustrial();
    case ScenarioId::Kind::SSP585_EOC: return ssp585();
    default:
      throw Error(ErrorCode::ConfigParse,
                  "scenario " + counterfactual.to_string() +
                      " has no default orientation; pass --comparison");
  }
}

void PairedRows::validate(Estimator estimator) const {
  if (y_factual.empty() || p_counterfactual.size() != y_factual.size())
    throw Error(ErrorCode::MisalignedPair,
                "factual outcomes and counterfactual predictions must be aligned");
  if (estimator != Estimator::MeanPrediction &&
      p_factual_oos.size() != y_factual.size())
    throw Error(ErrorCode::MisalignedPair,
                "PPI needs out-of-sample factual predictions for every day");
  if (estimator == Estimator::PPIWeighted && weights.size() != y_factual.size())
    throw Error(ErrorCode::MisalignedPair,
                "PPIWeighted needs an importance weight for every day");
}

namespace {

struct Means {
  double y = 0.0;
  double p_cf = 0.0;
  double p_oos = 0.0;
};

Means means_over(const PairedRows& rows, std::span<const std::size_t> idx,
                 Estimator estimator) {
  Means m;
  if (estimator == Estimator::PPIWeighted) {
    double wy = 0.0, wcf = 0.0, woos = 0.0, wsum = 0.0;
    double cf_plain = 0.0;
    for (const std::size_t i : idx) {
      const double w = rows.weights[i];
      wsum += w;
      wy += w * rows.y_factual[i];
      woos += w * rows.p_factual_oos[i];
      wcf += w * rows.p_counterfactual[i];
      cf_plain += rows.p_counterfactual[i];
    }
    if (wsum <= 0.0) throw Error(ErrorCode::AllZeroWeights, "resample has zero weight");
    // the counterfactual mean stays unweighted; weights transport the
    // factual-sample rectifier toward the counterfactual population
    m.y = wy / wsum;
    m.p_oos = woos / wsum;
    m.p_cf = cf_plain / static_cast<double>(idx.size());
    return m;
  }
  for (const std::size_t i : idx) {
    m.y += rows.y_factual[i];
    m.p_cf += rows.p_counterfactual[i];
    if (!rows.p_factual_oos.empty()) m.p_oos += rows.p_factual_oos[i];
  }
  const double n = static_cast<double>(idx.size());
  m.y /= n;
  m.p_cf /= n;
  m.p_oos /= n;
  return m;
}

std::vector<std::size_t> identity_index(std::size_t n) {
  std::vector<std::size_t> idx(n);
  for (std::size_t i = 0; i < n; ++i) idx[i] = i;
  return idx;
}

double rr_from_means(double mean_y, double cf_mean, const ComparisonSpec& comparison) {
  if (!(mean_y > 0.0))
    throw Error(ErrorCode::ZeroMean, "factual outcome mean is zero");
  if (!(cf_mean > 0.0))
    throw Error(ErrorCode::ZeroMean, "counterfactual predicted mean is zero");
  return comparison.counterfactual_is_warmer ? cf_mean / mean_y : mean_y / cf_mean;
}

AttributionEstimate from_means(double mean_y, double cf_mean,
                               const ComparisonSpec& comparison) {
  AttributionEstimate est;
  est.rr = rr_from_means(mean_y, cf_mean, comparison);
  est.far = 1.0 - 1.0 / est.rr;
  const double warmer = comparison.counterfactual_is_warmer ? cf_mean : mean_y;
  const double cooler = comparison.counterfactual_is_warmer ? mean_y : cf_mean;
  est.ate = warmer - cooler;
  est.comparison = comparison.label;
  return est;
}

}  // namespace

double estimate_cf_mean(const PairedRows& rows, Estimator estimator) {
  rows.validate(estimator);
  const auto idx = identity_index(rows.size());
  const Means m = means_over(rows, idx, estimator);
  if (estimator == Estimator::MeanPrediction) return m.p_cf;
  return m.p_cf + (m.y - m.p_oos);
}

double estimate_rr(const PairedRows& rows, Estimator estimator,
                   const ComparisonSpec& comparison) {
  rows.validate(estimator);
  const auto idx = identity_index(rows.size());
  const Means m = means_over(rows, idx, estimator);
  const double cf_mean =
      estimator == Estimator::MeanPrediction ? m.p_cf : m.p_cf + (m.y - m.p_oos);
  return rr_from_means(m.y, cf_mean, comparison);
}

AttributionEstimate estimate_attribution(std::span<const double> y_factual,
                                         const PredictionSet& preds_cf,
                                         const ComparisonSpec& comparison) {
  if (y_factual.size() != preds_cf.probs.size())
    throw Error(ErrorCode::MisalignedPair,
                "outcomes (" + std::to_string(y_factual.size()) +
                    ") vs counterfactual predictions (" +
                    std::to_string(preds_cf.probs.size()) + ")");
  double mean_y = 0.0;
  for (const double v : y_factual) mean_y += v;
  mean_y /= static_cast<double>(y_factual.size());
  AttributionEstimate est = from_means(mean_y, preds_cf.mean(), comparison);
  est.estimator = Estimator::MeanPrediction;
  est.model_label = preds_cf.model_label;
  est.ci_lo = est.rr;
  est.ci_hi = est.rr;
  return est;
}

double ppi_mean(std::span<const double> y_factual, const PredictionSet& preds_factual_oos,
                const PredictionSet& preds_cf, std::span<const double> weights) {
  if (!preds_factual_oos.out_of_sample)
    throw Error(ErrorCode::InSampleLeakage,
                "factual predictions must be out-of-sample for the PPI rectifier");
  PairedRows rows;
  rows.y_factual.assign(y_factual.begin(), y_factual.end());
  rows.p_counterfactual = preds_cf.probs;
  rows.p_factual_oos = preds_factual_oos.probs;
  if (!weights.empty()) {
    rows.weights.assign(weights.begin(), weights.end());
    return estimate_cf_mean(rows, Estimator::PPIWeighted);
  }
  return estimate_cf_mean(rows, Estimator::PPI);
}

BootstrapInterval bootstrap_ci(const PairedRows& rows, Estimator estimator,
                               const ComparisonSpec& comparison, int B, double level,
                               std::uint64_t seed) {
  rows.validate(estimator);
  if (B < 100)
    throw Error(ErrorCode::DegenerateResample, "bootstrap needs B >= 100");
  if (!(level > 0.0 && level < 1.0))
    throw Error(ErrorCode::ConfigParse, "bootstrap level must lie in (0,1)");

  const std::size_t n = rows.size();
  std::vector<double> estimates;
  estimates.reserve(static_cast<std::size_t>(B));
  std::size_t skipped = 0;
  std::vector<std::size_t> idx(n);
  for (int b = 0; b < B; ++b) {
    // each replicate draws its own stream, so execution order cannot matter
    rng::Stream stream(rng::derive(seed, "bootstrap/replicate", static_cast<std::uint64_t>(b)));
    bool any_positive = false;
    for (std::size_t i = 0; i < n; ++i) {
      idx[i] = static_cast<std::size_t>(stream.uniform_below(n));
      any_positive = any_positive || rows.y_factual[idx[i]] > 0.5;
    }
    if (!any_positive) {
      ++skipped;  // recorded, not imputed
      continue;
    }
    const Means m = means_over(rows, idx, estimator);
    const double cf_mean =
        estimator == Estimator::MeanPrediction ? m.p_cf : m.p_cf + (m.y - m.p_oos);
    if (!(cf_mean > 0.0)) {
      ++skipped;
      continue;
    }
    estimates.push_back(rr_from_means(m.y, cf_mean, comparison));
  }
  if (skipped * 10 > static_cast<std::size_t>(B))
    throw Error(ErrorCode::DegenerateResample,
                std::to_string(skipped) + " of " + std::to_string(B) +
                    " resamples had no factual positives");

  BootstrapInterval ci;
  ci.skipped = skipped;
  const double tail = 0.5 * (1.0 - level);
  ci.lo = percentile(estimates, tail);
  ci.hi = percentile(std::move(estimates), 1.0 - tail);
  return ci;
}

AttributionEstimate attribution_with_bootstrap(const PairedRows& rows,
                                               Estimator estimator,
                                               const ComparisonSpec& comparison,
                                               const std::string& model_label, int B,
                                               double level, std::uint64_t seed) {
  rows.validate(estimator);
  const auto idx = identity_index(rows.size());
  const Means m = means_over(rows, idx, estimator);
  const double cf_mean =
      estimator == Estimator::MeanPrediction ? m.p_cf : m.p_cf + (m.y - m.p_oos);
  AttributionEstimate est = from_means(m.y, cf_mean, comparison);
  est.estimator = estimator;
  est.model_label = model_label;
  const BootstrapInterval ci = bootstrap_ci(rows, estimator, comparison, B, level, seed);
  est.ci_lo = ci.lo;
  est.ci_hi = ci.hi;
  est.bootstrap_b = B;
  est.seed = seed;
  est.skipped_resamples = ci.skipped;
  return est;
}

double per_event_rr(const TrainedModel& model, const FeatureMatrix& x_factual_day,
                    const FeatureMatrix& x_cf_day, const ComparisonSpec& comparison) {
  const double p_fact = model.predict(x_factual_day).at(0);
  const double p_cf = model.predict(x_cf_day).at(0);
  // predictions already carry the probability floor
  return comparison.counterfactual_is_warmer ? p_cf / p_fact : p_fact / p_cf;
}

std::string AttributionEstimate::csv_header() {
  return "comparison,model,estimator,rr,far,ate,ci_lo,ci_hi,B,seed";
}

std::string AttributionEstimate::to_csv_row() const {
  return comparison + "," + model_label + "," + estimator_name(estimator) + "," +
         fmt_double(rr) + "," + fmt_double(far) + "," + fmt_double(ate) + "," +
         fmt_double(ci_lo) + "," + fmt_double(ci_hi) + "," +
         std::to_string(bootstrap_b) + "," + std::to_string(seed);
}

std::string AttributionEstimate::to_json() const {
  std::string out = "{";
  out += "\"comparison\":\"" + comparison + "\",";
  out += "\"model\":\"" + model_label + "\",";
  out += std::string("\"estimator\":\"") + estimator_name(estimator) + "\",";
  out += "\"rr\":" + fmt_double(rr) + ",";
  out += "\"far\":" + fmt_double(far) + ",";
  out += "\"ate\":" + fmt_double(ate) + ",";
  out += "\"ci_lo\":" + fmt_double(ci_lo) + ",";
  out += "\"ci_hi\":" + fmt_double(ci_hi) + ",";
  out += "\"B\":" + std::to_string(bootstrap_b) + ",";
  out += "\"seed\":" + std::to_string(seed) + ",";
  out += "\"skipped_resamples\":" + std::to_string(skipped_resamples);
  out += "}";
  return out;
}

}  // namespace eea
