#include "eea/simlab.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <set>

#include "eea/error.hpp"
#include "eea/metrics.hpp"
#include "eea/rng.hpp"
#include "eea/stats.hpp"
#include "eea/util.hpp"

namespace eea {

namespace {

constexpr double kTruthFloor = 1e-6;

TruthScenario finish_truth(TruthScenario t) {
  double s0 = 0.0, s1 = 0.0;
  for (double& v : t.pi0) {
    v = std::clamp(v, kTruthFloor, 1.0 - kTruthFloor);
    s0 += v;
  }
  for (double& v : t.pi1) {
    v = std::clamp(v, kTruthFloor, 1.0 - kTruthFloor);
    s1 += v;
  }
  t.mu0 = s0 / static_cast<double>(t.pi0.size());
  t.mu1 = s1 / static_cast<double>(t.pi1.size());
  if (t.mu0 < 10 * kTruthFloor || t.mu1 < 10 * kTruthFloor)
    throw Error(ErrorCode::DegenerateTruth,
                "truth means are near zero (mu0=" + fmt_double(t.mu0) +
                    ", mu1=" + fmt_double(t.mu1) + ")");
  const double warmer = t.comparison.counterfactual_is_warmer ? t.mu1 : t.mu0;
  const double cooler = t.comparison.counterfactual_is_warmer ? t.mu0 : t.mu1;
  t.rr_star = warmer / cooler;
  t.far_star = 1.0 - 1.0 / t.rr_star;
  t.ate_star = warmer - cooler;
  return t;
}

}  // namespace

TruthScenario build_truth(const PredictionSet& preds_factual,
                          const PredictionSet& preds_cf, const std::string& label,
                          const ComparisonSpec& comparison) {
  if (preds_factual.probs.size() != preds_cf.probs.size() || preds_factual.probs.empty())
    throw Error(ErrorCode::MisalignedPair,
                "factual and counterfactual prediction sets must be aligned");
  TruthScenario t;
  t.label = label;
  t.pi0 = preds_factual.probs;
  t.pi1 = preds_cf.probs;
  t.comparison = comparison;
  return finish_truth(std::move(t));
}

TruthScenario build_truth_from_generator(const SyntheticTruth& truth,
                                         const std::string& label,
                                         const ComparisonSpec& comparison) {
  TruthScenario t;
  t.label = label;
  t.pi0 = truth.pi0;
  t.pi1 = truth.pi1;
  t.comparison = comparison;
  return finish_truth(std::move(t));
}

std::optional<SimResultRow> run_replicate(const TruthScenario& truth,
                                          const ScenarioDataset& factual,
                                          const ScenarioDataset& counterfactual,
                                          const ModelSpec& zoo_spec,
                                          const FoldPlan& folds, int r,
                                          std::uint64_t master_seed) {
  if (factual.size() != truth.pi0.size())
    throw Error(ErrorCode::MisalignedPair, "truth not aligned to the factual design");

  // outcome draws are shared by every model within (truth, replicate)
  const auto y = sample_outcomes(
      truth.pi0, rng::derive(master_seed, "simlab/outcomes/" + truth.label,
                             static_cast<std::uint64_t>(r)));
  double positives = 0.0;
  for (const double v : y) positives += v;
  if (positives == 0.0 || positives == static_cast<double>(y.size()))
    return std::nullopt;  // SingleClassReplicate: recorded by the caller

  ScenarioDataset replicate = factual;
  for (std::size_t i = 0; i < replicate.records.size(); ++i)
    replicate.records[i].outcome = static_cast<int>(y[i]);

  ModelSpec spec = zoo_spec;
  spec.seed = rng::derive(master_seed,
                          "simlab/model/" + truth.label + "/" + zoo_spec.label(),
                          static_cast<std::uint64_t>(r));

  CrossFitResult fitres;
  try {
    fitres = cross_fit(spec, replicate, folds, {&counterfactual});
  } catch (const Error& e) {
    if (e.code() == ErrorCode::SingleClassTraining) return std::nullopt;
    throw;
  }

  SimResultRow row;
  row.truth_label = truth.label;
  row.model_label = zoo_spec.label();
  row.replicate = r;
  row.auc = auc(fitres.factual_oos.probs, y);
  row.brier = brier(fitres.factual_oos.probs, y);
  row.brier_skill = brier_skill(fitres.factual_oos.probs, y);
  row.mce = mean_calibration_error(fitres.factual_oos.probs, y);

  const PredictionSet& cf_preds = fitres.counterfactual.at(0);
  row.est_cf_mean = cf_preds.mean();
  row.abs_log_rr_error = log_rr_error(truth.mu1, row.est_cf_mean);
  row.est_cf_mean_ppi = ppi_mean(y, fitres.factual_oos, cf_preds);
  row.abs_log_rr_error_ppi =
      log_rr_error(truth.mu1, std::max(row.est_cf_mean_ppi, kTruthFloor));

  // counterfactual outcomes are unobservable outside the harness, so the
  // out-of-sample metrics use draws from pi1
  const auto y_cf = sample_outcomes(
      truth.pi1, rng::derive(master_seed, "simlab/oos_outcomes/" + truth.label,
                             static_cast<std::uint64_t>(r)));
  double cf_pos = 0.0;
  for (const double v : y_cf) cf_pos += v;
  if (cf_pos > 0.0 && cf_pos < static_cast<double>(y_cf.size())) {
    row.oos_auc = auc(cf_preds.probs, y_cf);
    row.oos_brier = brier(cf_preds.probs, y_cf);
    row.oos_brier_skill = brier_skill(cf_preds.probs, y_cf);
    row.oos_mce = mean_calibration_error(cf_preds.probs, y_cf);
  }
  return row;
}

std::string SimResultRow::csv_header() {
  return "truth,model,replicate,auc,brier,brier_skill,mce,oos_auc,oos_brier,"
         "oos_brier_skill,oos_mce,est_cf_mean,abs_log_rr_error,est_cf_mean_ppi,"
         "abs_log_rr_error_ppi";
}

std::string SimResultRow::to_csv_row() const {
  std::string out = truth_label + "," + model_label + "," + std::to_string(replicate);
  for (const double v : {auc, brier, brier_skill, mce, oos_auc, oos_brier,
                         oos_brier_skill, oos_mce, est_cf_mean, abs_log_rr_error,
                         est_cf_mean_ppi, abs_log_rr_error_ppi}) {
    out += ',';
    out += fmt_double(v);
  }
  return out;
}

SimResultRow SimResultRow::from_csv_row(const std::string& line) {
  std::vector<std::string> fields;
  std::size_t pos = 0;
  while (pos <= line.size()) {
    std::size_t comma = line.find(',', pos);
    if (comma == std::string::npos) comma = line.size();
    fields.push_back(line.substr(pos, comma - pos));
    pos = comma + 1;
  }
  if (fields.size() != 15)
    throw Error(ErrorCode::ConfigParse, "simulation row has " +
                                            std::to_string(fields.size()) +
                                            " fields, expected 15");
  SimResultRow row;
  row.truth_label = fields[0];
  row.model_label = fields[1];
  row.replicate = std::stoi(fields[2]);
  double* slots[12] = {&row.auc,         &row.brier,
                       &row.brier_skill, &row.mce,
                       &row.oos_auc,     &row.oos_brier,
                       &row.oos_brier_skill, &row.oos_mce,
                       &row.est_cf_mean, &row.abs_log_rr_error,
                       &row.est_cf_mean_ppi, &row.abs_log_rr_error_ppi};
  for (int i = 0; i < 12; ++i) *slots[i] = std::strtod(fields[3 + i].c_str(), nullptr);
  return row;
}

double SimResultRow::in_sample_metric(MetricId id) const {
  switch (id) {
    case MetricId::Auc: return auc;
    case MetricId::Brier: return brier;
    case MetricId::BrierSkill: return brier_skill;
    case MetricId::Mce: return mce;
    case MetricId::LogLoss: break;
  }
  throw Error(ErrorCode::ConfigParse, "metric not recorded in simulation rows");
}

CorrelationReport correlate(const std::vector<SimResultRow>& rows, MetricId metric_id) {
  if (rows.size() < 10)
    throw Error(ErrorCode::MisalignedPair,
                "correlation needs at least 10 rows, got " + std::to_string(rows.size()));
  std::vector<double> x, err;
  x.reserve(rows.size());
  err.reserve(rows.size());
  for (const auto& row : rows) {
    x.push_back(row.in_sample_metric(metric_id));
    err.push_back(row.abs_log_rr_error);
  }
  CorrelationReport report;
  report.metric = metric_name(metric_id);
  report.r = stats::pearson_r(x, err);
  report.p_value = stats::pearson_p_value(report.r, rows.size());
  report.n = rows.size();
  return report;
}

RegretReport regret(const std::vector<SimResultRow>& rows,
                    const std::function<double(const SimResultRow&)>& metric,
                    bool higher_is_better, const std::string& metric_label,
                    int n_samples, int sample_size, std::uint64_t seed) {
  if (rows.empty()) throw Error(ErrorCode::InsufficientModels, "no simulation rows");

  std::set<std::string> model_set;
  for (const auto& row : rows) model_set.insert(row.model_label);
  const std::vector<std::string> models(model_set.begin(), model_set.end());

  // replicate groups where every model reported a row
  std::map<std::pair<std::string, int>, std::map<std::string, const SimResultRow*>> groups;
  for (const auto& row : rows)
    groups[{row.truth_label, row.replicate}][row.model_label] = &row;
  std::vector<const std::map<std::string, const SimResultRow*>*> complete;
  for (const auto& [key, by_model] : groups)
    if (by_model.size() == models.size()) complete.push_back(&by_model);
  if (complete.empty())
    throw Error(ErrorCode::InsufficientModels, "no replicate group covers every model");

  RegretReport report;
  report.metric = metric_label;
  report.n_models = models.size();
  report.sample_size = static_cast<std::size_t>(sample_size);

  if (models.size() == 1) {
    // selection is degenerate; regret is just the model's mean error
    double total = 0.0;
    std::size_t n = 0;
    for (const auto& row : rows) {
      total += row.abs_log_rr_error;
      ++n;
    }
    report.mean_error = total / static_cast<double>(n);
    report.n_samples = 0;
    return report;
  }

  double regret_sum = 0.0;
  std::vector<std::size_t> drawn(static_cast<std::size_t>(sample_size));
  for (int s = 0; s < n_samples; ++s) {
    rng::Stream stream(rng::derive(seed, "regret/sample", static_cast<std::uint64_t>(s)));
    for (auto& d : drawn) d = static_cast<std::size_t>(stream.uniform_below(complete.size()));
    std::size_t best_model = 0;
    double best_metric = 0.0;
    double best_error = 0.0;
    for (std::size_t m = 0; m < models.size(); ++m) {
      double metric_sum = 0.0, error_sum = 0.0;
      for (const std::size_t gi : drawn) {
        const SimResultRow* row = complete[gi]->at(models[m]);
        metric_sum += metric(*row);
        error_sum += row->abs_log_rr_error;
      }
      const double mean_metric = metric_sum / static_cast<double>(sample_size);
      const double mean_error = error_sum / static_cast<double>(sample_size);
      const bool better =
          m == 0 || (higher_is_better ? mean_metric > best_metric : mean_metric < best_metric);
      if (better) {
        best_model = m;
        best_metric = mean_metric;
        best_error = mean_error;
      }
    }
    (void)best_model;
    regret_sum += best_error;
  }
  report.mean_error = regret_sum / static_cast<double>(n_samples);
  report.n_samples = static_cast<std::size_t>(n_samples);
  return report;
}

RegretReport regret(const std::vector<SimResultRow>& rows, MetricId metric_id,
                    int n_samples, int sample_size, std::uint64_t seed) {
  return regret(
      rows, [metric_id](const SimResultRow& row) { return row.in_sample_metric(metric_id); },
      metric_higher_is_better(metric_id), metric_name(metric_id), n_samples, sample_size,
      seed);
}

}  // namespace eea
