#include "eea/shift.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "eea/error.hpp"
#include "eea/metrics.hpp"
#include "eea/rng.hpp"
#include "eea/util.hpp"

namespace eea {

PropensityScores fit_propensity(const ScenarioDataset& factual,
                                const ScenarioDataset& counterfactual,
                                const FoldPlan& folds, const ModelSpec& spec) {
  check_pairing(factual, counterfactual);
  const std::size_t n = factual.size();

  // combined design: factual rows first, then counterfactual; label 1 = factual
  const FeatureMatrix xf = encode_features(factual);
  const FeatureMatrix xc = encode_features(counterfactual);
  FeatureMatrix combined;
  combined.names = xf.names;
  combined.n_rows = 2 * n;
  combined.values = xf.values;
  combined.values.insert(combined.values.end(), xc.values.begin(), xc.values.end());
  std::vector<double> labels(2 * n, 0.0);
  std::fill(labels.begin(), labels.begin() + static_cast<std::ptrdiff_t>(n), 1.0);

  const auto block_of_day = folds.block_of_day();
  std::vector<int> block_of_row(2 * n);
  for (std::size_t i = 0; i < n; ++i) {
    const auto it = block_of_day.find(factual.records[i].day_id);
    if (it == block_of_day.end())
      throw Error(ErrorCode::MisalignedPair,
                  "day " + std::to_string(factual.records[i].day_id) +
                      " missing from fold plan");
    block_of_row[i] = it->second;
    block_of_row[n + i] = it->second;  // paired day shares the block
  }

  PropensityScores out;
  out.factual.assign(n, 0.0);
  out.counterfactual.assign(n, 0.0);
  out.fold_of_day.assign(n, "");

  for (std::size_t b = 0; b < folds.n_blocks(); ++b) {
    std::vector<std::size_t> train_rows, test_rows;
    for (std::size_t r = 0; r < 2 * n; ++r)
      (block_of_row[r] == static_cast<int>(b) ? test_rows : train_rows).push_back(r);
    if (test_rows.empty()) continue;
    std::vector<double> y_train;
    y_train.reserve(train_rows.size());
    for (const auto r : train_rows) y_train.push_back(labels[r]);
    ModelSpec block_spec = spec;
    block_spec.seed = rng::derive(spec.seed, "propensity/block", b);
    const auto model = fit(block_spec, combined.select_rows(train_rows), y_train);
    const auto scores = model->predict(combined.select_rows(test_rows));
    for (std::size_t k = 0; k < test_rows.size(); ++k) {
      const std::size_t r = test_rows[k];
      if (r < n) {
        out.factual[r] = scores[k];
        out.fold_of_day[r] = folds.blocks[b].label;
      } else {
        out.counterfactual[r - n] = scores[k];
      }
    }
  }
  return out;
}

ProxyADistance proxy_a_distance(std::span<const double> scores,
                                std::span<const double> labels, double threshold) {
  if (scores.size() != labels.size() || scores.empty())
    throw Error(ErrorCode::MisalignedPair, "scores and labels must be aligned");
  std::size_t n_pos = 0;
  for (const double v : labels) n_pos += v > 0.5;
  if (n_pos == 0 || n_pos == labels.size())
    throw Error(ErrorCode::SingleClass, "both source labels must be present");
  std::size_t correct = 0;
  for (std::size_t i = 0; i < scores.size(); ++i) {
    const int predicted = scores[i] > threshold ? 1 : 0;
    correct += predicted == (labels[i] > 0.5 ? 1 : 0);
  }
  ProxyADistance result;
  result.accuracy = static_cast<double>(correct) / static_cast<double>(scores.size());
  result.distance = 2.0 - 4.0 * (1.0 - result.accuracy);
  return result;
}

ImportanceWeights importance_weights(std::span<const double> scores_factual,
                                     double clip_lo, double clip_hi) {
  if (scores_factual.empty())
    throw Error(ErrorCode::AllZeroWeights, "no propensity scores given");
  ImportanceWeights out;
  out.clip_lo = clip_lo;
  out.clip_hi = clip_hi;
  out.weights.resize(scores_factual.size());
  for (std::size_t i = 0; i < scores_factual.size(); ++i) {
    const double e = std::clamp(scores_factual[i], clip_lo, clip_hi);
    out.clipped += e != scores_factual[i];
    out.weights[i] = (1.0 - e) / e;
  }
  if (2 * out.clipped > scores_factual.size())
    throw Error(ErrorCode::AllClipped,
                std::to_string(out.clipped) + " of " +
                    std::to_string(scores_factual.size()) +
                    " scores hit the clip bounds");
  double mean_w = 0.0;
  for (const double w : out.weights) mean_w += w;
  mean_w /= static_cast<double>(out.weights.size());
  for (double& w : out.weights) w /= mean_w;
  return out;
}

std::vector<SubgroupBin> temperature_subgroups(const ScenarioDataset& dataset,
                                               const PredictionSet& preds, int k) {
  if (k < 1) throw Error(ErrorCode::ConfigParse, "k must be >= 1");
  if (!preds.out_of_sample)
    throw Error(ErrorCode::InSampleLeakage,
                "subgroup calibration needs out-of-sample predictions");
  const std::size_t n = dataset.size();
  if (preds.probs.size() != n)
    throw Error(ErrorCode::MisalignedPair, "predictions not aligned to dataset");
  const std::vector<double> y = dataset.outcomes();

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0u);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return dataset.records[a].temperature < dataset.records[b].temperature;
  });

  std::vector<SubgroupBin> bins;
  bins.reserve(static_cast<std::size_t>(k));
  for (int b = 0; b < k; ++b) {
    const std::size_t begin = (static_cast<std::size_t>(b) * n) / static_cast<std::size_t>(k);
    const std::size_t end =
        (static_cast<std::size_t>(b + 1) * n) / static_cast<std::size_t>(k);
    if (end - begin < 30)
      throw Error(ErrorCode::TooFewPerBin,
                  "bin " + std::to_string(b + 1) + " has " +
                      std::to_string(end - begin) + " days (< 30)");
    SubgroupBin bin;
    bin.label = "bin_" + std::to_string(b + 1);
    bin.n = end - begin;
    bin.temp_lo = dataset.records[order[begin]].temperature;
    bin.temp_hi = dataset.records[order[end - 1]].temperature;
    double mp = 0.0, my = 0.0;
    for (std::size_t i = begin; i < end; ++i) {
      mp += preds.probs[order[i]];
      my += y[order[i]];
    }
    bin.mean_calibration_error = std::abs(mp - my) / static_cast<double>(bin.n);
    bins.push_back(std::move(bin));
  }
  return bins;
}

// ---------------------------------------------------------------------------
// PCA of factual correlation structure via cyclic Jacobi rotations (the
// matrix is at most 9x9, so plain Jacobi is plenty).

namespace {

constexpr std::size_t kNumericFeatures = 9;  // leading schema entries

void jacobi_eigen(std::vector<double>& a, std::size_t n, std::vector<double>& values,
                  std::vector<double>& vectors /* column-major eigenvectors */) {
  vectors.assign(n * n, 0.0);
  for (std::size_t i = 0; i < n; ++i) vectors[i * n + i] = 1.0;
  for (int sweep = 0; sweep < 100; ++sweep) {
    double off = 0.0;
    for (std::size_t p = 0; p < n; ++p)
      for (std::size_t q = p + 1; q < n; ++q) off += a[p * n + q] * a[p * n + q];
    if (off < 1e-24) break;
    for (std::size_t p = 0; p < n; ++p)
      for (std::size_t q = p + 1; q < n; ++q) {
        const double apq = a[p * n + q];
        if (std::abs(apq) < 1e-300) continue;
        const double theta = (a[q * n + q] - a[p * n + p]) / (2.0 * apq);
        const double t = (theta >= 0.0 ? 1.0 : -1.0) /
                         (std::abs(theta) + std::sqrt(theta * theta + 1.0));
        const double c = 1.0 / std::sqrt(t * t + 1.0);
        const double s = t * c;
        for (std::size_t i = 0; i < n; ++i) {
          const double aip = a[i * n + p];
          const double aiq = a[i * n + q];
          a[i * n + p] = c * aip - s * aiq;
          a[i * n + q] = s * aip + c * aiq;
        }
        for (std::size_t i = 0; i < n; ++i) {
          const double api = a[p * n + i];
          const double aqi = a[q * n + i];
          a[p * n + i] = c * api - s * aqi;
          a[q * n + i] = s * api + c * aqi;
        }
        for (std::size_t i = 0; i < n; ++i) {
          const double vip = vectors[i * n + p];
          const double viq = vectors[i * n + q];
          vectors[i * n + p] = c * vip - s * viq;
          vectors[i * n + q] = s * vip + c * viq;
        }
      }
  }
  values.resize(n);
  for (std::size_t i = 0; i < n; ++i) values[i] = a[i * n + i];
}

std::vector<double> numeric_means(const ScenarioDataset& d) {
  const FeatureMatrix X = encode_features(d);
  std::vector<double> m(kNumericFeatures, 0.0);
  for (std::size_t r = 0; r < X.n_rows; ++r)
    for (std::size_t c = 0; c < kNumericFeatures; ++c) m[c] += X.at(r, c);
  for (double& v : m) v /= static_cast<double>(X.n_rows);
  return m;
}

}  // namespace

PcaShiftSummary pca_shift_summary(
    const ScenarioDataset& factual,
    const std::vector<const ScenarioDataset*>& counterfactuals) {
  const FeatureMatrix X = encode_features(factual);
  const std::size_t n = X.n_rows;
  const std::size_t p = kNumericFeatures;
  if (n < 3) throw Error(ErrorCode::RankDeficient, "too few rows for PCA");

  std::vector<double> mean(p, 0.0), sd(p, 0.0);
  for (std::size_t r = 0; r < n; ++r)
    for (std::size_t c = 0; c < p; ++c) mean[c] += X.at(r, c);
  for (double& v : mean) v /= static_cast<double>(n);
  for (std::size_t r = 0; r < n; ++r)
    for (std::size_t c = 0; c < p; ++c) {
      const double d = X.at(r, c) - mean[c];
      sd[c] += d * d;
    }
  for (double& v : sd) v = std::sqrt(v / static_cast<double>(n));
  for (double& v : sd)
    if (v == 0.0) v = 1.0;  // constant columns contribute zero correlation

  std::vector<double> corr(p * p, 0.0);
  for (std::size_t r = 0; r < n; ++r)
    for (std::size_t c1 = 0; c1 < p; ++c1) {
      const double z1 = (X.at(r, c1) - mean[c1]) / sd[c1];
      for (std::size_t c2 = 0; c2 <= c1; ++c2) {
        const double z2 = (X.at(r, c2) - mean[c2]) / sd[c2];
        corr[c1 * p + c2] += z1 * z2;
      }
    }
  for (std::size_t c1 = 0; c1 < p; ++c1)
    for (std::size_t c2 = 0; c2 <= c1; ++c2) {
      corr[c1 * p + c2] /= static_cast<double>(n);
      corr[c2 * p + c1] = corr[c1 * p + c2];
    }

  std::vector<double> values, vectors;
  jacobi_eigen(corr, p, values, vectors);
  std::vector<std::size_t> order(p);
  std::iota(order.begin(), order.end(), 0u);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return values[a] > values[b]; });
  if (values[order[1]] <= 1e-12)
    throw Error(ErrorCode::RankDeficient, "fewer than 2 nonzero eigenvalues");

  PcaShiftSummary summary;
  summary.feature_names.assign(feature_schema().begin(),
                               feature_schema().begin() + static_cast<std::ptrdiff_t>(p));
  summary.eigenvalue1 = values[order[0]];
  summary.eigenvalue2 = values[order[1]];
  summary.loading1.resize(p);
  summary.loading2.resize(p);
  for (std::size_t i = 0; i < p; ++i) {
    summary.loading1[i] = vectors[i * p + order[0]];
    summary.loading2[i] = vectors[i * p + order[1]];
  }
  // sign convention: the largest-magnitude component points up
  for (auto* loading : {&summary.loading1, &summary.loading2}) {
    std::size_t arg = 0;
    for (std::size_t i = 1; i < p; ++i)
      if (std::abs((*loading)[i]) > std::abs((*loading)[arg])) arg = i;
    if ((*loading)[arg] < 0.0)
      for (double& v : *loading) v = -v;
  }

  const auto project = [&](const std::vector<double>& scenario_mean, const std::vector<double>& loading) {
    double s = 0.0;
    for (std::size_t c = 0; c < p; ++c)
      s += loading[c] * (scenario_mean[c] - mean[c]) / sd[c];
    return s;
  };
  summary.scenario_labels.push_back(factual.scenario_id.to_string());
  const auto fmean = numeric_means(factual);
  summary.proj1.push_back(project(fmean, summary.loading1));
  summary.proj2.push_back(project(fmean, summary.loading2));
  for (const ScenarioDataset* cf : counterfactuals) {
    summary.scenario_labels.push_back(cf->scenario_id.to_string());
    const auto cmean = numeric_means(*cf);
    summary.proj1.push_back(project(cmean, summary.loading1));
    summary.proj2.push_back(project(cmean, summary.loading2));
  }
  return summary;
}

// ---------------------------------------------------------------------------

std::string ShiftReport::to_json() const {
  const auto vec_stats = [](const std::vector<double>& v) {
    double lo = v.empty() ? 0.0 : v[0], hi = lo, mean = 0.0;
    for (const double x : v) {
      lo = std::min(lo, x);
      hi = std::max(hi, x);
      mean += x;
    }
    if (!v.empty()) mean /= static_cast<double>(v.size());
    return "{\"mean\":" + fmt_double(mean) + ",\"min\":" + fmt_double(lo) +
           ",\"max\":" + fmt_double(hi) + "}";
  };
  std::string out = "{";
  out += "\"proxy_a_distance\":" + fmt_double(proxy_a.distance) + ",";
  out += "\"accuracy\":" + fmt_double(proxy_a.accuracy) + ",";
  out += "\"propensity_factual\":" + vec_stats(propensity.factual) + ",";
  out += "\"propensity_counterfactual\":" + vec_stats(propensity.counterfactual) + ",";
  out += "\"weights_clipped\":" + std::to_string(weights.clipped) + ",";
  out += "\"clip_lo\":" + fmt_double(weights.clip_lo) + ",";
  out += "\"clip_hi\":" + fmt_double(weights.clip_hi) + ",";
  out += "\"subgroup_curve\":[";
  for (std::size_t i = 0; i < subgroup_curve.size(); ++i) {
    const auto& b = subgroup_curve[i];
    if (i) out += ',';
    out += "{\"label\":\"" + b.label + "\",\"temp_lo\":" + fmt_double(b.temp_lo) +
           ",\"temp_hi\":" + fmt_double(b.temp_hi) + ",\"n\":" + std::to_string(b.n) +
           ",\"mce\":" + fmt_double(b.mean_calibration_error) + "}";
  }
  out += "],";
  out += "\"pca\":{";
  out += "\"eigenvalue1\":" + fmt_double(pca.eigenvalue1) + ",";
  out += "\"eigenvalue2\":" + fmt_double(pca.eigenvalue2) + ",";
  out += "\"scenarios\":[";
  for (std::size_t i = 0; i < pca.scenario_labels.size(); ++i) {
    if (i) out += ',';
    out += "{\"scenario\":\"" + pca.scenario_labels[i] +
           "\",\"pc1\":" + fmt_double(pca.proj1[i]) +
           ",\"pc2\":" + fmt_double(pca.proj2[i]) + "}";
  }
  out += "]}";
  out += "}";
  return out;
}

std::string ShiftReport::subgroup_csv() const {
  std::string out = "bin,temp_lo,temp_hi,n,mean_calibration_error\n";
  for (const auto& b : subgroup_curve) {
    out += b.label + "," + fmt_double(b.temp_lo) + "," + fmt_double(b.temp_hi) + "," +
           std::to_string(b.n) + "," + fmt_double(b.mean_calibration_error) + "\n";
  }
  return out;
}

std::string ShiftReport::pca_csv() const {
  std::string out = "scenario,pc1,pc2\n";
  for (std::size_t i = 0; i < pca.scenario_labels.size(); ++i)
    out += pca.scenario_labels[i] + "," + fmt_double(pca.proj1[i]) + "," +
           fmt_double(pca.proj2[i]) + "\n";
  return out;
}

std::string ShiftReport::propensity_csv(const std::vector<std::int64_t>& day_ids) const {
  std::string out = "day_id,fold,score_factual,score_counterfactual,weight\n";
  for (std::size_t i = 0; i < day_ids.size(); ++i) {
    out += std::to_string(day_ids[i]) + "," + propensity.fold_of_day[i] + "," +
           fmt_double(propensity.factual[i]) + "," +
           fmt_double(propensity.counterfactual[i]) + "," +
           fmt_double(i < weights.weights.size() ? weights.weights[i] : 0.0) + "\n";
  }
  return out;
}

}  // namespace eea
