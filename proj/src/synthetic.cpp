#include "eea/synthetic.hpp"

#include <algorithm>
#include <cmath>

#include "eea/error.hpp"
#include "eea/rng.hpp"
#include "eea/util.hpp"

namespace eea {

namespace {

double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

struct TruthFunction {
  const GeneratorConfig& cfg;
  double intercept = 0.0;

  // standardization constants are declared, not estimated
  double z_temp(double t) const { return (t - cfg.temperature_mean) / cfg.temperature_sd; }

  double logit(const FireDayRecord& r) const {
    const double zt = z_temp(r.temperature);
    double v = intercept;
    v += cfg.coef_temperature * zt;
    v += cfg.quad_temperature * zt * zt;
    v += cfg.coef_vpd * (r.vapor_pressure_deficit - 1.9) / 0.6;
    v += cfg.coef_fm100 * (r.fuel_moisture_100h - 11.0) / 2.3;
    v += cfg.coef_fm1000 * (r.fuel_moisture_1000h - 13.5) / 1.3;
    v += cfg.coef_precip * (r.precipitation - 0.6) / 0.6;
    v += cfg.coef_wind * (r.wind_speed - 4.7) / 1.1;
    v += cfg.coef_slope * (r.slope - 12.0) / 7.0;
    v += cfg.coef_elevation * (r.elevation - 950.0) / 420.0;
    v += cfg.coef_veg_frac * (r.vegetation_fraction - 0.55) / 0.17;
    switch (r.land_use) {
      case LandUse::Forest: v += cfg.coef_land_forest; break;
      case LandUse::Shrub: v += cfg.coef_land_shrub; break;
      case LandUse::SavannaGrassland: v += cfg.coef_land_savanna; break;
    }
    switch (r.aspect) {
      case Aspect::N: v += cfg.coef_aspect_n; break;
      case Aspect::E: v += cfg.coef_aspect_e; break;
      case Aspect::S: v += cfg.coef_aspect_s; break;
      case Aspect::W: v += cfg.coef_aspect_w; break;
    }
    return v;
  }

  double prob(const FireDayRecord& r) const { return sigmoid(logit(r)); }
};

FireDayRecord shift_record(const FireDayRecord& r, const GeneratorConfig& cfg) {
  FireDayRecord s = r;
  s.temperature = r.temperature + cfg.delta_c;
  s.vapor_pressure_deficit =
      std::max(0.05, r.vapor_pressure_deficit + cfg.coupling_vpd * cfg.delta_c);
  s.fuel_moisture_100h =
      std::max(1.0, r.fuel_moisture_100h + cfg.coupling_fm100 * cfg.delta_c);
  s.fuel_moisture_1000h =
      std::max(2.0, r.fuel_moisture_1000h + cfg.coupling_fm1000 * cfg.delta_c);
  s.outcome.reset();
  return s;
}

}  // namespace

bool GeneratorConfig::all_coefficients_zero() const {
  return coef_temperature == 0.0 && coef_vpd == 0.0 && coef_fm100 == 0.0 &&
         coef_fm1000 == 0.0 && coef_precip == 0.0 && coef_wind == 0.0 &&
         coef_slope == 0.0 && coef_elevation == 0.0 && coef_veg_frac == 0.0 &&
         coef_land_forest == 0.0 && coef_land_shrub == 0.0 &&
         coef_land_savanna == 0.0 && coef_aspect_n == 0.0 &&
         coef_aspect_e == 0.0 && coef_aspect_s == 0.0 && coef_aspect_w == 0.0 &&
         quad_temperature == 0.0;
}

double SyntheticTruth::mean_pi0() const {
  double s = 0.0;
  for (double v : pi0) s += v;
  return pi0.empty() ? 0.0 : s / static_cast<double>(pi0.size());
}

double SyntheticTruth::mean_pi1() const {
  double s = 0.0;
  for (double v : pi1) s += v;
  return pi1.empty() ? 0.0 : s / static_cast<double>(pi1.size());
}

SyntheticPair generate_synthetic(const GeneratorConfig& config, std::uint64_t seed) {
  if (config.n_days < 2)
    throw Error(ErrorCode::DegenerateConfig, "n_days must be >= 2");
  if (config.base_rate <= 0.0 || config.base_rate >= 1.0)
    throw Error(ErrorCode::DegenerateConfig, "base_rate must lie in (0,1)");
  if (config.all_coefficients_zero() && config.delta_c != 0.0)
    throw Error(ErrorCode::DegenerateConfig,
                "all truth coefficients are zero but a shifted truth was "
                "requested (delta_c != 0)");
  if (config.n_years < 1)
    throw Error(ErrorCode::DegenerateConfig, "n_years must be >= 1");

  SyntheticPair pair;
  pair.observed.scenario_id = ScenarioId::observed();

  // The population depends only on the config (including population_seed);
  // the `seed` argument drives outcome sampling alone.
  rng::Stream gen(rng::derive(config.population_seed, "synthetic/population"));

  const std::int64_t first_day = Date{config.year_start, 1, 1}.epoch_days();
  const std::int64_t span_days =
      Date{config.year_start + config.n_years - 1, 12, 31}.epoch_days() - first_day + 1;

  pair.observed.records.reserve(static_cast<std::size_t>(config.n_days));
  for (std::int64_t i = 0; i < config.n_days; ++i) {
    FireDayRecord r;
    r.day_id = i + 1;
    r.date = Date::from_epoch_days(first_day + (i * span_days) / config.n_days);
    r.temperature = gen.normal(config.temperature_mean, config.temperature_sd);
    r.vapor_pressure_deficit =
        std::max(0.05, 1.9 + config.vpd_slope * (r.temperature - config.temperature_mean) +
                           gen.normal(0.0, config.vpd_noise_sd));
    r.fuel_moisture_100h =
        std::max(1.0, 11.0 + config.fm100_slope * (r.temperature - config.temperature_mean) +
                          gen.normal(0.0, config.fm100_noise_sd));
    r.fuel_moisture_1000h =
        std::max(2.0, 13.5 + config.fm1000_slope * (r.temperature - config.temperature_mean) +
                          gen.normal(0.0, config.fm1000_noise_sd));
    r.precipitation = gen.exponential(0.6);
    r.wind_speed = std::abs(gen.normal(4.7, 1.4));
    const double u_land = gen.uniform01();
    r.land_use = u_land < 0.45 ? LandUse::Forest
                 : u_land < 0.80 ? LandUse::Shrub
                                 : LandUse::SavannaGrassland;
    r.aspect = static_cast<Aspect>(gen.uniform_below(4));
    r.slope = std::abs(gen.normal(12.0, 7.0));
    r.elevation = std::max(0.0, gen.normal(950.0, 420.0));
    r.vegetation_fraction = std::clamp(gen.normal(0.55, 0.17), 0.02, 0.98);
    pair.observed.records.push_back(std::move(r));
  }

  pair.counterfactual.scenario_id = [&] {
    if (!config.counterfactual_label.empty())
      return ScenarioId::parse(config.counterfactual_label);
    if (config.delta_c < 0.0) return ScenarioId::pre_industrial();
    if (config.delta_c > 0.0) return ScenarioId::ssp585_eoc();
    return ScenarioId::synthetic("delta0");
  }();
  pair.counterfactual.records.reserve(pair.observed.records.size());
  for (const auto& r : pair.observed.records)
    pair.counterfactual.records.push_back(shift_record(r, config));

  // Tune the intercept so that mean(pi0) hits base_rate: the mean is strictly
  // increasing in the intercept, so bisection on [-40, 10] converges.
  TruthFunction truth{config, 0.0};
  std::vector<double> base_logits(pair.observed.records.size());
  for (std::size_t i = 0; i < pair.observed.records.size(); ++i)
    base_logits[i] = truth.logit(pair.observed.records[i]);
  const auto mean_prob_at = [&](double b0) {
    double s = 0.0;
    for (const double l : base_logits) s += sigmoid(l + b0);
    return s / static_cast<double>(base_logits.size());
  };
  double lo = -40.0, hi = 10.0;
  for (int iter = 0; iter < 200 && hi - lo > 1e-13; ++iter) {
    const double mid = 0.5 * (lo + hi);
    (mean_prob_at(mid) < config.base_rate ? lo : hi) = mid;
  }
  const double intercept = 0.5 * (lo + hi);

  truth.intercept = intercept;
  SyntheticTruth& t = pair.truth;
  t.generator_params = config;
  t.intercept = intercept;
  t.seed = seed;
  t.pi0.resize(pair.observed.records.size());
  t.pi1.resize(pair.observed.records.size());
  for (std::size_t i = 0; i < pair.observed.records.size(); ++i) {
    t.pi0[i] = sigmoid(base_logits[i] + intercept);
    t.pi1[i] = truth.prob(pair.counterfactual.records[i]);
  }

  const auto y = sample_outcomes(t.pi0, rng::derive(seed, "synthetic/outcomes"));
  for (std::size_t i = 0; i < y.size(); ++i)
    pair.observed.records[i].outcome = static_cast<int>(y[i]);

  return pair;
}

std::vector<double> sample_outcomes(const std::vector<double>& probs, std::uint64_t seed) {
  for (std::size_t i = 0; i < probs.size(); ++i) {
    if (!(probs[i] >= 0.0 && probs[i] <= 1.0))
      throw Error(ErrorCode::ProbabilityOutOfRange,
                  "probability at index " + std::to_string(i) + " is " +
                      fmt_double(probs[i]));
  }
  rng::Stream stream(rng::derive(seed, "outcome_draws"));
  std::vector<double> y(probs.size());
  for (std::size_t i = 0; i < probs.size(); ++i)
    y[i] = stream.bernoulli(probs[i]) ? 1.0 : 0.0;
  return y;
}

std::string write_truth_csv(const SyntheticTruth& truth,
                            const std::vector<std::int64_t>& day_ids) {
  std::string out = "day_id,pi0,pi1\n";
  for (std::size_t i = 0; i < day_ids.size(); ++i) {
    out += std::to_string(day_ids[i]);
    out += ',';
    out += fmt_double(truth.pi0[i]);
    out += ',';
    out += fmt_double(truth.pi1[i]);
    out += '\n';
  }
  return out;
}

SyntheticTruth read_truth_csv(const std::string& csv_text,
                              const std::vector<std::int64_t>& expected_day_ids) {
  SyntheticTruth truth;
  std::size_t pos = csv_text.find('\n');
  if (pos == std::string::npos || csv_text.substr(0, pos) != "day_id,pi0,pi1")
    throw Error(ErrorCode::MissingColumn, "truth file header must be day_id,pi0,pi1");
  ++pos;
  std::size_t row = 0;
  while (pos < csv_text.size()) {
    std::size_t end = csv_text.find('\n', pos);
    if (end == std::string::npos) end = csv_text.size();
    const std::string line = csv_text.substr(pos, end - pos);
    pos = end + 1;
    if (line.empty()) continue;
    std::int64_t id = 0;
    double p0 = 0.0, p1 = 0.0;
    if (std::sscanf(line.c_str(), "%lld,%lf,%lf", reinterpret_cast<long long*>(&id),
                    &p0, &p1) != 3)
      throw Error(ErrorCode::NonFiniteValue,
                  "truth file row " + std::to_string(row + 1) + " is malformed");
    if (row >= expected_day_ids.size() || expected_day_ids[row] != id)
      throw Error(ErrorCode::MisalignedPair,
                  "truth file day_id " + std::to_string(id) +
                      " does not match dataset order at row " + std::to_string(row + 1));
    truth.pi0.push_back(p0);
    truth.pi1.push_back(p1);
    ++row;
  }
  if (row != expected_day_ids.size())
    throw Error(ErrorCode::MisalignedPair, "truth file is missing rows");
  return truth;
}

}  // namespace eea
