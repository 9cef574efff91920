#pragma once

#include <cstdint>
#include <string>
#include <tuple>
#include <vector>

#include "eea/data.hpp"

namespace eea {

// Declared synthetic world. Predictors are drawn from fixed parametric
// distributions; the true risk is logistic in standardized predictors with a
// single quadratic temperature term, so linear learners are mildly
// misspecified at temperature extremes. The counterfactual scenario shifts
// temperature by delta_c and propagates the shift into VPD and fuel moistures
// through declared linear couplings; land, precipitation, and wind are held
// constant across the pair.
struct GeneratorConfig {
  std::int64_t n_days = 20000;
  int year_start = 2003;
  int n_years = 6;
  double base_rate = 0.0212;  // target mean of pi0, intercept tuned to match
  double delta_c = 0.0;       // counterfactual temperature shift, degC

  // predictor distributions
  double temperature_mean = 30.0;
  double temperature_sd = 2.2;
  double vpd_slope = 0.18;   // kPa per degC within the factual climate
  double vpd_noise_sd = 0.45;
  double fm100_slope = -0.8;  // percent per degC
  double fm100_noise_sd = 1.5;
  double fm1000_slope = -0.35;
  double fm1000_noise_sd = 1.0;

  // counterfactual couplings (change per degC of delta_c)
  double coupling_vpd = 0.18;
  double coupling_fm100 = -0.8;
  double coupling_fm1000 = -0.35;

  // truth-function coefficients on standardized predictors
  double coef_temperature = 0.5;
  double coef_vpd = 0.5;
  double coef_fm100 = -0.4;
  double coef_fm1000 = -0.25;
  double coef_precip = -0.1;
  double coef_wind = 0.3;
  double coef_slope = 0.15;
  double coef_elevation = -0.1;
  double coef_veg_frac = 0.2;
  double coef_land_forest = 0.1;
  double coef_land_shrub = 0.0;
  double coef_land_savanna = -0.1;
  double coef_aspect_n = -0.05;
  double coef_aspect_e = 0.0;
  double coef_aspect_s = 0.05;
  double coef_aspect_w = 0.0;
  double quad_temperature = 0.35;  // coefficient on z_T^2

  // The population (predictors and pi vectors) is a pure function of the
  // config including this seed; the generate-time seed only drives outcomes.
  std::uint64_t population_seed = 0xeea5eedULL;

  std::string counterfactual_label;  // empty = derived from sign of delta_c

  bool all_coefficients_zero() const;
};

struct SyntheticTruth {
  std::vector<double> pi0;  // aligned to day_ids, values in (0,1)
  std::vector<double> pi1;
  GeneratorConfig generator_params;
  double intercept = 0.0;  // tuned by bisection against base_rate
  std::uint64_t seed = 0;

  double mean_pi0() const;
  double mean_pi1() const;
};

struct SyntheticPair {
  ScenarioDataset observed;        // outcomes sampled from pi0
  ScenarioDataset counterfactual;  // no outcomes
  SyntheticTruth truth;
};

SyntheticPair generate_synthetic(const GeneratorConfig& config, std::uint64_t seed);

// Independent Bernoulli draw per day; reproducible given seed.
std::vector<double> sample_outcomes(const std::vector<double>& probs, std::uint64_t seed);

std::string write_truth_csv(const SyntheticTruth& truth,
                            const std::vector<std::int64_t>& day_ids);
SyntheticTruth read_truth_csv(const std::string& csv_text,
                              const std::vector<std::int64_t>& expected_day_ids);

}  // namespace eea
