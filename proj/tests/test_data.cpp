#include <cmath>
#include <set>

#include "doctest.h"
#include "eea/data.hpp"
#include "eea/error.hpp"
#include "eea/folds.hpp"
#include "eea/rng.hpp"
#include "eea/synthetic.hpp"

using namespace eea;

namespace {

const char* kThreeRowCsv =
    "day_id,date,temperature,vpd,fm100,fm1000,precip,wind,land_use,aspect,slope,"
    "elevation,veg_frac,outcome\n"
    "1,2003-06-01,31.5,2.1,9.0,12.0,0.0,4.2,forest,N,10,800,0.6,0\n"
    "2,2003-06-02,28.0,1.4,13.5,14.0,1.2,3.1,shrub,S,5,650,0.4,0\n"
    "3,2003-06-03,35.2,2.9,6.0,10.5,0.0,6.0,savanna_grassland,W,2,400,0.3,1\n";

ScenarioDataset year_span_dataset(int year_start, int year_end) {
  ScenarioDataset d;
  d.scenario_id = ScenarioId::observed();
  std::int64_t id = 1;
  for (int y = year_start; y <= year_end; ++y) {
    for (int m : {3, 9}) {
      FireDayRecord r;
      r.day_id = id++;
      r.date = Date{y, m, 15};
      r.outcome = 0;
      d.records.push_back(r);
    }
  }
  return d;
}

}  // namespace

TEST_CASE("csv ingest accepts a well-formed factual file") {
  const ScenarioDataset d = ingest_csv(kThreeRowCsv, ScenarioId::observed());
  CHECK(d.size() == 3);
  CHECK(d.records[0].outcome.value() == 0);
  CHECK(d.records[2].outcome.value() == 1);
  CHECK(d.prevalence() == doctest::Approx(1.0 / 3.0));
  CHECK(d.records[1].land_use == LandUse::Shrub);
  CHECK(d.records[2].aspect == Aspect::W);
  CHECK(d.records[0].date.to_iso() == "2003-06-01");
}

TEST_CASE("csv ingest rejects schema violations") {
  std::string bad_level = kThreeRowCsv;
  const auto pos = bad_level.find("shrub");
  bad_level.replace(pos, 5, "desert");
  try {
    ingest_csv(bad_level, ScenarioId::observed());
    FAIL("expected BadCategoryLevel");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::BadCategoryLevel);
    CHECK(std::string(e.what()).find("desert") != std::string::npos);
    CHECK(std::string(e.what()).find("row 2") != std::string::npos);
  }

  std::string dup = kThreeRowCsv;
  const auto pos2 = dup.find("\n2,");
  dup.replace(pos2, 3, "\n1,");
  try {
    ingest_csv(dup, ScenarioId::observed());
    FAIL("expected DuplicateDayId");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::DuplicateDayId);
  }

  std::string nan_row = kThreeRowCsv;
  const auto pos3 = nan_row.find("31.5");
  nan_row.replace(pos3, 4, "nan");
  try {
    ingest_csv(nan_row, ScenarioId::observed());
    FAIL("expected NonFiniteValue");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::NonFiniteValue);
  }
}

TEST_CASE("outcome column is required iff the scenario is factual") {
  std::string no_outcome =
      "day_id,date,temperature,vpd,fm100,fm1000,precip,wind,land_use,aspect,slope,"
      "elevation,veg_frac\n"
      "1,2003-06-01,31.5,2.1,9.0,12.0,0.0,4.2,forest,N,10,800,0.6\n";
  try {
    ingest_csv(no_outcome, ScenarioId::observed());
    FAIL("expected MissingColumn");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::MissingColumn);
  }
  CHECK_NOTHROW(ingest_csv(no_outcome, ScenarioId::pre_industrial()));
  try {
    ingest_csv(kThreeRowCsv, ScenarioId::ssp585_eoc());
    FAIL("expected UnexpectedColumn");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::UnexpectedColumn);
  }
}

TEST_CASE("check_pairing flags a differing constant column by day and name") {
  const GeneratorConfig cfg{.n_days = 40, .delta_c = -1.0};
  auto pair = generate_synthetic(cfg, 5);
  CHECK_NOTHROW(check_pairing(pair.observed, pair.counterfactual));

  pair.counterfactual.records[6].wind_speed += 0.5;  // day_id 7
  try {
    check_pairing(pair.observed, pair.counterfactual);
    FAIL("expected PairingViolation");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::PairingViolation);
    CHECK(std::string(e.what()).find("day 7") != std::string::npos);
    CHECK(std::string(e.what()).find("wind") != std::string::npos);
  }
}

TEST_CASE("temporal folds: 2003-2020 in three-year blocks") {
  const FoldPlan plan = plan_temporal_folds(year_span_dataset(2003, 2020), 3);
  REQUIRE(plan.n_blocks() == 6);
  CHECK(plan.blocks[0].label == "2003-2005");
  CHECK(plan.blocks[1].label == "2006-2008");
  CHECK(plan.blocks[2].label == "2009-2011");
  CHECK(plan.blocks[3].label == "2012-2014");
  CHECK(plan.blocks[4].label == "2015-2017");
  CHECK(plan.blocks[5].label == "2018-2020");

  // partition: disjoint and exhaustive
  std::set<std::int64_t> seen;
  std::size_t total = 0;
  for (const auto& block : plan.blocks) {
    total += block.day_ids.size();
    for (const auto id : block.day_ids) CHECK(seen.insert(id).second);
  }
  CHECK(total == 36);
}

TEST_CASE("temporal folds: insufficient span and remainder block") {
  try {
    plan_temporal_folds(year_span_dataset(2003, 2004), 3);
    FAIL("expected InsufficientSpan");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::InsufficientSpan);
  }

  const FoldPlan plan = plan_temporal_folds(year_span_dataset(2003, 2009), 3);
  REQUIRE(plan.n_blocks() == 3);
  CHECK(plan.blocks[2].label == "2009-2009");
  CHECK(plan.blocks[2].day_ids.size() == 2);
}

TEST_CASE("synthetic generator: delta 0 gives identical truths, RR* 1") {
  const GeneratorConfig cfg{.n_days = 500, .delta_c = 0.0};
  const auto pair = generate_synthetic(cfg, 9);
  REQUIRE(pair.truth.pi0.size() == 500);
  for (std::size_t i = 0; i < pair.truth.pi0.size(); ++i)
    CHECK(pair.truth.pi0[i] == pair.truth.pi1[i]);
  const double rr_star = pair.truth.mean_pi1() / pair.truth.mean_pi0();
  CHECK(rr_star == doctest::Approx(1.0));
  CHECK(1.0 - 1.0 / rr_star == doctest::Approx(0.0));
  CHECK_NOTHROW(check_pairing(pair.observed, pair.counterfactual));
}

TEST_CASE("synthetic generator: warming raises the mean truth") {
  GeneratorConfig cfg{.n_days = 4000};
  cfg.delta_c = 4.0;
  const auto pair = generate_synthetic(cfg, 9);
  CHECK(pair.truth.mean_pi1() > pair.truth.mean_pi0());
  CHECK(pair.counterfactual.scenario_id == ScenarioId::ssp585_eoc());
  for (std::size_t i = 0; i < pair.observed.records.size(); ++i) {
    CHECK(pair.counterfactual.records[i].temperature ==
          doctest::Approx(pair.observed.records[i].temperature + 4.0));
    CHECK(pair.counterfactual.records[i].fuel_moisture_100h <=
          pair.observed.records[i].fuel_moisture_100h);
    CHECK_FALSE(pair.counterfactual.records[i].outcome.has_value());
  }
}

TEST_CASE("synthetic generator: intercept bisection hits the base-rate target") {
  GeneratorConfig cfg{.n_days = 20000};
  cfg.base_rate = 0.021;
  const auto pair = generate_synthetic(cfg, 1);
  CHECK(std::abs(pair.truth.mean_pi0() - 0.021) <= 0.0042);  // target plus/minus 20%
  CHECK(std::abs(pair.truth.mean_pi0() - 0.021) <= 1e-6);    // bisection is much tighter
}

TEST_CASE("synthetic generator: reproducibility and seed scoping") {
  const GeneratorConfig cfg{.n_days = 300, .delta_c = 1.0};
  const auto a = generate_synthetic(cfg, 77);
  const auto b = generate_synthetic(cfg, 77);
  CHECK(write_csv(a.observed) == write_csv(b.observed));
  CHECK(a.truth.pi0 == b.truth.pi0);
  CHECK(a.truth.pi1 == b.truth.pi1);

  // a different seed resamples outcomes but leaves the population alone
  const auto c = generate_synthetic(cfg, 78);
  CHECK(c.truth.pi0 == a.truth.pi0);
  CHECK(c.truth.pi1 == a.truth.pi1);
  bool outcome_changed = false;
  for (std::size_t i = 0; i < a.observed.records.size(); ++i)
    outcome_changed |= a.observed.records[i].outcome != c.observed.records[i].outcome;
  CHECK(outcome_changed);
}

TEST_CASE("synthetic generator: degenerate config") {
  GeneratorConfig cfg{.n_days = 100};
  cfg.delta_c = 2.0;
  cfg.coef_temperature = cfg.coef_vpd = cfg.coef_fm100 = cfg.coef_fm1000 = 0.0;
  cfg.coef_precip = cfg.coef_wind = cfg.coef_slope = cfg.coef_elevation = 0.0;
  cfg.coef_veg_frac = cfg.coef_land_forest = cfg.coef_land_shrub = 0.0;
  cfg.coef_land_savanna = cfg.coef_aspect_n = cfg.coef_aspect_e = 0.0;
  cfg.coef_aspect_s = cfg.coef_aspect_w = cfg.quad_temperature = 0.0;
  try {
    generate_synthetic(cfg, 4);
    FAIL("expected DegenerateConfig");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::DegenerateConfig);
  }
}

TEST_CASE("sample_outcomes: degenerate probabilities and binomial bound") {
  CHECK(sample_outcomes(std::vector<double>(50, 0.0), 3) == std::vector<double>(50, 0.0));
  CHECK(sample_outcomes(std::vector<double>(50, 1.0), 3) == std::vector<double>(50, 1.0));

  const auto draws = sample_outcomes(std::vector<double>(10000, 0.5), 12);
  double mean = 0.0;
  for (const double v : draws) mean += v;
  mean /= 10000.0;
  CHECK(mean >= 0.485);  // 99.7% binomial band around 0.5
  CHECK(mean <= 0.515);

  try {
    sample_outcomes({0.2, 1.5}, 1);
    FAIL("expected ProbabilityOutOfRange");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::ProbabilityOutOfRange);
  }
}

TEST_CASE("sample_outcomes: Monte Carlo consistency over 1000 seeds") {
  rng::Stream gen(404);
  std::vector<double> pi(30);
  for (auto& p : pi) p = 0.05 + 0.9 * gen.uniform01();
  std::vector<double> sum(pi.size(), 0.0);
  const int n_seeds = 1000;
  for (int s = 0; s < n_seeds; ++s) {
    const auto draws = sample_outcomes(pi, static_cast<std::uint64_t>(s));
    for (std::size_t i = 0; i < pi.size(); ++i) sum[i] += draws[i];
  }
  for (std::size_t i = 0; i < pi.size(); ++i) {
    const double mean = sum[i] / n_seeds;
    const double sigma = std::sqrt(pi[i] * (1.0 - pi[i]) / n_seeds);
    CHECK(std::abs(mean - pi[i]) <= 3.0 * sigma);
  }
}

TEST_CASE("truth csv round trip") {
  const GeneratorConfig cfg{.n_days = 60, .delta_c = -0.5};
  const auto pair = generate_synthetic(cfg, 2);
  const auto ids = pair.observed.day_ids();
  const std::string text = write_truth_csv(pair.truth, ids);
  const SyntheticTruth back = read_truth_csv(text, ids);
  CHECK(back.pi0 == pair.truth.pi0);
  CHECK(back.pi1 == pair.truth.pi1);
}
