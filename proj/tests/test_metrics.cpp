#include <algorithm>
#include <cmath>
#include <vector>

#include "doctest.h"
#include "eea/error.hpp"
#include "eea/metrics.hpp"
#include "eea/rng.hpp"
#include "oracles.hpp"

using namespace eea;

TEST_CASE("auc matches the probabilistic definition") {
  // perfectly separated
  CHECK(auc(std::vector<double>{0.1, 0.2, 0.8, 0.9}, std::vector<double>{0, 0, 1, 1}) ==
        1.0);
  // all ties
  CHECK(auc(std::vector<double>{0.3, 0.3, 0.3, 0.3}, std::vector<double>{0, 1, 0, 1}) ==
        0.5);
  // 3 of 4 pos-neg pairs concordant
  CHECK(auc(std::vector<double>{0.1, 0.4, 0.35, 0.8}, std::vector<double>{0, 0, 1, 1}) ==
        doctest::Approx(0.75));

  try {
    auc(std::vector<double>{0.1, 0.2}, std::vector<double>{1, 1});
    FAIL("expected SingleClass");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::SingleClass);
  }
}

TEST_CASE("auc equals brute-force pair enumeration on random small instances") {
  rng::Stream gen(2024);
  for (int trial = 0; trial < 300; ++trial) {
    const std::size_t n = 2 + gen.uniform_below(11);
    std::vector<double> probs(n), y(n);
    for (std::size_t i = 0; i < n; ++i) {
      // coarse grid of scores provokes plenty of ties
      probs[i] = static_cast<double>(gen.uniform_below(5)) / 4.0;
      y[i] = gen.bernoulli(0.4) ? 1.0 : 0.0;
    }
    y[0] = 0.0;
    y[n - 1] = 1.0;
    CHECK(auc(probs, y) == oracles::auc_brute_force(probs, y));
  }
}

TEST_CASE("brier score") {
  CHECK(brier(std::vector<double>{0, 1, 1}, std::vector<double>{0, 1, 1}) == 0.0);
  CHECK(brier(std::vector<double>{0.5, 0.5}, std::vector<double>{0, 1}) == 0.25);
  CHECK(brier(std::vector<double>{0.2, 0.9}, std::vector<double>{0, 1}) ==
        doctest::Approx(0.025).epsilon(1e-12));
}

TEST_CASE("brier skill score against the mean-prediction reference") {
  // constant predictions are their own reference
  CHECK(brier_skill(std::vector<double>{0.4, 0.4, 0.4}, std::vector<double>{0, 1, 0}) ==
        doctest::Approx(0.0).epsilon(1e-12));
  // a perfect model on mixed outcomes
  CHECK(brier_skill(std::vector<double>{0, 1, 0, 1}, std::vector<double>{0, 1, 0, 1}) ==
        doctest::Approx(1.0));
  // hand arithmetic: mean p = 0.55, BS_ref = 0.2525, BSS = 1 - 0.025/0.2525
  CHECK(brier_skill(std::vector<double>{0.2, 0.9}, std::vector<double>{0, 1}) ==
        doctest::Approx(1.0 - 0.025 / 0.2525).epsilon(1e-12));
  CHECK(brier_skill(std::vector<double>{0.2, 0.9}, std::vector<double>{0, 1}) ==
        doctest::Approx(0.9010).epsilon(1e-4));

  try {
    // outcomes constant and equal to the reference prediction
    brier_skill(std::vector<double>{1.0, 1.0}, std::vector<double>{1, 1});
    FAIL("expected DegenerateReference");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::DegenerateReference);
  }
}

TEST_CASE("mean calibration error") {
  CHECK(mean_calibration_error(std::vector<double>{0.25, 0.25, 0.25, 0.25},
                               std::vector<double>{0, 0, 1, 0}) ==
        doctest::Approx(0.0).epsilon(1e-12));
  // constant 0.03 vs the fire-day prevalence 380/17910
  const double prevalence = 380.0 / 17910.0;
  std::vector<double> probs(17910, 0.03), y(17910, 0.0);
  for (int i = 0; i < 380; ++i) y[static_cast<std::size_t>(i)] = 1.0;
  CHECK(mean_calibration_error(probs, y) ==
        doctest::Approx(std::abs(0.03 - prevalence)).epsilon(1e-12));
  CHECK(mean_calibration_error(probs, y) == doctest::Approx(0.00878).epsilon(1e-3));

  // permutation invariance
  std::vector<double> p2 = {0.1, 0.7, 0.3, 0.9};
  std::vector<double> y2 = {0, 1, 1, 0};
  const double before = mean_calibration_error(p2, y2);
  std::reverse(p2.begin(), p2.end());
  std::reverse(y2.begin(), y2.end());
  CHECK(mean_calibration_error(p2, y2) == before);
}

TEST_CASE("metric invariants: monotone transform, complement, symmetry") {
  rng::Stream gen(55);
  std::vector<double> probs(40), y(40);
  for (std::size_t i = 0; i < probs.size(); ++i) {
    probs[i] = gen.uniform01();
    y[i] = gen.bernoulli(0.3) ? 1.0 : 0.0;
  }
  y[0] = 0.0;
  y[1] = 1.0;

  // AUC invariant under strictly increasing transforms of the scores
  std::vector<double> squashed(probs.size());
  for (std::size_t i = 0; i < probs.size(); ++i)
    squashed[i] = 1.0 / (1.0 + std::exp(-5.0 * probs[i]));
  CHECK(auc(squashed, y) == auc(probs, y));

  // MCE under probability/label complement
  std::vector<double> probs_c(probs.size()), y_c(y.size());
  for (std::size_t i = 0; i < probs.size(); ++i) {
    probs_c[i] = 1.0 - probs[i];
    y_c[i] = 1.0 - y[i];
  }
  CHECK(mean_calibration_error(probs_c, y_c) ==
        doctest::Approx(mean_calibration_error(probs, y)).epsilon(1e-12));

  // BS_model equals BS_ref exactly for constant predictions
  const std::vector<double> constant(40, 0.37);
  CHECK(brier_skill(constant, y) == doctest::Approx(0.0).epsilon(1e-12));

  // log RR error is symmetric in its arguments
  CHECK(log_rr_error(0.021, 0.034) == doctest::Approx(log_rr_error(0.034, 0.021)));
}

TEST_CASE("log risk ratio error") {
  CHECK(log_rr_error(0.02, 0.02) == 0.0);
  CHECK(log_rr_error(0.01, 0.02) == doctest::Approx(std::log(2.0)));
  CHECK(log_rr_error(0.0212, 0.0250) == doctest::Approx(0.1649).epsilon(1e-3));
  try {
    log_rr_error(0.0, 0.01);
    FAIL("expected NonPositiveMean");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::NonPositiveMean);
  }
}

TEST_CASE("weighted metrics collapse to unweighted for unit weights") {
  rng::Stream gen(77);
  std::vector<double> probs(60), y(60), ones(60, 1.0);
  for (std::size_t i = 0; i < probs.size(); ++i) {
    probs[i] = gen.uniform01();
    y[i] = gen.bernoulli(0.4) ? 1.0 : 0.0;
  }
  y[0] = 0.0;
  y[1] = 1.0;
  const MetricsReport plain = metrics_report(probs, y);
  const MetricsReport weighted = weighted_metrics(probs, y, ones);
  CHECK(weighted.auc == doctest::Approx(plain.auc).epsilon(1e-12));
  CHECK(weighted.brier == doctest::Approx(plain.brier).epsilon(1e-12));
  CHECK(weighted.brier_skill == doctest::Approx(plain.brier_skill).epsilon(1e-12));
  CHECK(weighted.mean_calibration_error ==
        doctest::Approx(plain.mean_calibration_error).epsilon(1e-12));
  CHECK(weighted.weights_used);
  CHECK_FALSE(plain.weights_used);
}

TEST_CASE("weighted metrics: zero weight drops a row, closed forms hold") {
  // zero weight on the last row equals dropping it
  const std::vector<double> probs = {0.2, 0.7, 0.9};
  const std::vector<double> y = {0, 1, 0};
  const std::vector<double> w = {1, 1, 0};
  const std::vector<double> probs2 = {0.2, 0.7};
  const std::vector<double> y2 = {0, 1};
  CHECK(weighted_brier(probs, y, w) == doctest::Approx(brier(probs2, y2)).epsilon(1e-12));
  CHECK(weighted_mean_calibration_error(probs, y, w) ==
        doctest::Approx(mean_calibration_error(probs2, y2)).epsilon(1e-12));
  CHECK(weighted_auc(probs, y, w) == doctest::Approx(auc(probs2, y2)).epsilon(1e-12));

  // two-row closed form with weights {2,1}
  const std::vector<double> pw = {0.6, 0.1};
  const std::vector<double> yw = {1, 0};
  const std::vector<double> w21 = {2, 1};
  CHECK(weighted_mean_calibration_error(pw, yw, w21) ==
        doctest::Approx(std::abs((2 * 0.6 + 0.1) / 3.0 - 2.0 / 3.0)).epsilon(1e-12));

  try {
    weighted_metrics(probs, y, std::vector<double>{0, 0, 0});
    FAIL("expected AllZeroWeights");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::AllZeroWeights);
  }
}

TEST_CASE("weighted auc equals weighted brute force") {
  rng::Stream gen(99);
  for (int trial = 0; trial < 100; ++trial) {
    const std::size_t n = 3 + gen.uniform_below(9);
    std::vector<double> probs(n), y(n), w(n);
    for (std::size_t i = 0; i < n; ++i) {
      probs[i] = static_cast<double>(gen.uniform_below(4)) / 3.0;
      y[i] = gen.bernoulli(0.5) ? 1.0 : 0.0;
      w[i] = 0.25 + gen.uniform01();
    }
    y[0] = 0.0;
    y[n - 1] = 1.0;
    CHECK(weighted_auc(probs, y, w) ==
          doctest::Approx(oracles::weighted_auc_brute_force(probs, y, w)).epsilon(1e-12));
  }
}

TEST_CASE("metrics report serialization is flat and fixed-order") {
  const MetricsReport report =
      metrics_report(std::vector<double>{0.2, 0.9}, std::vector<double>{0, 1});
  CHECK(MetricsReport::csv_header() ==
        "auc,brier,brier_skill,mean_calibration_error,n,weights_used");
  CHECK(report.to_csv_row().find("0.025") != std::string::npos);
  CHECK(report.to_json().find("\"auc\":1") != std::string::npos);
}
