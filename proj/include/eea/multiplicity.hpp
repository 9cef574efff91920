#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

namespace eea {

enum class Population { ExtremeDays, AllFireDays };
const char* population_name(Population p);

// day-major matrix of per-event risk ratios across models
struct PerEventMatrix {
  std::vector<std::int64_t> day_ids;
  std::vector<std::string> model_labels;
  std::vector<double> rr;  // day_ids.size() x model_labels.size()

  std::size_t n_days() const { return day_ids.size(); }
  std::size_t n_models() const { return model_labels.size(); }
  double at(std::size_t day, std::size_t model) const {
    return rr[day * model_labels.size() + model];
  }

  std::string to_csv() const;  // long format: day_id,model,rr
};

struct RangeFactorSummary {
  double median = 1.0;
  double p5 = 1.0;
  double p95 = 1.0;
};

struct MultiplicityReport {
  double sign_conflict_fraction = 0.0;
  RangeFactorSummary range_factor;
  std::map<std::string, double> aggregate_rr;  // model -> rr
  double aggregate_range_factor = 1.0;
  bool aggregate_more_robust = false;  // aggregate factor < median per-event factor
  bool aggregate_sign_conflict = false;
  Population population = Population::ExtremeDays;
  std::size_t n_days = 0;
  std::size_t floored_days = 0;  // days where a model hit the probability floor

  std::string to_json() const;
};

// Fraction of days whose per-model RRs straddle 1 (log RR changes sign).
double sign_conflict_fraction(const PerEventMatrix& matrix);

// Per-day max/min across models, summarized by median and 5th/95th
// percentiles across days.
RangeFactorSummary range_factor_summary(const PerEventMatrix& matrix);

MultiplicityReport build_multiplicity_report(
    const PerEventMatrix& matrix, const std::map<std::string, double>& aggregate_rr,
    Population population, std::size_t floored_days);

}  // namespace eea
