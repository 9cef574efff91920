#include "eea/multiplicity.hpp"

#include <algorithm>
#include <cmath>

#include "eea/error.hpp"
#include "eea/util.hpp"

namespace eea {

const char* population_name(Population p) {
  return p == Population::ExtremeDays ? "extreme" : "all";
}

std::string PerEventMatrix::to_csv() const {
  std::string out = "day_id,model,rr\n";
  for (std::size_t d = 0; d < n_days(); ++d)
    for (std::size_t m = 0; m < n_models(); ++m) {
      out += std::to_string(day_ids[d]);
      out += ',';
      out += model_labels[m];
      out += ',';
      out += fmt_double(at(d, m));
      out += '\n';
    }
  return out;
}

namespace {

void require_matrix(const PerEventMatrix& matrix) {
  if (matrix.n_models() < 2)
    throw Error(ErrorCode::SingleModel,
                "need at least 2 models, got " + std::to_string(matrix.n_models()));
  if (matrix.n_days() == 0)
    throw Error(ErrorCode::MisalignedPair, "per-event matrix has no days");
  for (const double v : matrix.rr)
    if (!(v > 0.0))
      throw Error(ErrorCode::NonPositiveRR, "risk ratios must be positive");
}

}  // namespace

double sign_conflict_fraction(const PerEventMatrix& matrix) {
  require_matrix(matrix);
  std::size_t conflicts = 0;
  for (std::size_t d = 0; d < matrix.n_days(); ++d) {
    double lo = matrix.at(d, 0), hi = matrix.at(d, 0);
    for (std::size_t m = 1; m < matrix.n_models(); ++m) {
      lo = std::min(lo, matrix.at(d, m));
      hi = std::max(hi, matrix.at(d, m));
    }
    conflicts += lo < 1.0 && hi > 1.0;
  }
  return static_cast<double>(conflicts) / static_cast<double>(matrix.n_days());
}

RangeFactorSummary range_factor_summary(const PerEventMatrix& matrix) {
  require_matrix(matrix);
  std::vector<double> factors(matrix.n_days());
  for (std::size_t d = 0; d < matrix.n_days(); ++d) {
    double lo = matrix.at(d, 0), hi = matrix.at(d, 0);
    for (std::size_t m = 1; m < matrix.n_models(); ++m) {
      lo = std::min(lo, matrix.at(d, m));
      hi = std::max(hi, matrix.at(d, m));
    }
    factors[d] = hi / lo;
  }
  // the paper reports a 90% uncertainty interval; we read that as the
  // 5th/95th percentiles across days
  RangeFactorSummary summary;
  summary.median = median(factors);
  summary.p5 = percentile(factors, 0.05);
  summary.p95 = percentile(std::move(factors), 0.95);
  return summary;
}

MultiplicityReport build_multiplicity_report(
    const PerEventMatrix& matrix, const std::map<std::string, double>& aggregate_rr,
    Population population, std::size_t floored_days) {
  MultiplicityReport report;
  report.sign_conflict_fraction = sign_conflict_fraction(matrix);
  report.range_factor = range_factor_summary(matrix);
  report.aggregate_rr = aggregate_rr;
  report.population = population;
  report.n_days = matrix.n_days();
  report.floored_days = floored_days;
  if (aggregate_rr.empty())
    throw Error(ErrorCode::SingleModel, "aggregate RR map is empty");
  double lo = aggregate_rr.begin()->second, hi = lo;
  for (const auto& [label, rr] : aggregate_rr) {
    if (!(rr > 0.0))
      throw Error(ErrorCode::NonPositiveRR, "aggregate RR for " + label + " is not positive");
    lo = std::min(lo, rr);
    hi = std::max(hi, rr);
  }
  report.aggregate_range_factor = hi / lo;
  report.aggregate_sign_conflict = lo < 1.0 && hi > 1.0;
  report.aggregate_more_robust = report.aggregate_range_factor < report.range_factor.median;
  return report;
}

std::string MultiplicityReport::to_json() const {
  std::string out = "{";
  out += "\"population\":\"" + std::string(population_name(population)) + "\",";
  out += "\"n_days\":" + std::to_string(n_days) + ",";
  out += "\"sign_conflict_fraction\":" + fmt_double(sign_conflict_fraction) + ",";
  out += "\"median_range_factor\":" + fmt_double(range_factor.median) + ",";
  out += "\"range_factor_p5\":" + fmt_double(range_factor.p5) + ",";
  out += "\"range_factor_p95\":" + fmt_double(range_factor.p95) + ",";
  out += "\"aggregate_rr\":{";
  bool first = true;
  for (const auto& [label, rr] : aggregate_rr) {
    if (!first) out += ',';
    first = false;
    out += "\"" + label + "\":" + fmt_double(rr);
  }
  out += "},";
  out += "\"aggregate_range_factor\":" + fmt_double(aggregate_range_factor) + ",";
  out += std::string("\"aggregate_sign_conflict\":") +
         (aggregate_sign_conflict ? "true" : "false") + ",";
  out += std::string("\"aggregate_more_robust\":") +
         (aggregate_more_robust ? "true" : "false") + ",";
  out += "\"floored_days\":" + std::to_string(floored_days);
  out += "}";
  return out;
}

}  // namespace eea
