#include "eea/folds.hpp"

#include <algorithm>
#include <limits>

#include "eea/error.hpp"

namespace eea {

std::unordered_map<std::int64_t, int> FoldPlan::block_of_day() const {
  std::unordered_map<std::int64_t, int> map;
  for (std::size_t b = 0; b < blocks.size(); ++b)
    for (const auto id : blocks[b].day_ids)
      map.emplace(id, static_cast<int>(b));
  return map;
}

FoldPlan plan_temporal_folds(const ScenarioDataset& dataset, int block_years) {
  if (block_years < 1)
    throw Error(ErrorCode::InsufficientSpan, "block_years must be >= 1");
  if (dataset.records.empty())
    throw Error(ErrorCode::InsufficientSpan, "dataset is empty");

  int year_min = std::numeric_limits<int>::max();
  int year_max = std::numeric_limits<int>::min();
  for (const auto& r : dataset.records) {
    year_min = std::min(year_min, r.date.year);
    year_max = std::max(year_max, r.date.year);
  }
  const int span = year_max - year_min + 1;
  if (span < 2 * block_years)
    throw Error(ErrorCode::InsufficientSpan,
                "dataset spans " + std::to_string(span) +
                    " calendar years; need at least " +
                    std::to_string(2 * block_years) + " for " +
                    std::to_string(block_years) + "-year blocks");

  FoldPlan plan;
  for (int start = year_min; start <= year_max; start += block_years) {
    FoldBlock block;
    block.year_start = start;
    block.year_end = std::min(start + block_years - 1, year_max);
    block.label = std::to_string(block.year_start) + "-" + std::to_string(block.year_end);
    plan.blocks.push_back(std::move(block));
  }
  for (const auto& r : dataset.records) {
    const int idx = (r.date.year - year_min) / block_years;
    plan.blocks[static_cast<std::size_t>(idx)].day_ids.push_back(r.day_id);
  }
  return plan;
}

}  // namespace eea
