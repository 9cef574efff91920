#pragma once

#include <cstdint>
#include <string>
#include <unordered_map>
#include <vector>

#include "eea/data.hpp"

namespace eea {

struct FoldBlock {
  std::string label;  // e.g. "2003-2005"
  int year_start = 0;
  int year_end = 0;
  std::vector<std::int64_t> day_ids;
};

struct FoldPlan {
  std::vector<FoldBlock> blocks;

  std::size_t n_blocks() const { return blocks.size(); }
  // day_id -> block index; every day of the planned dataset is present.
  std::unordered_map<std::int64_t, int> block_of_day() const;
};

// Partitions days into consecutive calendar-year blocks of block_years years;
// a shorter final block absorbs remainder years rather than dropping data.
FoldPlan plan_temporal_folds(const ScenarioDataset& dataset, int block_years);

}  // namespace eea
