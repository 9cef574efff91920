#pragma once

#include <string>
#include <vector>

#include "eea/attribution.hpp"
#include "eea/config.hpp"
#include "eea/multiplicity.hpp"
#include "eea/shift.hpp"
#include "eea/simlab.hpp"

namespace eea {

struct CommandContext {
  RunConfig config;
  std::string out_dir;
  unsigned workers = 1;
};

// Every command writes its outputs atomically under out_dir together with a
// run_meta.json carrying the config hash and master seed; identical
// config+seed reruns are byte-identical.

void cmd_generate(const CommandContext& ctx);

std::vector<AttributionEstimate> cmd_attribute(const CommandContext& ctx);

struct SimulateOutput {
  std::vector<SimResultRow> rows;
  std::size_t skipped_replicates = 0;
  std::vector<CorrelationReport> correlations;
  std::vector<RegretReport> regrets;
  std::vector<TruthScenario> truths;
};
SimulateOutput cmd_simulate(const CommandContext& ctx);

ShiftReport cmd_shift(const CommandContext& ctx);

MultiplicityReport cmd_multiplicity(const CommandContext& ctx);

void cmd_report(const CommandContext& ctx);

}  // namespace eea
