#include <cstdio>
#include <exception>
#include <string>
#include <thread>

#include "CLI11.hpp"
#include "eea/commands.hpp"
#include "eea/error.hpp"

namespace {

struct CliOptions {
  std::string config_path;
  std::string out_dir = ".";
  unsigned workers = 0;
  std::string seed;
  std::string population;
  std::string comparison;
};

eea::CommandContext make_context(const CliOptions& opts) {
  eea::CommandContext ctx;
  if (!opts.config_path.empty())
    ctx.config = eea::RunConfig::parse_file(opts.config_path);
  if (!opts.seed.empty()) ctx.config.set("seed", opts.seed);
  if (!opts.population.empty()) ctx.config.set("population", opts.population);
  if (!opts.comparison.empty()) ctx.config.set("comparison", opts.comparison);
  ctx.out_dir = opts.out_dir;
  ctx.workers = opts.workers > 0 ? opts.workers : std::thread::hardware_concurrency();
  if (ctx.workers == 0) ctx.workers = 1;
  return ctx;
}

void add_common(CLI::App* cmd, CliOptions& opts) {
  cmd->add_option("--config", opts.config_path, "run configuration file (key = value lines)");
  cmd->add_option("--out", opts.out_dir, "output directory");
  cmd->add_option("--seed", opts.seed, "master seed (overrides the config)");
  cmd->add_option("--workers", opts.workers, "worker threads (default: hardware)");
  cmd->add_option("--population", opts.population, "extreme | all")
      ->check(CLI::IsMember({"extreme", "all"}));
  cmd->add_option("--comparison", opts.comparison, "preindustrial | ssp585")
      ->check(CLI::IsMember({"preindustrial", "ssp585"}));
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"extreme-event attribution pipeline"};
  app.require_subcommand(1);
  CliOptions opts;

  CLI::App* generate = app.add_subcommand(
      "generate", "synthesize a paired scenario dataset with known truth");
  CLI::App* attribute = app.add_subcommand(
      "attribute", "estimate RR/FAR/ATE with bootstrap intervals, all models x estimators");
  CLI::App* simulate = app.add_subcommand(
      "simulate", "truth-known replicate harness: metric vs FAR-error audit");
  CLI::App* shift = app.add_subcommand(
      "shift", "distribution-shift diagnostics: propensity, proxy-A, subgroups, PCA");
  CLI::App* multiplicity = app.add_subcommand(
      "multiplicity", "cross-model disagreement: sign conflicts and range factors");
  CLI::App* report = app.add_subcommand(
      "report", "attribute + shift + multiplicity combined into one report");
  for (CLI::App* cmd : {generate, attribute, simulate, shift, multiplicity, report})
    add_common(cmd, opts);

  CLI11_PARSE(app, argc, argv);

  try {
    const eea::CommandContext ctx = make_context(opts);
    if (generate->parsed()) eea::cmd_generate(ctx);
    else if (attribute->parsed()) eea::cmd_attribute(ctx);
    else if (simulate->parsed()) eea::cmd_simulate(ctx);
    else if (shift->parsed()) eea::cmd_shift(ctx);
    else if (multiplicity->parsed()) eea::cmd_multiplicity(ctx);
    else if (report->parsed()) eea::cmd_report(ctx);
  } catch (const eea::Error& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return 0;
}
