#include "eea/commands.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <memory>
#include <mutex>
#include <set>

#include "eea/error.hpp"
#include "eea/folds.hpp"
#include "eea/rng.hpp"
#include "eea/synthetic.hpp"
#include "eea/util.hpp"
#include "json.hpp"

namespace eea {

namespace {

using nlohmann::json;

const std::set<std::string> kGenerateKeys = {
    "seed", "n_days", "year_start", "n_years", "base_rate", "delta_c",
    "population_seed", "temperature_mean", "temperature_sd", "vpd_slope",
    "vpd_noise_sd", "fm100_slope", "fm100_noise_sd", "fm1000_slope",
    "fm1000_noise_sd", "coupling_vpd", "coupling_fm100", "coupling_fm1000",
    "coef_temperature", "coef_vpd", "coef_fm100", "coef_fm1000", "coef_precip",
    "coef_wind", "coef_slope", "coef_elevation", "coef_veg_frac",
    "coef_land_forest", "coef_land_shrub", "coef_land_savanna", "coef_aspect_n",
    "coef_aspect_e", "coef_aspect_s", "coef_aspect_w", "quad_temperature",
    "counterfactual_scenario"};

const std::set<std::string> kAttributeKeys = {
    "seed", "factual", "counterfactual", "comparison", "counterfactual_scenario",
    "block_years", "models", "tune", "tune_criterion", "bootstrap_b", "ci_level",
    "propensity_model", "clip_lo", "clip_hi", "hyper."};

const std::set<std::string> kSimulateKeys = {
    "seed", "factual", "counterfactual", "comparison", "counterfactual_scenario",
    "block_years", "models", "truth_source", "truth_file", "replicates",
    "regret_samples", "regret_sample_size", "hyper."};

const std::set<std::string> kShiftKeys = {
    "seed", "factual", "counterfactual", "comparison", "counterfactual_scenario",
    "block_years", "propensity_model", "subgroup_model", "subgroup_bins",
    "clip_lo", "clip_hi", "hyper."};

const std::set<std::string> kMultiplicityKeys = {
    "seed", "factual", "counterfactual", "comparison", "counterfactual_scenario",
    "block_years", "models", "population", "hyper."};

std::set<std::string> union_keys(std::initializer_list<const std::set<std::string>*> sets) {
  std::set<std::string> out;
  for (const auto* s : sets) out.insert(s->begin(), s->end());
  return out;
}

std::string out_path(const CommandContext& ctx, const std::string& name) {
  return (std::filesystem::path(ctx.out_dir) / name).string();
}

void write_run_meta(const CommandContext& ctx, const std::string& command,
                    const std::vector<std::string>& outputs) {
  json meta;
  meta["command"] = command;
  meta["config_hash"] = ctx.config.hash();
  meta["master_seed"] = ctx.config.get_u64("seed", 0);
  meta["outputs"] = outputs;
  json echo = json::object();
  for (const auto& [k, v] : ctx.config.entries()) echo[k] = v;
  meta["config"] = echo;
  atomic_write_file(out_path(ctx, command + "_meta.json"), meta.dump(2) + "\n");
  // exit contract: every requested output must exist and be nonempty
  for (const auto& name : outputs) {
    std::error_code ec;
    const auto size = std::filesystem::file_size(out_path(ctx, name), ec);
    if (ec || size == 0)
      throw Error(ErrorCode::IoFailure, "output '" + name + "' was not produced");
  }
}

GeneratorConfig generator_from_config(const RunConfig& cfg) {
  GeneratorConfig g;
  g.n_days = cfg.get_int("n_days", g.n_days);
  g.year_start = static_cast<int>(cfg.get_int("year_start", g.year_start));
  g.n_years = static_cast<int>(cfg.get_int("n_years", g.n_years));
  g.base_rate = cfg.get_double("base_rate", g.base_rate);
  g.delta_c = cfg.get_double("delta_c", g.delta_c);
  g.population_seed = cfg.get_u64("population_seed", g.population_seed);
  g.temperature_mean = cfg.get_double("temperature_mean", g.temperature_mean);
  g.temperature_sd = cfg.get_double("temperature_sd", g.temperature_sd);
  g.vpd_slope = cfg.get_double("vpd_slope", g.vpd_slope);
  g.vpd_noise_sd = cfg.get_double("vpd_noise_sd", g.vpd_noise_sd);
  g.fm100_slope = cfg.get_double("fm100_slope", g.fm100_slope);
  g.fm100_noise_sd = cfg.get_double("fm100_noise_sd", g.fm100_noise_sd);
  g.fm1000_slope = cfg.get_double("fm1000_slope", g.fm1000_slope);
  g.fm1000_noise_sd = cfg.get_double("fm1000_noise_sd", g.fm1000_noise_sd);
  g.coupling_vpd = cfg.get_double("coupling_vpd", g.coupling_vpd);
  g.coupling_fm100 = cfg.get_double("coupling_fm100", g.coupling_fm100);
  g.coupling_fm1000 = cfg.get_double("coupling_fm1000", g.coupling_fm1000);
  g.coef_temperature = cfg.get_double("coef_temperature", g.coef_temperature);
  g.coef_vpd = cfg.get_double("coef_vpd", g.coef_vpd);
  g.coef_fm100 = cfg.get_double("coef_fm100", g.coef_fm100);
  g.coef_fm1000 = cfg.get_double("coef_fm1000", g.coef_fm1000);
  g.coef_precip = cfg.get_double("coef_precip", g.coef_precip);
  g.coef_wind = cfg.get_double("coef_wind", g.coef_wind);
  g.coef_slope = cfg.get_double("coef_slope", g.coef_slope);
  g.coef_elevation = cfg.get_double("coef_elevation", g.coef_elevation);
  g.coef_veg_frac = cfg.get_double("coef_veg_frac", g.coef_veg_frac);
  g.coef_land_forest = cfg.get_double("coef_land_forest", g.coef_land_forest);
  g.coef_land_shrub = cfg.get_double("coef_land_shrub", g.coef_land_shrub);
  g.coef_land_savanna = cfg.get_double("coef_land_savanna", g.coef_land_savanna);
  g.coef_aspect_n = cfg.get_double("coef_aspect_n", g.coef_aspect_n);
  g.coef_aspect_e = cfg.get_double("coef_aspect_e", g.coef_aspect_e);
  g.coef_aspect_s = cfg.get_double("coef_aspect_s", g.coef_aspect_s);
  g.coef_aspect_w = cfg.get_double("coef_aspect_w", g.coef_aspect_w);
  g.quad_temperature = cfg.get_double("quad_temperature", g.quad_temperature);
  g.counterfactual_label = cfg.get_string("counterfactual_scenario", "");
  return g;
}

struct LoadedPair {
  ScenarioDataset factual;
  ScenarioDataset counterfactual;
  ComparisonSpec comparison;
};

LoadedPair load_pair(const RunConfig& cfg) {
  LoadedPair pair;
  pair.factual = ingest_csv_file(cfg.require_string("factual"), ScenarioId::observed());

  const std::string comparison = cfg.get_string("comparison", "");
  std::string cf_scenario = cfg.get_string("counterfactual_scenario", "");
  if (cf_scenario.empty()) {
    if (comparison == "preindustrial") cf_scenario = "PreIndustrial";
    else if (comparison == "ssp585") cf_scenario = "SSP585_EOC";
    else
      throw Error(ErrorCode::ConfigParse,
                  "set comparison=preindustrial|ssp585 or counterfactual_scenario");
  }
  pair.counterfactual =
      ingest_csv_file(cfg.require_string("counterfactual"), ScenarioId::parse(cf_scenario));
  check_pairing(pair.factual, pair.counterfactual);

  if (comparison == "preindustrial") pair.comparison = ComparisonSpec::preindustrial();
  else if (comparison == "ssp585") pair.comparison = ComparisonSpec::ssp585();
  else if (comparison.empty())
    pair.comparison = ComparisonSpec::for_scenario(pair.counterfactual.scenario_id);
  else
    throw Error(ErrorCode::ConfigParse, "comparison must be preindustrial or ssp585");
  return pair;
}

std::vector<ModelSpec> specs_from_config(const RunConfig& cfg, std::uint64_t master) {
  std::vector<std::string> names = cfg.get_list(
      "models", {"logistic", "elastic_net", "random_forest", "gbt_levelwise", "gbt_hist"});
  std::vector<ModelSpec> specs;
  for (const auto& name : names) {
    const Algorithm a = parse_algorithm(name);
    ModelSpec spec = default_spec(a, rng::derive(master, "model_seed/" + name));
    const std::string prefix = "hyper." + name + ".";
    for (const auto& [key, value] : cfg.entries()) {
      if (key.rfind(prefix, 0) != 0) continue;
      spec.hyperparameters[key.substr(prefix.size())] = cfg.get_double(key, 0.0);
    }
    validate_hyperparameters(spec);
    specs.push_back(std::move(spec));
  }
  return specs;
}

MetricId parse_metric(const std::string& name) {
  for (const MetricId id : {MetricId::Auc, MetricId::Brier, MetricId::BrierSkill,
                            MetricId::Mce, MetricId::LogLoss})
    if (name == metric_name(id)) return id;
  throw Error(ErrorCode::ConfigParse, "unknown metric '" + name + "'");
}

json truth_to_json(const TruthScenario& t) {
  json out;
  out["label"] = t.label;
  out["mu0"] = t.mu0;
  out["mu1"] = t.mu1;
  out["rr_star"] = t.rr_star;
  out["far_star"] = t.far_star;
  out["ate_star"] = t.ate_star;
  out["comparison"] = t.comparison.label;
  return out;
}

}  // namespace

// ---------------------------------------------------------------------------

void cmd_generate(const CommandContext& ctx) {
  ctx.config.validate_keys(kGenerateKeys);
  const GeneratorConfig gen = generator_from_config(ctx.config);
  const std::uint64_t seed = ctx.config.get_u64("seed", 0);
  const SyntheticPair pair = generate_synthetic(gen, seed);

  atomic_write_file(out_path(ctx, "factual.csv"), write_csv(pair.observed));
  atomic_write_file(out_path(ctx, "counterfactual.csv"), write_csv(pair.counterfactual));
  atomic_write_file(out_path(ctx, "truth.csv"),
                    write_truth_csv(pair.truth, pair.observed.day_ids()));

  json meta;
  meta["counterfactual_scenario"] = pair.counterfactual.scenario_id.to_string();
  meta["n_days"] = pair.observed.size();
  meta["delta_c"] = gen.delta_c;
  meta["base_rate_target"] = gen.base_rate;
  meta["mean_pi0"] = pair.truth.mean_pi0();
  meta["mean_pi1"] = pair.truth.mean_pi1();
  meta["intercept"] = pair.truth.intercept;
  meta["prevalence"] = pair.observed.prevalence();
  meta["config_hash"] = ctx.config.hash();
  meta["master_seed"] = seed;
  atomic_write_file(out_path(ctx, "generate_summary.json"), meta.dump(2) + "\n");

  write_run_meta(ctx, "generate",
                 {"factual.csv", "counterfactual.csv", "truth.csv",
                  "generate_summary.json"});
}

// ---------------------------------------------------------------------------

std::vector<AttributionEstimate> cmd_attribute(const CommandContext& ctx) {
  ctx.config.validate_keys(kAttributeKeys);
  const std::uint64_t master = ctx.config.get_u64("seed", 0);
  const LoadedPair pair = load_pair(ctx.config);
  const int block_years = static_cast<int>(ctx.config.get_int("block_years", 3));
  const FoldPlan folds = plan_temporal_folds(pair.factual, block_years);
  const int B = static_cast<int>(ctx.config.get_int("bootstrap_b", 1000));
  const double level = ctx.config.get_double("ci_level", 0.95);
  std::vector<ModelSpec> specs = specs_from_config(ctx.config, master);

  if (ctx.config.get_bool("tune", false)) {
    const MetricId criterion =
        parse_metric(ctx.config.get_string("tune_criterion", "auc"));
    for (auto& spec : specs) {
      auto grid = default_grid(spec.algorithm, spec.seed);
      spec = tune_cv(grid, pair.factual, folds, criterion);
    }
  }

  // shared propensity weights for the PPIWeighted estimator
  ModelSpec prop_spec = default_spec(
      parse_algorithm(ctx.config.get_string("propensity_model", "gbt_hist")),
      rng::derive(master, "attribute/propensity"));
  const PropensityScores prop =
      fit_propensity(pair.factual, pair.counterfactual, folds, prop_spec);
  const ImportanceWeights weights =
      importance_weights(prop.factual, ctx.config.get_double("clip_lo", 0.01),
                         ctx.config.get_double("clip_hi", 0.99));

  const std::vector<double> y = pair.factual.outcomes();
  std::vector<std::vector<AttributionEstimate>> per_model(specs.size());
  parallel_for(specs.size(), ctx.workers, [&](std::size_t m) {
    const CrossFitResult fitres =
        cross_fit(specs[m], pair.factual, folds, {&pair.counterfactual});
    PairedRows rows;
    rows.y_factual = y;
    rows.p_counterfactual = fitres.counterfactual.at(0).probs;
    rows.p_factual_oos = fitres.factual_oos.probs;
    rows.weights = weights.weights;
    const Estimator estimators[] = {Estimator::MeanPrediction, Estimator::PPI,
                                    Estimator::PPIWeighted};
    for (std::size_t e = 0; e < 3; ++e) {
      AttributionEstimate est = attribution_with_bootstrap(
          rows, estimators[e], pair.comparison, specs[m].label(), B, level,
          rng::derive(master, "attribute/bootstrap", m, e));
      per_model[m].push_back(std::move(est));
    }
  });

  std::vector<AttributionEstimate> estimates;
  for (auto& v : per_model)
    for (auto& est : v) estimates.push_back(std::move(est));

  std::string csv = AttributionEstimate::csv_header() + "\n";
  std::string json_rows = "[";
  for (std::size_t i = 0; i < estimates.size(); ++i) {
    csv += estimates[i].to_csv_row() + "\n";
    if (i) json_rows += ",";
    json_rows += "\n  " + estimates[i].to_json();
  }
  json_rows += "\n]\n";
  atomic_write_file(out_path(ctx, "attribution.csv"), csv);
  atomic_write_file(out_path(ctx, "attribution.json"), json_rows);
  write_run_meta(ctx, "attribute", {"attribution.csv", "attribution.json"});
  return estimates;
}

// ---------------------------------------------------------------------------

SimulateOutput cmd_simulate(const CommandContext& ctx) {
  ctx.config.validate_keys(kSimulateKeys);
  const std::uint64_t master = ctx.config.get_u64("seed", 0);
  const LoadedPair pair = load_pair(ctx.config);
  const int block_years = static_cast<int>(ctx.config.get_int("block_years", 3));
  const FoldPlan folds = plan_temporal_folds(pair.factual, block_years);
  const int R = static_cast<int>(ctx.config.get_int("replicates", 300));
  const std::vector<ModelSpec> specs = specs_from_config(ctx.config, master);

  SimulateOutput out;
  const std::string truth_source = ctx.config.get_string("truth_source", "zoo");
  if (truth_source == "zoo") {
    // one truth per zoo model, from its own fit to the real data
    for (const auto& spec : specs) {
      const CrossFitResult fitres =
          cross_fit(spec, pair.factual, folds, {&pair.counterfactual});
      out.truths.push_back(build_truth(fitres.factual_oos, fitres.counterfactual.at(0),
                                       spec.label(), pair.comparison));
    }
  } else if (truth_source == "file") {
    const SyntheticTruth truth = read_truth_csv(
        read_file(ctx.config.require_string("truth_file")), pair.factual.day_ids());
    out.truths.push_back(build_truth_from_generator(truth, "generator", pair.comparison));
  } else {
    throw Error(ErrorCode::ConfigParse, "truth_source must be zoo or file");
  }

  // resume: keep complete rows from an earlier run, recompute the rest
  const std::string results_path = out_path(ctx, "sim_results.csv");
  std::set<std::string> done;
  std::string kept_rows;
  if (std::filesystem::exists(results_path)) {
    const std::string existing = read_file(results_path);
    std::size_t pos = existing.find('\n');  // skip header
    while (pos != std::string::npos && pos + 1 < existing.size()) {
      const std::size_t end = existing.find('\n', pos + 1);
      if (end == std::string::npos) break;  // drop a truncated trailing line
      const std::string line = existing.substr(pos + 1, end - pos - 1);
      pos = end;
      try {
        const SimResultRow row = SimResultRow::from_csv_row(line);
        done.insert(row.truth_label + "/" + row.model_label + "/" +
                    std::to_string(row.replicate));
        kept_rows += line + "\n";
        out.rows.push_back(row);
      } catch (const Error&) {
        break;
      }
    }
  }
  atomic_write_file(results_path, SimResultRow::csv_header() + "\n" + kept_rows);

  std::ofstream results(results_path, std::ios::app);
  if (!results) throw Error(ErrorCode::IoFailure, "cannot append to " + results_path);

  std::vector<std::string> skipped_keys;
  for (int r = 0; r < R; ++r) {
    const std::size_t tasks = out.truths.size() * specs.size();
    std::vector<std::optional<SimResultRow>> slot(tasks);
    std::vector<bool> wanted(tasks, false);
    for (std::size_t t = 0; t < out.truths.size(); ++t)
      for (std::size_t m = 0; m < specs.size(); ++m) {
        const std::string key = out.truths[t].label + "/" + specs[m].label() + "/" +
                                std::to_string(r);
        wanted[t * specs.size() + m] = !done.count(key);
      }
    parallel_for(tasks, ctx.workers, [&](std::size_t i) {
      if (!wanted[i]) return;
      const std::size_t t = i / specs.size();
      const std::size_t m = i % specs.size();
      slot[i] = run_replicate(out.truths[t], pair.factual, pair.counterfactual,
                              specs[m], folds, r, master);
    });
    for (std::size_t t = 0; t < out.truths.size(); ++t)
      for (std::size_t m = 0; m < specs.size(); ++m) {
        const std::size_t i = t * specs.size() + m;
        if (!wanted[i]) continue;
        if (slot[i].has_value()) {
          results << slot[i]->to_csv_row() << "\n";
          out.rows.push_back(std::move(*slot[i]));
        } else {
          skipped_keys.push_back(out.truths[t].label + "/" + specs[m].label() + "/" +
                                 std::to_string(r));
          ++out.skipped_replicates;
        }
      }
    results.flush();
  }
  results.close();

  // canonical row order for downstream consumers
  std::sort(out.rows.begin(), out.rows.end(),
            [](const SimResultRow& a, const SimResultRow& b) {
              if (a.truth_label != b.truth_label) return a.truth_label < b.truth_label;
              if (a.model_label != b.model_label) return a.model_label < b.model_label;
              return a.replicate < b.replicate;
            });

  const int regret_samples = static_cast<int>(ctx.config.get_int("regret_samples", 1000));
  const int regret_size = static_cast<int>(ctx.config.get_int("regret_sample_size", 50));
  json summary;
  summary["config_hash"] = ctx.config.hash();
  summary["master_seed"] = master;
  summary["n_rows"] = out.rows.size();
  summary["skipped_replicates"] = skipped_keys;
  json truths_json = json::array();
  for (const auto& t : out.truths) truths_json.push_back(truth_to_json(t));
  summary["truths"] = truths_json;

  if (out.rows.size() >= 10) {
    json corr = json::object();
    for (const MetricId id :
         {MetricId::Auc, MetricId::Brier, MetricId::BrierSkill, MetricId::Mce}) {
      const CorrelationReport report = correlate(out.rows, id);
      out.correlations.push_back(report);
      json item;
      item["r"] = report.r;
      item["p_value"] = report.p_value;
      item["n"] = report.n;
      corr[report.metric] = item;
    }
    summary["correlations"] = corr;
  }
  if (!out.rows.empty()) {
    json reg = json::object();
    for (const MetricId id : {MetricId::Auc, MetricId::BrierSkill, MetricId::Mce}) {
      const RegretReport report =
          regret(out.rows, id, regret_samples, regret_size,
                 rng::derive(master, "simulate/regret"));
      out.regrets.push_back(report);
      json item;
      item["mean_abs_log_rr_error"] = report.mean_error;
      item["n_samples"] = report.n_samples;
      item["sample_size"] = report.sample_size;
      reg[report.metric] = item;
    }
    summary["regret"] = reg;

    // paired estimator bookkeeping: mean-prediction vs PPI error medians
    std::vector<double> err_mean, err_ppi;
    for (const auto& row : out.rows) {
      err_mean.push_back(row.abs_log_rr_error);
      err_ppi.push_back(row.abs_log_rr_error_ppi);
    }
    summary["median_abs_log_rr_error"] = median(err_mean);
    summary["median_abs_log_rr_error_ppi"] = median(err_ppi);
  }
  atomic_write_file(out_path(ctx, "sim_summary.json"), summary.dump(2) + "\n");
  write_run_meta(ctx, "simulate", {"sim_results.csv", "sim_summary.json"});
  return out;
}

// ---------------------------------------------------------------------------

ShiftReport cmd_shift(const CommandContext& ctx) {
  ctx.config.validate_keys(kShiftKeys);
  const std::uint64_t master = ctx.config.get_u64("seed", 0);
  const LoadedPair pair = load_pair(ctx.config);
  const int block_years = static_cast<int>(ctx.config.get_int("block_years", 3));
  const FoldPlan folds = plan_temporal_folds(pair.factual, block_years);

  ShiftReport report;
  ModelSpec prop_spec = default_spec(
      parse_algorithm(ctx.config.get_string("propensity_model", "gbt_hist")),
      rng::derive(master, "shift/propensity"));
  report.propensity = fit_propensity(pair.factual, pair.counterfactual, folds, prop_spec);

  std::vector<double> scores = report.propensity.factual;
  scores.insert(scores.end(), report.propensity.counterfactual.begin(),
                report.propensity.counterfactual.end());
  std::vector<double> labels(scores.size(), 0.0);
  std::fill(labels.begin(),
            labels.begin() + static_cast<std::ptrdiff_t>(pair.factual.size()), 1.0);
  report.proxy_a = proxy_a_distance(scores, labels);

  report.weights = importance_weights(report.propensity.factual,
                                      ctx.config.get_double("clip_lo", 0.01),
                                      ctx.config.get_double("clip_hi", 0.99));

  ModelSpec subgroup_spec = default_spec(
      parse_algorithm(ctx.config.get_string("subgroup_model", "logistic")),
      rng::derive(master, "shift/subgroup"));
  const CrossFitResult fitres = cross_fit(subgroup_spec, pair.factual, folds, {});
  report.subgroup_curve = temperature_subgroups(
      pair.factual, fitres.factual_oos,
      static_cast<int>(ctx.config.get_int("subgroup_bins", 8)));

  report.pca = pca_shift_summary(pair.factual, {&pair.counterfactual});

  atomic_write_file(out_path(ctx, "shift.json"), report.to_json() + "\n");
  atomic_write_file(out_path(ctx, "subgroup_curve.csv"), report.subgroup_csv());
  atomic_write_file(out_path(ctx, "pca_projection.csv"), report.pca_csv());
  atomic_write_file(out_path(ctx, "propensity_scores.csv"),
                    report.propensity_csv(pair.factual.day_ids()));
  write_run_meta(ctx, "shift", {"shift.json", "subgroup_curve.csv",
                                "pca_projection.csv", "propensity_scores.csv"});
  return report;
}

// ---------------------------------------------------------------------------

MultiplicityReport cmd_multiplicity(const CommandContext& ctx) {
  ctx.config.validate_keys(kMultiplicityKeys);
  const std::uint64_t master = ctx.config.get_u64("seed", 0);
  const LoadedPair pair = load_pair(ctx.config);
  const int block_years = static_cast<int>(ctx.config.get_int("block_years", 3));
  const FoldPlan folds = plan_temporal_folds(pair.factual, block_years);
  const std::vector<ModelSpec> specs = specs_from_config(ctx.config, master);
  const std::string population_name_str = ctx.config.get_string("population", "extreme");
  Population population;
  if (population_name_str == "extreme") population = Population::ExtremeDays;
  else if (population_name_str == "all") population = Population::AllFireDays;
  else throw Error(ErrorCode::ConfigParse, "population must be extreme or all");

  const std::vector<double> y = pair.factual.outcomes();
  std::vector<std::size_t> day_rows;
  for (std::size_t i = 0; i < y.size(); ++i)
    if (population == Population::AllFireDays || y[i] > 0.5) day_rows.push_back(i);
  if (day_rows.empty())
    throw Error(ErrorCode::MisalignedPair, "no days in the requested population");

  const FeatureMatrix x_factual = encode_features(pair.factual);
  const FeatureMatrix x_cf = encode_features(pair.counterfactual);

  PerEventMatrix matrix;
  for (const auto r : day_rows) matrix.day_ids.push_back(pair.factual.records[r].day_id);
  for (const auto& spec : specs) matrix.model_labels.push_back(spec.label());
  matrix.rr.assign(day_rows.size() * specs.size(), 1.0);

  std::map<std::string, double> aggregate_rr;
  std::vector<std::vector<double>> rr_by_model(specs.size());
  std::vector<std::vector<bool>> floored_by_model(specs.size());
  std::vector<double> aggregate_by_model(specs.size(), 1.0);
  parallel_for(specs.size(), ctx.workers, [&](std::size_t m) {
    const CrossFitResult fitres =
        cross_fit(specs[m], pair.factual, folds, {&pair.counterfactual});
    aggregate_by_model[m] =
        estimate_attribution(y, fitres.counterfactual.at(0), pair.comparison).rr;
    const auto p_fact = fitres.full_model->predict(x_factual);
    const auto p_cf = fitres.full_model->predict(x_cf);
    rr_by_model[m].resize(day_rows.size());
    floored_by_model[m].assign(day_rows.size(), false);
    for (std::size_t d = 0; d < day_rows.size(); ++d) {
      const std::size_t r = day_rows[d];
      const double warmer = pair.comparison.counterfactual_is_warmer ? p_cf[r] : p_fact[r];
      const double cooler = pair.comparison.counterfactual_is_warmer ? p_fact[r] : p_cf[r];
      rr_by_model[m][d] = warmer / cooler;
      floored_by_model[m][d] = p_cf[r] <= kProbFloor || p_fact[r] <= kProbFloor;
    }
  });
  std::size_t floored_days = 0;
  for (std::size_t d = 0; d < day_rows.size(); ++d) {
    bool any = false;
    for (std::size_t m = 0; m < specs.size(); ++m) {
      matrix.rr[d * specs.size() + m] = rr_by_model[m][d];
      any = any || floored_by_model[m][d];
    }
    floored_days += any;
  }
  for (std::size_t m = 0; m < specs.size(); ++m)
    aggregate_rr[specs[m].label()] = aggregate_by_model[m];

  const MultiplicityReport report =
      build_multiplicity_report(matrix, aggregate_rr, population, floored_days);
  atomic_write_file(out_path(ctx, "per_event_rr.csv"), matrix.to_csv());
  atomic_write_file(out_path(ctx, "multiplicity.json"), report.to_json() + "\n");
  write_run_meta(ctx, "multiplicity", {"per_event_rr.csv", "multiplicity.json"});
  return report;
}

// ---------------------------------------------------------------------------

void cmd_report(const CommandContext& ctx) {
  ctx.config.validate_keys(
      union_keys({&kAttributeKeys, &kShiftKeys, &kMultiplicityKeys}));
  const auto estimates = cmd_attribute(ctx);
  const ShiftReport shift = cmd_shift(ctx);
  const MultiplicityReport multiplicity = cmd_multiplicity(ctx);

  json report;
  report["config_hash"] = ctx.config.hash();
  report["master_seed"] = ctx.config.get_u64("seed", 0);
  json attribution = json::array();
  for (const auto& est : estimates) attribution.push_back(json::parse(est.to_json()));
  report["attribution"] = attribution;
  report["shift"] = json::parse(shift.to_json());
  report["multiplicity"] = json::parse(multiplicity.to_json());
  atomic_write_file(out_path(ctx, "report.json"), report.dump(2) + "\n");
  write_run_meta(ctx, "report", {"report.json"});
}

}  // namespace eea
