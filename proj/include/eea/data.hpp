#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace eea {

struct Date {
  int year = 0;
  int month = 1;
  int day = 1;

  static Date parse_iso(const std::string& text);  // "YYYY-MM-DD"
  std::string to_iso() const;

  // Days since 1970-01-01, proleptic Gregorian.
  static Date from_epoch_days(std::int64_t days);
  std::int64_t epoch_days() const;

  friend bool operator==(const Date&, const Date&) = default;
};

enum class LandUse : std::uint8_t { Forest, Shrub, SavannaGrassland };
enum class Aspect : std::uint8_t { N, E, S, W };

const char* land_use_name(LandUse value);
const char* aspect_name(Aspect value);
std::optional<LandUse> parse_land_use(const std::string& text);
std::optional<Aspect> parse_aspect(const std::string& text);

struct ScenarioId {
  enum class Kind : std::uint8_t { Observed, PreIndustrial, SSP585_EOC, Synthetic };

  Kind kind = Kind::Observed;
  std::string name;  // set for Kind::Synthetic only

  static ScenarioId observed() { return {Kind::Observed, {}}; }
  static ScenarioId pre_industrial() { return {Kind::PreIndustrial, {}}; }
  static ScenarioId ssp585_eoc() { return {Kind::SSP585_EOC, {}}; }
  static ScenarioId synthetic(std::string label) {
    return {Kind::Synthetic, std::move(label)};
  }
  static ScenarioId parse(const std::string& text);

  bool is_factual() const { return kind == Kind::Observed; }
  std::string to_string() const;

  friend bool operator==(const ScenarioId&, const ScenarioId&) = default;
};

struct FireDayRecord {
  std::int64_t day_id = 0;
  Date date;
  double temperature = 0.0;             // degC
  double vapor_pressure_deficit = 0.0;  // kPa
  double fuel_moisture_100h = 0.0;      // percent
  double fuel_moisture_1000h = 0.0;     // percent
  double precipitation = 0.0;           // mm/day
  double wind_speed = 0.0;              // m/s
  LandUse land_use = LandUse::Forest;
  Aspect aspect = Aspect::N;
  double slope = 0.0;      // degrees
  double elevation = 0.0;  // meters
  double vegetation_fraction = 0.0;
  std::optional<int> outcome;  // 1 = extreme daily growth
};

struct ScenarioDataset {
  ScenarioId scenario_id;
  std::vector<FireDayRecord> records;
  int schema_version = 1;

  std::size_t size() const { return records.size(); }
  bool has_outcomes() const;
  std::vector<std::int64_t> day_ids() const;
  std::vector<double> outcomes() const;  // requires has_outcomes()
  double prevalence() const;
};

// Exact CSV header, in order; `outcome` is appended for factual data.
extern const char* const kCsvColumns[13];

ScenarioDataset ingest_csv(const std::string& csv_text, const ScenarioId& scenario_id);
ScenarioDataset ingest_csv_file(const std::string& path, const ScenarioId& scenario_id);
std::string write_csv(const ScenarioDataset& dataset);

// Paired scenarios must agree on day_ids, dates, and every variable that is
// held constant across scenarios (land, precipitation, wind). Throws
// PairingViolation naming the first offending day and column.
void check_pairing(const ScenarioDataset& a, const ScenarioDataset& b);

}  // namespace eea
