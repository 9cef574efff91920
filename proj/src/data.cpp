#include "eea/data.hpp"

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <unordered_map>
#include <unordered_set>

#include "eea/error.hpp"
#include "eea/util.hpp"

namespace eea {

// ---------------------------------------------------------------------------
// Date

Date Date::parse_iso(const std::string& text) {
  int y = 0, m = 0, d = 0;
  if (std::sscanf(text.c_str(), "%d-%d-%d", &y, &m, &d) != 3 || m < 1 ||
      m > 12 || d < 1 || d > 31) {
    throw Error(ErrorCode::NonFiniteValue, "bad ISO-8601 date '" + text + "'");
  }
  return Date{y, m, d};
}

std::string Date::to_iso() const {
  char buf[16];
  std::snprintf(buf, sizeof(buf), "%04d-%02d-%02d", year, month, day);
  return buf;
}

// Howard Hinnant's civil-calendar conversions.
std::int64_t Date::epoch_days() const {
  std::int64_t y = year;
  const int m = month;
  const int d = day;
  y -= m <= 2;
  const std::int64_t era = (y >= 0 ? y : y - 399) / 400;
  const unsigned yoe = static_cast<unsigned>(y - era * 400);
  const unsigned doy = (153u * static_cast<unsigned>(m + (m > 2 ? -3 : 9)) + 2u) / 5u +
                       static_cast<unsigned>(d) - 1u;
  const unsigned doe = yoe * 365u + yoe / 4u - yoe / 100u + doy;
  return era * 146097 + static_cast<std::int64_t>(doe) - 719468;
}

Date Date::from_epoch_days(std::int64_t days) {
  days += 719468;
  const std::int64_t era = (days >= 0 ? days : days - 146096) / 146097;
  const unsigned doe = static_cast<unsigned>(days - era * 146097);
  const unsigned yoe = (doe - doe / 1460 + doe / 36524 - doe / 146096) / 365;
  const std::int64_t y = static_cast<std::int64_t>(yoe) + era * 400;
  const unsigned doy = doe - (365 * yoe + yoe / 4 - yoe / 100);
  const unsigned mp = (5 * doy + 2) / 153;
  const unsigned d = doy - (153 * mp + 2) / 5 + 1;
  const unsigned m = mp + (mp < 10 ? 3 : static_cast<unsigned>(-9));
  return Date{static_cast<int>(y + (m <= 2)), static_cast<int>(m),
              static_cast<int>(d)};
}

// ---------------------------------------------------------------------------
// Categorical levels

const char* land_use_name(LandUse value) {
  switch (value) {
    case LandUse::Forest: return "forest";
    case LandUse::Shrub: return "shrub";
    case LandUse::SavannaGrassland: return "savanna_grassland";
  }
  return "?";
}

const char* aspect_name(Aspect value) {
  switch (value) {
    case Aspect::N: return "N";
    case Aspect::E: return "E";
    case Aspect::S: return "S";
    case Aspect::W: return "W";
  }
  return "?";
}

std::optional<LandUse> parse_land_use(const std::string& text) {
  if (text == "forest") return LandUse::Forest;
  if (text == "shrub") return LandUse::Shrub;
  if (text == "savanna_grassland") return LandUse::SavannaGrassland;
  return std::nullopt;
}

std::optional<Aspect> parse_aspect(const std::string& text) {
  if (text == "N") return Aspect::N;
  if (text == "E") return Aspect::E;
  if (text == "S") return Aspect::S;
  if (text == "W") return Aspect::W;
  return std::nullopt;
}

ScenarioId ScenarioId::parse(const std::string& text) {
  if (text == "Observed") return observed();
  if (text == "PreIndustrial") return pre_industrial();
  if (text == "SSP585_EOC") return ssp585_eoc();
  const std::string prefix = "Synthetic(";
  if (text.rfind(prefix, 0) == 0 && text.back() == ')') {
    return synthetic(text.substr(prefix.size(), text.size() - prefix.size() - 1));
  }
  throw Error(ErrorCode::BadCategoryLevel, "unknown scenario id '" + text + "'");
}

std::string ScenarioId::to_string() const {
  switch (kind) {
    case Kind::Observed: return "Observed";
    case Kind::PreIndustrial: return "PreIndustrial";
    case Kind::SSP585_EOC: return "SSP585_EOC";
    case Kind::Synthetic: return "Synthetic(" + name + ")";
  }
  return "?";
}

// ---------------------------------------------------------------------------
// Dataset

bool ScenarioDataset::has_outcomes() const {
  if (records.empty()) return false;
  for (const auto& r : records)
    if (!r.outcome.has_value()) return false;
  return true;
}

std::vector<std::int64_t> ScenarioDataset::day_ids() const {
  std::vector<std::int64_t> ids;
  ids.reserve(records.size());
  for (const auto& r : records) ids.push_back(r.day_id);
  return ids;
}

std::vector<double> ScenarioDataset::outcomes() const {
  std::vector<double> y;
  y.reserve(records.size());
  for (const auto& r : records) {
    if (!r.outcome.has_value())
      throw Error(ErrorCode::MissingColumn, "outcome missing for day " +
                                                std::to_string(r.day_id));
    y.push_back(static_cast<double>(*r.outcome));
  }
  return y;
}

double ScenarioDataset::prevalence() const {
  const auto y = outcomes();
  double s = 0.0;
  for (double v : y) s += v;
  return records.empty() ? 0.0 : s / static_cast<double>(y.size());
}

// ---------------------------------------------------------------------------
// CSV

const char* const kCsvColumns[13] = {
    "day_id", "date",   "temperature", "vpd",    "fm100",
    "fm1000", "precip", "wind",        "land_use", "aspect",
    "slope",  "elevation", "veg_frac"};

namespace {

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> fields;
  std::string field;
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (quoted) {
      if (c == '"') {
        if (i + 1 < line.size() && line[i + 1] == '"') {
          field += '"';
          ++i;
        } else {
          quoted = false;
        }
      } else {
        field += c;
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      fields.push_back(std::move(field));
      field.clear();
    } else {
      field += c;
    }
  }
  fields.push_back(std::move(field));
  return fields;
}

double parse_number(const std::string& text, std::size_t row, const char* column) {
  char* end = nullptr;
  const double v = std::strtod(text.c_str(), &end);
  if (end == text.c_str() || *end != '\0' || !std::isfinite(v)) {
    throw Error(ErrorCode::NonFiniteValue,
                std::string("column '") + column + "', row " + std::to_string(row) +
                    ": value '" + text + "' is not a finite number");
  }
  return v;
}

}  // namespace

ScenarioDataset ingest_csv(const std::string& csv_text, const ScenarioId& scenario_id) {
  ScenarioDataset dataset;
  dataset.scenario_id = scenario_id;

  std::size_t pos = 0;
  auto next_line = [&](std::string& line) {
    if (pos >= csv_text.size()) return false;
    std::size_t end = csv_text.find('\n', pos);
    if (end == std::string::npos) end = csv_text.size();
    line.assign(csv_text, pos, end - pos);
    if (!line.empty() && line.back() == '\r') line.pop_back();
    pos = end + 1;
    return true;
  };

  std::string line;
  if (!next_line(line))
    throw Error(ErrorCode::MissingColumn, "empty input, header row required");

  const auto header = split_csv_line(line);
  const bool factual_like =
      scenario_id.kind == ScenarioId::Kind::Observed ||
      scenario_id.kind == ScenarioId::Kind::Synthetic;
  bool has_outcome_column = false;
  {
    std::size_t i = 0;
    for (; i < 13; ++i) {
      if (i >= header.size() || header[i] != kCsvColumns[i]) {
        throw Error(ErrorCode::MissingColumn,
                    std::string("expected column '") + kCsvColumns[i] +
                        "' at position " + std::to_string(i + 1));
      }
    }
    if (header.size() == 14 && header[13] == "outcome") {
      has_outcome_column = true;
    } else if (header.size() != 13) {
      throw Error(ErrorCode::UnexpectedColumn,
                  "unexpected trailing column '" +
                      (header.size() > 13 ? header[13] : std::string()) + "'");
    }
  }
  if (scenario_id.kind == ScenarioId::Kind::Observed && !has_outcome_column)
    throw Error(ErrorCode::MissingColumn,
                "outcome column is required for the Observed scenario");
  if (!factual_like && has_outcome_column)
    throw Error(ErrorCode::UnexpectedColumn,
                "outcome column is not permitted for counterfactual scenario " +
                    scenario_id.to_string());

  std::unordered_set<std::int64_t> seen_ids;
  std::size_t row = 0;
  while (next_line(line)) {
    if (line.empty()) continue;
    ++row;
    const auto fields = split_csv_line(line);
    const std::size_t expected = has_outcome_column ? 14u : 13u;
    if (fields.size() != expected) {
      throw Error(ErrorCode::MissingColumn,
                  "row " + std::to_string(row) + ": expected " +
                      std::to_string(expected) + " fields, got " +
                      std::to_string(fields.size()));
    }
    FireDayRecord r;
    r.day_id = static_cast<std::int64_t>(parse_number(fields[0], row, "day_id"));
    if (!seen_ids.insert(r.day_id).second)
      throw Error(ErrorCode::DuplicateDayId,
                  "row " + std::to_string(row) + ": day_id " +
                      std::to_string(r.day_id) + " appears twice");
    r.date = Date::parse_iso(fields[1]);
    r.temperature = parse_number(fields[2], row, "temperature");
    r.vapor_pressure_deficit = parse_number(fields[3], row, "vpd");
    r.fuel_moisture_100h = parse_number(fields[4], row, "fm100");
    r.fuel_moisture_1000h = parse_number(fields[5], row, "fm1000");
    r.precipitation = parse_number(fields[6], row, "precip");
    r.wind_speed = parse_number(fields[7], row, "wind");
    const auto land = parse_land_use(fields[8]);
    if (!land)
      throw Error(ErrorCode::BadCategoryLevel,
                  "column 'land_use', row " + std::to_string(row) +
                      ": level '" + fields[8] + "' is not in {forest, shrub, savanna_grassland}");
    r.land_use = *land;
    const auto aspect = parse_aspect(fields[9]);
    if (!aspect)
      throw Error(ErrorCode::BadCategoryLevel,
                  "column 'aspect', row " + std::to_string(row) + ": level '" +
                      fields[9] + "' is not in {N, E, S, W}");
    r.aspect = *aspect;
    r.slope = parse_number(fields[10], row, "slope");
    r.elevation = parse_number(fields[11], row, "elevation");
    r.vegetation_fraction = parse_number(fields[12], row, "veg_frac");
    if (r.vegetation_fraction < 0.0 || r.vegetation_fraction > 1.0)
      throw Error(ErrorCode::NonFiniteValue,
                  "column 'veg_frac', row " + std::to_string(row) +
                      ": value outside [0,1]");
    if (r.fuel_moisture_100h < 0.0 || r.fuel_moisture_1000h < 0.0)
      throw Error(ErrorCode::NonFiniteValue,
                  "row " + std::to_string(row) + ": fuel moisture below 0");
    if (has_outcome_column) {
      const double y = parse_number(fields[13], row, "outcome");
      if (y != 0.0 && y != 1.0)
        throw Error(ErrorCode::NonFiniteValue,
                    "column 'outcome', row " + std::to_string(row) +
                        ": value must be 0 or 1");
      r.outcome = static_cast<int>(y);
    }
    dataset.records.push_back(std::move(r));
  }
  return dataset;
}

ScenarioDataset ingest_csv_file(const std::string& path, const ScenarioId& scenario_id) {
  return ingest_csv(read_file(path), scenario_id);
}

std::string write_csv(const ScenarioDataset& dataset) {
  std::string out;
  out.reserve(dataset.records.size() * 96 + 128);
  const bool with_outcome = dataset.has_outcomes();
  for (std::size_t i = 0; i < 13; ++i) {
    if (i) out += ',';
    out += kCsvColumns[i];
  }
  if (with_outcome) out += ",outcome";
  out += '\n';
  for (const auto& r : dataset.records) {
    out += std::to_string(r.day_id);
    out += ',';
    out += r.date.to_iso();
    out += ',';
    out += fmt_double(r.temperature);
    out += ',';
    out += fmt_double(r.vapor_pressure_deficit);
    out += ',';
    out += fmt_double(r.fuel_moisture_100h);
    out += ',';
    out += fmt_double(r.fuel_moisture_1000h);
    out += ',';
    out += fmt_double(r.precipitation);
    out += ',';
    out += fmt_double(r.wind_speed);
    out += ',';
    out += land_use_name(r.land_use);
    out += ',';
    out += aspect_name(r.aspect);
    out += ',';
    out += fmt_double(r.slope);
    out += ',';
    out += fmt_double(r.elevation);
    out += ',';
    out += fmt_double(r.vegetation_fraction);
    if (with_outcome) {
      out += ',';
      out += std::to_string(r.outcome.value());
    }
    out += '\n';
  }
  return out;
}

void check_pairing(const ScenarioDataset& a, const ScenarioDataset& b) {
  if (a.size() != b.size())
    throw Error(ErrorCode::PairingViolation,
                "datasets have " + std::to_string(a.size()) + " vs " +
                    std::to_string(b.size()) + " records");
  std::unordered_map<std::int64_t, const FireDayRecord*> by_id;
  by_id.reserve(b.size());
  for (const auto& r : b.records) by_id.emplace(r.day_id, &r);
  for (const auto& ra : a.records) {
    const auto it = by_id.find(ra.day_id);
    if (it == by_id.end())
      throw Error(ErrorCode::PairingViolation,
                  "day " + std::to_string(ra.day_id) + " missing from pair");
    const FireDayRecord& rb = *it->second;
    const auto fail = [&](const char* column) {
      throw Error(ErrorCode::PairingViolation,
                  std::string("day ") + std::to_string(ra.day_id) +
                      ": column '" + column + "' differs across the pair");
    };
    if (!(ra.date == rb.date)) fail("date");
    if (ra.land_use != rb.land_use) fail("land_use");
    if (ra.aspect != rb.aspect) fail("aspect");
    if (ra.slope != rb.slope) fail("slope");
    if (ra.elevation != rb.elevation) fail("elevation");
    if (ra.vegetation_fraction != rb.vegetation_fraction) fail("veg_frac");
    if (ra.precipitation != rb.precipitation) fail("precip");
    if (ra.wind_speed != rb.wind_speed) fail("wind");
  }
}

}  // namespace eea
