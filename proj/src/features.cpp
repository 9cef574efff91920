#include "eea/features.hpp"

namespace eea {

FeatureMatrix FeatureMatrix::select_rows(std::span<const std::size_t> rows) const {
  FeatureMatrix out;
  out.names = names;
  out.n_rows = rows.size();
  out.values.reserve(rows.size() * names.size());
  for (const std::size_t r : rows) {
    const auto rr = row(r);
    out.values.insert(out.values.end(), rr.begin(), rr.end());
  }
  return out;
}

const std::vector<std::string>& feature_schema() {
  static const std::vector<std::string> kSchema = {
      "temperature", "vpd",        "fm100",      "fm1000",
      "precip",      "wind",       "slope",      "elevation",
      "veg_frac",    "land_forest", "land_shrub", "land_savanna",
      "aspect_N",    "aspect_E",   "aspect_S",   "aspect_W"};
  return kSchema;
}

FeatureMatrix encode_features(const ScenarioDataset& dataset) {
  FeatureMatrix m;
  m.names = feature_schema();
  m.n_rows = dataset.records.size();
  m.values.resize(m.n_rows * m.names.size(), 0.0);
  for (std::size_t i = 0; i < dataset.records.size(); ++i) {
    const auto& r = dataset.records[i];
    double* row = m.values.data() + i * m.names.size();
    row[0] = r.temperature;
    row[1] = r.vapor_pressure_deficit;
    row[2] = r.fuel_moisture_100h;
    row[3] = r.fuel_moisture_1000h;
    row[4] = r.precipitation;
    row[5] = r.wind_speed;
    row[6] = r.slope;
    row[7] = r.elevation;
    row[8] = r.vegetation_fraction;
    row[9 + static_cast<std::size_t>(r.land_use)] = 1.0;
    row[12 + static_cast<std::size_t>(r.aspect)] = 1.0;
  }
  return m;
}

}  // namespace eea
