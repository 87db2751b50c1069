#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

// Experiment reports: named series of (time, estimate, standard error),
// fitted rates with 95% confidence intervals, and pass/fail criteria.
// Serialization: one CSV holding all series, plus a JSON manifest.

namespace slat {

struct SeriesPoint {
  double t = 0.0;
  double estimate = 0.0;
  double std_error = 0.0;
};

struct Series {
  std::string name;
  std::vector<SeriesPoint> points;
};

struct RateFit {
  double rate = 0.0;
  double ci_low = 0.0;
  double ci_high = 0.0;
};

struct Criterion {
  std::string name;
  bool pass = false;
  std::string detail;
};

struct ExperimentReport {
  std::string name;
  nlohmann::json parameters;
  std::vector<Series> series;
  std::map<std::string, RateFit> fitted_rates;
  std::vector<Criterion> criteria;

  bool passed() const;
  const Series& find_series(const std::string& series_name) const;
  nlohmann::json to_json() const;
  // columns: series,t,estimate,std_error (RFC 4180)
  std::string series_csv() const;
  std::string summary() const;
};

std::string csv_field(const std::string& raw);

// write-to-temp + atomic rename; no partial files on failure
void write_file_atomic(const std::filesystem::path& path, const std::string& content);

}  // namespace slat
