#include "stable_lattice/report.hpp"

#include <fstream>
#include <sstream>
#include <stdexcept>

namespace slat {

bool ExperimentReport::passed() const {
  for (const auto& c : criteria)
    if (!c.pass) return false;
  return true;
}

const Series& ExperimentReport::find_series(const std::string& series_name) const {
  for (const auto& s : series)
    if (s.name == series_name) return s;
  throw std::out_of_range("ExperimentReport: no series named " + series_name);
}

nlohmann::json ExperimentReport::to_json() const {
  nlohmann::json j;
  j["name"] = name;
  j["parameters"] = parameters;
  nlohmann::json rates = nlohmann::json::object();
  for (const auto& [k, v] : fitted_rates)
    rates[k] = {{"rate", v.rate}, {"ci_low", v.ci_low}, {"ci_high", v.ci_high}};
  j["fitted_rates"] = rates;
  nlohmann::json crits = nlohmann::json::array();
  for (const auto& c : criteria)
    crits.push_back({{"name", c.name}, {"pass", c.pass}, {"detail", c.detail}});
  j["criteria"] = crits;
  j["pass"] = passed();
  return j;
}

std::string csv_field(const std::string& raw) {
  if (raw.find_first_of(",\"\n\r") == std::string::npos) return raw;
  std::string out = "\"";
  for (char ch : raw) {
    if (ch == '"') out += '"';
    out += ch;
  }
  out += '"';
  return out;
}

std::string ExperimentReport::series_csv() const {
  std::ostringstream os;
  os.precision(17);
  os << "series,t,estimate,std_error\r\n";
  for (const auto& s : series)
    for (const auto& p : s.points)
      os << csv_field(s.name) << ',' << p.t << ',' << p.estimate << ',' << p.std_error << "\r\n";
  return os.str();
}

std::string ExperimentReport::summary() const {
  std::ostringstream os;
  os << "experiment " << name << ": " << (passed() ? "PASS" : "FAIL") << '\n';
  for (const auto& c : criteria) {
    os << "  [" << (c.pass ? "pass" : "FAIL") << "] " << c.name;
    if (!c.detail.empty()) os << " -- " << c.detail;
    os << '\n';
  }
  for (const auto& [k, v] : fitted_rates)
    os << "  rate " << k << " = " << v.rate << "  [" << v.ci_low << ", " << v.ci_high << "]\n";
  return os.str();
}

void write_file_atomic(const std::filesystem::path& path, const std::string& content) {
  namespace fs = std::filesystem;
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  const fs::path tmp = path.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot open " + tmp.string() + " for writing");
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    if (!out) throw std::runtime_error("short write to " + tmp.string());
  }
  fs::rename(tmp, path);
}

}  // namespace slat
