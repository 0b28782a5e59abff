#include <cstdio>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "countergm/errors.hpp"
#include "countergm/study.hpp"

namespace countergm {

namespace {

std::string num(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string clean(std::string s) {
  for (char& c : s)
    if (c == ',' || c == '\n' || c == '\r' || c == '"') c = ';';
  return s;
}

std::vector<std::string> split(const std::string& line) {
  std::vector<std::string> out;
  std::stringstream ss(line);
  std::string cell;
  while (std::getline(ss, cell, ',')) out.push_back(cell);
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

std::ofstream open_out(const std::filesystem::path& path) {
  std::ofstream f(path);
  if (!f) throw IngestError(path.string() + ": cannot open for writing");
  return f;
}

double parse_double(const std::string& s, const std::filesystem::path& path, int line) {
  char* end = nullptr;
  const double v = std::strtod(s.c_str(), &end);
  if (end == s.c_str() || *end != '\0') throw IngestError(path.string() + ": bad number at line " + std::to_string(line));
  return v;
}

}  // namespace

void write_raw_csv(const std::filesystem::path& path, const std::vector<RawRecord>& raw,
                   const std::vector<std::string>& coefficients) {
  std::ofstream f = open_out(path);
  f << "method,replicate,converged,iterations";
  for (const auto& c : coefficients) f << ",theta_" << clean(c);
  for (const auto& c : coefficients) f << ",se_" << clean(c);
  f << ",error\n";
  for (const RawRecord& r : raw) {
    f << clean(r.method) << ',' << r.replicate << ',' << (r.converged ? 1 : 0) << ',' << r.iterations;
    for (Eigen::Index i = 0; i < r.theta.size(); ++i) f << ',' << num(r.theta[i]);
    for (Eigen::Index i = 0; i < r.se.size(); ++i) f << ',' << num(r.se[i]);
    f << ',' << clean(r.error) << '\n';
  }
}

std::vector<RawRecord> read_raw_csv(const std::filesystem::path& path, std::vector<std::string>* coefficients) {
  std::ifstream f(path);
  if (!f) throw IngestError(path.string() + ": cannot open");
  std::string line;
  if (!std::getline(f, line)) throw IngestError(path.string() + ": empty file");
  const std::vector<std::string> header = split(line);
  if (header.size() < 5 || (header.size() - 5) % 2 != 0 || header[0] != "method")
    throw IngestError(path.string() + ": unexpected header");
  const std::size_t k = (header.size() - 5) / 2;
  if (coefficients) {
    coefficients->clear();
    for (std::size_t i = 0; i < k; ++i) coefficients->push_back(header[4 + i].substr(6));
  }
  std::vector<RawRecord> out;
  int lineno = 1;
  while (std::getline(f, line)) {
    ++lineno;
    if (line.empty()) continue;
    const std::vector<std::string> cells = split(line);
    if (cells.size() != header.size()) throw IngestError(path.string() + ": malformed row at line " + std::to_string(lineno));
    RawRecord r;
    r.method = cells[0];
    r.replicate = std::stoi(cells[1]);
    r.converged = cells[2] == "1";
    r.iterations = std::stoi(cells[3]);
    r.theta.resize(static_cast<Eigen::Index>(k));
    r.se.resize(static_cast<Eigen::Index>(k));
    for (std::size_t i = 0; i < k; ++i) {
      r.theta[static_cast<Eigen::Index>(i)] = parse_double(cells[4 + i], path, lineno);
      r.se[static_cast<Eigen::Index>(i)] = parse_double(cells[4 + k + i], path, lineno);
    }
    r.error = cells.back();
    out.push_back(std::move(r));
  }
  return out;
}

void write_timings_csv(const std::filesystem::path& path, const std::vector<RawRecord>& raw) {
  std::ofstream f = open_out(path);
  f << "method,replicate,seconds\n";
  for (const RawRecord& r : raw) f << clean(r.method) << ',' << r.replicate << ',' << num(r.seconds) << '\n';
}

void read_timings_csv(const std::filesystem::path& path, std::vector<RawRecord>& raw) {
  std::ifstream f(path);
  if (!f) throw IngestError(path.string() + ": cannot open");
  std::string line;
  std::getline(f, line);
  int lineno = 1;
  while (std::getline(f, line)) {
    ++lineno;
    if (line.empty()) continue;
    const std::vector<std::string> cells = split(line);
    if (cells.size() != 3) throw IngestError(path.string() + ": malformed row at line " + std::to_string(lineno));
    const int rep = std::stoi(cells[1]);
    for (RawRecord& r : raw)
      if (r.method == cells[0] && r.replicate == rep) r.seconds = parse_double(cells[2], path, lineno);
  }
}

void write_report_csv(const std::filesystem::path& path, const MetricsReport& report) {
  std::ofstream f = open_out(path);
  f << "method,coefficient,arb,se,rmse,calibration,coverage,mean_seconds,failures\n";
  for (const MetricRow& r : report.rows) {
    f << clean(r.method) << ',' << clean(r.coefficient) << ',' << num(r.arb) << ',' << num(r.se) << ','
      << num(r.rmse) << ',' << (r.calibration ? num(*r.calibration) : std::string("NA")) << ','
      << num(r.coverage) << ',' << num(r.mean_seconds) << ',' << r.failures << '\n';
  }
}

void write_report_json(const std::filesystem::path& path, const MetricsReport& report) {
  nlohmann::json rows = nlohmann::json::array();
  auto finite_or_null = [](double v) { return std::isfinite(v) ? nlohmann::json(v) : nlohmann::json(nullptr); };
  for (const MetricRow& r : report.rows) {
    rows.push_back({{"method", r.method},
                    {"coefficient", r.coefficient},
                    {"arb", finite_or_null(r.arb)},
                    {"arb_is_relative", r.arb_relative},
                    {"bias", finite_or_null(r.bias)},
                    {"se", finite_or_null(r.se)},
                    {"rmse", finite_or_null(r.rmse)},
                    {"calibration", r.calibration ? finite_or_null(*r.calibration) : nlohmann::json(nullptr)},
                    {"coverage", finite_or_null(r.coverage)},
                    {"mean_seconds", r.mean_seconds},
                    {"failures", r.failures},
                    {"flagged", r.flagged}});
  }
  std::ofstream f = open_out(path);
  f << nlohmann::json{{"rows", rows}}.dump(2) << '\n';
}

}  // namespace countergm
