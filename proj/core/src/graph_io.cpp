#include "countergm/graph_io.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <string_view>
#include <vector>

#include "countergm/errors.hpp"

namespace countergm {

namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

std::vector<std::string_view> split(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  for (;;) {
    const std::size_t comma = line.find(',', start);
    out.push_back(trim(line.substr(start, comma == std::string_view::npos ? line.npos : comma - start)));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return out;
}

std::ifstream open(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IngestError(path.string() + ": cannot open file");
  return in;
}

[[noreturn]] void fail(const std::filesystem::path& path, std::size_t line, const std::string& what) {
  throw IngestError(path.string() + ": " + what + " at line " + std::to_string(line));
}

bool parse_int(std::string_view s, std::int64_t& out) {
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
  return ec == std::errc() && ptr == s.data() + s.size() && !s.empty();
}

bool parse_double(std::string_view s, double& out) {
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
  return ec == std::errc() && ptr == s.data() + s.size() && !s.empty();
}

bool is_blank(std::string_view s) { return trim(s).empty(); }

}  // namespace

CountGraph load_graph(const std::filesystem::path& edgelist, int n) {
  if (n < 2) throw DomainError("node count must be at least 2");
  std::ifstream in = open(edgelist);
  CountGraph g(n);
  std::string line;
  std::size_t lineno = 0;
  bool header_seen = false;
  while (std::getline(in, line)) {
    ++lineno;
    if (!header_seen) {
      std::string_view head = trim(line);
      if (head.starts_with("\xEF\xBB\xBF")) head.remove_prefix(3);
      const auto cols = split(head);
      if (cols.size() != 3 || cols[0] != "from" || cols[1] != "to" || cols[2] != "value")
        fail(edgelist, lineno, "expected header 'from,to,value'");
      header_seen = true;
      continue;
    }
    if (is_blank(line)) continue;
    const auto cols = split(line);
    std::int64_t from = 0, to = 0, value = 0;
    if (cols.size() != 3 || !parse_int(cols[0], from) || !parse_int(cols[1], to) ||
        !parse_int(cols[2], value))
      fail(edgelist, lineno, "malformed row");
    if (from < 1 || from > n || to < 1 || to > n) fail(edgelist, lineno, "node id out of range");
    if (from == to) fail(edgelist, lineno, "self-loop");
    if (value < 0) fail(edgelist, lineno, "negative value");
    g.set(static_cast<int>(from - 1), static_cast<int>(to - 1), value);
  }
  if (!header_seen) fail(edgelist, 1, "expected header 'from,to,value'");
  return g;
}

void save_graph(const std::filesystem::path& edgelist, const CountGraph& g) {
  std::ofstream out(edgelist);
  if (!out) throw IngestError(edgelist.string() + ": cannot open file for writing");
  out << "from,to,value\n";
  for (int i = 0; i < g.n(); ++i)
    for (int j = 0; j < g.n(); ++j)
      if (i != j && g(i, j) != 0) out << i + 1 << ',' << j + 1 << ',' << g(i, j) << '\n';
}

CovariateSet load_covariates(const std::optional<std::filesystem::path>& node_csv,
                             const std::map<std::string, std::filesystem::path>& dyad_csvs, int n) {
  CovariateSet cov;
  if (node_csv) {
    std::ifstream in = open(*node_csv);
    std::string line;
    std::size_t lineno = 0;
    std::vector<std::string> names;
    std::vector<std::vector<double>> columns;
    while (std::getline(in, line)) {
      ++lineno;
      if (names.empty()) {
        std::string_view head = trim(line);
        if (head.starts_with("\xEF\xBB\xBF")) head.remove_prefix(3);
        for (auto c : split(head)) {
          if (c.empty()) fail(*node_csv, lineno, "empty column name");
          names.emplace_back(c);
        }
        columns.resize(names.size());
        continue;
      }
      if (is_blank(line)) continue;
      const auto cols = split(line);
      if (cols.size() != names.size()) fail(*node_csv, lineno, "wrong number of columns");
      for (std::size_t c = 0; c < cols.size(); ++c) {
        double v = 0.0;
        if (!parse_double(cols[c], v)) fail(*node_csv, lineno, "malformed number");
        if (!std::isfinite(v)) fail(*node_csv, lineno, "non-finite value");
        columns[c].push_back(v);
      }
    }
    if (names.empty()) throw IngestError(node_csv->string() + ": missing header");
    for (std::size_t c = 0; c < names.size(); ++c) {
      if (static_cast<int>(columns[c].size()) != n)
        throw IngestError(node_csv->string() + ": dimension mismatch: " +
                          std::to_string(columns[c].size()) + " rows for " + std::to_string(n) +
                          " nodes");
      cov.node[names[c]] = std::move(columns[c]);
    }
  }

  for (const auto& [name, path] : dyad_csvs) {
    std::ifstream in = open(path);
    Eigen::MatrixXd m(n, n);
    std::string line;
    std::size_t lineno = 0;
    int row = 0;
    while (std::getline(in, line)) {
      ++lineno;
      if (is_blank(line)) continue;
      if (row >= n) fail(path, lineno, "dimension mismatch: more than " + std::to_string(n) + " rows");
      const auto cols = split(line);
      if (static_cast<int>(cols.size()) != n)
        fail(path, lineno, "dimension mismatch: expected " + std::to_string(n) + " columns");
      for (int c = 0; c < n; ++c) {
        double v = 0.0;
        if (!parse_double(cols[c], v)) fail(path, lineno, "malformed number");
        if (!std::isfinite(v)) fail(path, lineno, "non-finite value");
        m(row, c) = v;
      }
      ++row;
    }
    if (row != n)
      throw IngestError(path.string() + ": dimension mismatch: " + std::to_string(row) +
                        " rows, expected " + std::to_string(n));
    cov.dyad[name] = std::move(m);
  }
  return cov;
}

}  // namespace countergm
