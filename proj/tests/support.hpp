#pragma once

#include <atomic>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "countergm/graph.hpp"
#include "countergm/model.hpp"
#include "countergm/rng.hpp"

namespace countergm::testing {

/// Fresh directory under the system temp dir, removed on destruction.
class TempDir {
 public:
  TempDir() {
    static std::atomic<int> counter{0};
    path_ = std::filesystem::temp_directory_path() /
            ("countergm_test_" + std::to_string(::getpid()) + "_" + std::to_string(counter++));
    std::filesystem::remove_all(path_);
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const std::filesystem::path& path() const { return path_; }
  std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

  std::filesystem::path write(const std::string& name, const std::string& text) const {
    const auto p = path_ / name;
    std::ofstream(p) << text;
    return p;
  }

 private:
  std::filesystem::path path_;
};

inline std::string read_file(const std::filesystem::path& p) {
  std::ifstream f(p);
  std::stringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

/// Graph whose dyads are zero with probability p_zero and otherwise uniform on 1..max_value.
inline CountGraph random_graph(int n, EdgeValue max_value, Rng& rng, double p_zero = 0.3) {
  CountGraph g(n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      if (i == j || uniform01(rng) < p_zero) continue;
      g.set(i, j, 1 + static_cast<EdgeValue>(uniform_index(rng, static_cast<std::uint64_t>(max_value))));
    }
  return g;
}

inline std::vector<double> random_vector(int n, Rng& rng, double scale = 1.0) {
  std::vector<double> v(static_cast<std::size_t>(n));
  for (double& x : v) x = scale * (2.0 * uniform01(rng) - 1.0);
  return v;
}

inline Eigen::MatrixXd random_dyad_matrix(int n, Rng& rng, double scale = 1.0) {
  Eigen::MatrixXd m = Eigen::MatrixXd::Zero(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      if (i != j) m(i, j) = scale * (2.0 * uniform01(rng) - 1.0);
  return m;
}

/// A model with every term kind, covariates "a" (node) and "d" (dyad) drawn at random.
inline ModelSpec all_terms_spec(int n, Rng& rng) {
  ModelSpec spec;
  for (const char* t : {"sum", "nonzero", "nodeocov(a)", "nodeicov(a)", "edgecov(d)", "mutual", "mixed2star"})
    spec.terms.push_back(TermSpec::parse(t));
  spec.covariates.node["a"] = random_vector(n, rng);
  spec.covariates.dyad["d"] = random_dyad_matrix(n, rng);
  return spec;
}

inline ModelSpec spec_of(std::initializer_list<const char*> terms) {
  ModelSpec spec;
  for (const char* t : terms) spec.terms.push_back(TermSpec::parse(t));
  return spec;
}

}  // namespace countergm::testing
