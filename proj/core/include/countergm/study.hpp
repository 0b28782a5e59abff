#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "countergm/cd.hpp"
#include "countergm/mcmle.hpp"
#include "countergm/mple.hpp"
#include "countergm/model.hpp"
#include "countergm/oracle.hpp"
#include "countergm/sampler.hpp"

namespace countergm {

enum class MethodKind { Mple, Cd, Mcmle, Oracle };

std::string to_string(MethodKind kind);
MethodKind parse_method_kind(const std::string& text);

/// One estimator in a study. Only the block matching `kind` is used; `Mcmle` runs the
/// full pipeline including its seed stage. Per-replicate seeds are derived by the study.
struct MethodConfig {
  std::string label;
  MethodKind kind = MethodKind::Mple;
  EdgeSampleSpec mple_sample;
  WindowSpec mple_window = GlobalTruncation{};
  MpleOptions mple;
  CDConfig cd;
  PipelineConfig pipeline;
  EnumSpec oracle;
};

struct StudyConfig {
  ModelSpec model;
  int n = 0;
  Eigen::VectorXd theta_star;
  /// Ground-truth draws are consecutive thinned states of one chain (burn-in, then every
  /// `interval` steps); n_samples and seed are set by the study.
  SamplerConfig generator;
  int replicates = 10;
  std::vector<MethodConfig> methods;
  double level = 0.95;
  int workers = 1;
  std::uint64_t seed = 0;

  void validate() const;
};

struct RawRecord {
  std::string method;
  int replicate = 0;
  Eigen::VectorXd theta;
  Eigen::VectorXd se;
  double seconds = 0.0;
  bool converged = false;
  int iterations = 0;
  std::string error;  ///< empty unless the fit threw

  bool ok() const;
};

struct MetricRow {
  std::string method;
  std::string coefficient;
  double arb = 0.0;
  bool arb_relative = true;
  double bias = 0.0;
  double se = 0.0;
  double rmse = 0.0;
  std::optional<double> calibration;
  double coverage = 0.0;
  double mean_seconds = 0.0;
  int failures = 0;
  bool flagged = false;  ///< fewer than 80% of replicates succeeded
};

struct MetricsReport {
  std::vector<MetricRow> rows;
};

struct StudyResult {
  MetricsReport report;
  std::vector<RawRecord> raw;  ///< ordered by replicate, then method
  std::vector<std::string> coefficients;
  std::vector<CountGraph> networks;
};

/// Simulates the replicate networks and fits every method to each. Estimator failures are
/// recorded in the raw table and never abort the study.
StudyResult run_recovery_study(const StudyConfig& cfg);

/// Metrics from raw records. Used for the in-run report and for recomputation from disk.
MetricsReport compute_metrics(const std::vector<RawRecord>& raw, const std::vector<std::string>& methods,
                              const std::vector<std::string>& coefficients, const Eigen::VectorXd& theta_star,
                              double level);

/// Fits one method to one network with seeds derived from (seed, replicate, method index).
RawRecord fit_method(const CountGraph& g, const Model& model, const MethodConfig& method, std::uint64_t seed,
                     int replicate, int method_index);

// Persistence. Floating-point values are written with 17 significant digits so that
// metrics recomputed from raw.csv match the in-run report exactly.
/// Per-fit results without timings, so reruns with the same seed give byte-identical files.
void write_raw_csv(const std::filesystem::path& path, const std::vector<RawRecord>& raw,
                   const std::vector<std::string>& coefficients);
std::vector<RawRecord> read_raw_csv(const std::filesystem::path& path, std::vector<std::string>* coefficients);
/// Wall-clock seconds per fit, keyed by method and replicate.
void write_timings_csv(const std::filesystem::path& path, const std::vector<RawRecord>& raw);
/// Fills `seconds` in matching records.
void read_timings_csv(const std::filesystem::path& path, std::vector<RawRecord>& raw);
void write_report_csv(const std::filesystem::path& path, const MetricsReport& report);
void write_report_json(const std::filesystem::path& path, const MetricsReport& report);

}  // namespace countergm
