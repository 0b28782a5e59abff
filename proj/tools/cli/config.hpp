#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "countergm/mcmle.hpp"
#include "countergm/model.hpp"
#include "countergm/study.hpp"

namespace countergm::cli {

using nlohmann::json;

/// Configuration problem; the message already carries file and line when known.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Raw configuration text plus its origin, for line lookups in diagnostics.
struct Source {
  std::string path;  ///< empty for flag-only runs
  std::string text;

  /// "file:line: " for the first occurrence of "key" in the text, or "file: ".
  std::string where(const std::string& key) const;
};

/// Parses a JSON config file. Syntax errors are reported with file and line.
json load_config(const std::filesystem::path& path, Source& source);

/// Recursively merges `patch` into `base` (objects merge, everything else replaces).
void merge(json& base, const json& patch);

struct DataSettings {
  std::filesystem::path graph;
  int nodes = 0;
  std::optional<std::filesystem::path> node_covariates;
  std::map<std::string, std::filesystem::path> dyad_covariates;
};

struct MethodSettings {
  std::string label;
  MethodKind kind = MethodKind::Mple;
  SeedMethod seed_method = SeedMethod::Mple;
  EdgeSampleSpec sample;
  WindowSpec window = GlobalTruncation{};
  MpleOptions mple;
  CDConfig cd;
  MCMLEConfig mcmle;
  EnumSpec oracle;

  MethodConfig to_method_config() const;
};

struct SimulateSettings {
  Eigen::VectorXd theta;
  SamplerConfig sampler;
  std::optional<std::filesystem::path> start;
  bool write_graphs = false;
};

/// Everything a command needs, validated. Relative paths are resolved against the config
/// file's directory.
struct RunConfig {
  std::optional<DataSettings> data;
  ModelSpec model;  ///< covariates filled in by the command after loading data
  std::optional<MethodSettings> method;
  std::optional<SimulateSettings> simulate;
  std::optional<StudyConfig> study;
  std::optional<std::uint64_t> seed;
  int workers = 1;
  std::filesystem::path output = ".";
};

/// Validates `doc` against the schema for `command` ("fit", "simulate", "study",
/// "summarize"). Unknown keys and wrong types raise ConfigError.
RunConfig parse_run_config(const json& doc, const std::string& command, const Source& source,
                           const std::filesystem::path& base_dir);

}  // namespace countergm::cli
