#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <string>

#include "countergm/graph.hpp"

namespace countergm {

/// Reads a `from,to,value` CSV edgelist with 1-based node ids. Unlisted dyads are zero.
/// Throws IngestError naming the offending line.
CountGraph load_graph(const std::filesystem::path& edgelist, int n);

/// Writes every nonzero dyad as a `from,to,value` row (1-based ids).
void save_graph(const std::filesystem::path& edgelist, const CountGraph& g);

/// Node CSV: header of covariate names, then one row per node in id order.
/// Dyad CSVs: headerless n x n numeric matrices, keyed by the given names.
CovariateSet load_covariates(const std::optional<std::filesystem::path>& node_csv,
                             const std::map<std::string, std::filesystem::path>& dyad_csvs, int n);

}  // namespace countergm
