#include <cmath>

#include "countergm/errors.hpp"
#include "countergm/sampler.hpp"

namespace countergm {

std::vector<TraceDiagnostics> mcmc_diagnostics(const Eigen::MatrixXd& stat_traces) {
  const Eigen::Index n = stat_traces.rows();
  if (n < 10) throw DomainError("diagnostics need at least 10 retained samples");
  std::vector<TraceDiagnostics> out(static_cast<std::size_t>(stat_traces.cols()));

  for (Eigen::Index c = 0; c < stat_traces.cols(); ++c) {
    const Eigen::VectorXd x = stat_traces.col(c).array() - stat_traces.col(c).mean();
    const double c0 = x.squaredNorm() / static_cast<double>(n);
    if (!(c0 > 1e-300)) continue;  // constant trace: both diagnostics undefined

    auto rho = [&](Eigen::Index lag) {
      return x.head(n - lag).dot(x.tail(n - lag)) / static_cast<double>(n) / c0;
    };
    out[c].lag1_autocorrelation = rho(1);

    // Geyer's initial positive sequence over pairs (rho_{2m} + rho_{2m+1}).
    double tau = -1.0;
    for (Eigen::Index m = 0; 2 * m + 1 < n; ++m) {
      const double gamma = (m == 0 ? 1.0 : rho(2 * m)) + rho(2 * m + 1);
      if (gamma <= 0.0) break;
      tau += 2.0 * gamma;
    }
    tau = std::max(tau, 1.0 / static_cast<double>(n));
    out[c].effective_sample_size = static_cast<double>(n) / tau;
  }
  return out;
}

}  // namespace countergm
