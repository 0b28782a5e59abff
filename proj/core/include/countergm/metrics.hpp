#pragma once

#include <optional>
#include <span>

namespace countergm {

struct BiasValue {
  double value = 0.0;
  bool relative = true;  ///< false when the truth is 0 and the absolute bias is reported
};

/// |mean_i((est_i - truth) / truth)|; the absolute bias |mean_i(est_i - truth)| when truth == 0.
BiasValue arb(std::span<const double> estimates, double truth);

/// mean_i(est_i) - truth.
double signed_bias(std::span<const double> estimates, double truth);

/// Root mean squared deviation from the mean of the estimates (divisor m).
double true_se(std::span<const double> estimates);

/// sqrt(mean_i (est_i - truth)^2).
double rmse(std::span<const double> estimates, double truth);

/// ln(mean_i(se_hat_i) / true_se). nullopt when true_se is not positive.
std::optional<double> calibration(std::span<const double> se_hats, double true_se_value);

/// Fraction of the open intervals est_i ± z * se_i containing truth, z the normal quantile
/// at (1 + level) / 2.
double coverage(std::span<const double> estimates, std::span<const double> se_hats, double truth,
                double level = 0.95);

/// Standard normal quantile.
double normal_quantile(double p);

}  // namespace countergm
