#include "countergm/metrics.hpp"

#include <cmath>

#include <boost/math/distributions/normal.hpp>

#include "countergm/errors.hpp"

namespace countergm {

namespace {

double mean(std::span<const double> x) {
  if (x.empty()) throw DomainError("metric of an empty sample");
  double s = 0.0;
  for (double v : x) s += v;
  return s / static_cast<double>(x.size());
}

}  // namespace

BiasValue arb(std::span<const double> estimates, double truth) {
  if (truth == 0.0) return {std::abs(signed_bias(estimates, truth)), false};
  double s = 0.0;
  for (double v : estimates) s += (v - truth) / truth;
  if (estimates.empty()) throw DomainError("metric of an empty sample");
  return {std::abs(s / static_cast<double>(estimates.size())), true};
}

double signed_bias(std::span<const double> estimates, double truth) { return mean(estimates) - truth; }

double true_se(std::span<const double> estimates) {
  const double mu = mean(estimates);
  double s = 0.0;
  for (double v : estimates) s += (v - mu) * (v - mu);
  return std::sqrt(s / static_cast<double>(estimates.size()));
}

double rmse(std::span<const double> estimates, double truth) {
  if (estimates.empty()) throw DomainError("metric of an empty sample");
  double s = 0.0;
  for (double v : estimates) s += (v - truth) * (v - truth);
  return std::sqrt(s / static_cast<double>(estimates.size()));
}

std::optional<double> calibration(std::span<const double> se_hats, double true_se_value) {
  if (!(true_se_value > 0.0)) return std::nullopt;
  return std::log(mean(se_hats) / true_se_value);
}

double coverage(std::span<const double> estimates, std::span<const double> se_hats, double truth, double level) {
  if (estimates.size() != se_hats.size()) throw DomainError("estimates and standard errors differ in length");
  if (!(level > 0.0 && level < 1.0)) throw DomainError("confidence level must be in (0, 1)");
  if (estimates.empty()) throw DomainError("metric of an empty sample");
  const double z = normal_quantile(0.5 * (1.0 + level));
  std::size_t hit = 0;
  for (std::size_t i = 0; i < estimates.size(); ++i) {
    const double half = z * se_hats[i];
    if (estimates[i] - half < truth && truth < estimates[i] + half) ++hit;
  }
  return static_cast<double>(hit) / static_cast<double>(estimates.size());
}

double normal_quantile(double p) {
  if (!(p > 0.0 && p < 1.0)) throw DomainError("quantile probability must be in (0, 1)");
  return boost::math::quantile(boost::math::normal(), p);
}

}  // namespace countergm
