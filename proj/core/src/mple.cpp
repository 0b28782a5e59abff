#include "countergm/mple.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <map>
#include <numeric>

#include "countergm/errors.hpp"
#include "countergm/numeric.hpp"
#include "countergm/parallel.hpp"
#include "countergm/rng.hpp"

namespace countergm {

namespace {

constexpr double kMaxNewtonStep = 5.0;

// Ceil/floor that ignore representation noise such as 1.5 * 9 landing on 13.500000000000002.
EdgeValue ceil_tol(double x) { return static_cast<EdgeValue>(std::ceil(x - 1e-9)); }
EdgeValue floor_tol(double x) { return static_cast<EdgeValue>(std::floor(x + 1e-9)); }

struct Range {
  EdgeValue lo;
  EdgeValue hi;
};

Range edgewise_range(EdgeValue y, double lambda) {
  const double half = 4.0 * lambda * std::sqrt(static_cast<double>(y));
  return {std::max<EdgeValue>(0, floor_tol(static_cast<double>(y) - half)),
          ceil_tol(static_cast<double>(y) + half)};
}

// Picks `count` distinct positions of `pool` by a partial Fisher-Yates shuffle.
std::vector<std::int64_t> draw_without_replacement(std::vector<std::int64_t> pool, std::int64_t count,
                                                   Rng& rng) {
  const auto n = static_cast<std::int64_t>(pool.size());
  for (std::int64_t i = 0; i < count; ++i) {
    const auto j = i + static_cast<std::int64_t>(uniform_index(rng, static_cast<std::uint64_t>(n - i)));
    std::swap(pool[i], pool[j]);
  }
  pool.resize(static_cast<std::size_t>(count));
  return pool;
}

DyadSample stratified(const CountGraph& g, const std::vector<std::vector<std::int64_t>>& strata,
                      const std::vector<std::int64_t>& take, Rng& rng) {
  std::vector<std::pair<std::int64_t, double>> chosen;
  for (std::size_t s = 0; s < strata.size(); ++s) {
    if (take[s] == 0) continue;
    const double w = static_cast<double>(strata[s].size()) / static_cast<double>(take[s]);
    for (std::int64_t idx : draw_without_replacement(strata[s], take[s], rng)) chosen.emplace_back(idx, w);
  }
  std::sort(chosen.begin(), chosen.end());
  DyadSample out;
  for (const auto& [idx, w] : chosen) {
    out.dyads.push_back(g.dyad(idx));
    out.weights.push_back(w);
  }
  return out;
}

}  // namespace

void validate(const WindowSpec& w) {
  std::visit(
      [](const auto& s) {
        using T = std::decay_t<decltype(s)>;
        if constexpr (std::is_same_v<T, GlobalTruncation>) {
          if (!(s.lambda_global > 0.0) || !std::isfinite(s.lambda_global))
            throw DomainError("lambda_global must be positive");
        } else {
          if (!(s.lambda_edge > 0.0) || !std::isfinite(s.lambda_edge))
            throw DomainError("lambda_edge must be positive");
          for (EdgeValue v : s.keep_low)
            if (v < 0) throw DomainError("keep_low values must be non-negative");
          if constexpr (std::is_same_v<T, Coarsened>) {
            if (s.knots < 2) throw DomainError("coarsened windows need at least 2 knots");
          }
        }
      },
      w);
}

Window build_window(EdgeValue observed, const SupportSpec& support, const WindowSpec& w, EdgeValue y_max) {
  if (!support.contains(observed)) throw DomainError("observed value outside the support");
  validate(w);
  std::map<EdgeValue, double> picked;
  auto add = [&](EdgeValue v, double weight) {
    if (support.contains(v)) picked.emplace(v, weight);
  };

  if (const auto* gt = std::get_if<GlobalTruncation>(&w)) {
    const EdgeValue hi = std::max(ceil_tol(gt->lambda_global * static_cast<double>(y_max)), observed);
    const EdgeValue top = support.cap ? std::min(hi, *support.cap) : hi;
    for (EdgeValue v = 0; v <= top; ++v) add(v, 1.0);
  } else if (const auto* et = std::get_if<EdgewiseTruncation>(&w)) {
    const Range r = edgewise_range(observed, et->lambda_edge);
    const EdgeValue top = support.cap ? std::min(r.hi, *support.cap) : r.hi;
    for (EdgeValue v = r.lo; v <= top; ++v) add(v, 1.0);
    for (EdgeValue v : et->keep_low) add(v, 1.0);
  } else {
    const auto& co = std::get<Coarsened>(w);
    add(observed, 1.0);
    for (EdgeValue v : co.keep_low) add(v, 1.0);
    const Range r = edgewise_range(observed, co.lambda_edge);
    const EdgeValue top = support.cap ? std::min(r.hi, *support.cap) : r.hi;
    std::vector<EdgeValue> rest;
    for (EdgeValue v = r.lo; v <= top; ++v)
      if (!picked.contains(v)) rest.push_back(v);
    const auto n_rest = static_cast<std::int64_t>(rest.size());
    if (n_rest <= co.knots) {
      for (EdgeValue v : rest) add(v, 1.0);
    } else {
      // Contiguous chunks of near-equal size; each is represented by its left end.
      for (std::int64_t c = 0; c < co.knots; ++c) {
        const std::int64_t begin = c * n_rest / co.knots;
        const std::int64_t end = (c + 1) * n_rest / co.knots;
        add(rest[static_cast<std::size_t>(begin)], static_cast<double>(end - begin));
      }
    }
  }
  picked[observed] = 1.0;

  Window out;
  for (const auto& [v, weight] : picked) {
    out.values.push_back(v);
    out.weights.push_back(weight);
  }
  return out;
}

DyadSample all_dyads(const CountGraph& g) {
  DyadSample out;
  const std::int64_t d = g.dyad_count();
  out.dyads.reserve(static_cast<std::size_t>(d));
  for (std::int64_t i = 0; i < d; ++i) out.dyads.push_back(g.dyad(i));
  out.weights.assign(static_cast<std::size_t>(d), 1.0);
  return out;
}

DyadSample sample_edges(const CountGraph& g, const EdgeSampleSpec& spec) {
  const std::int64_t d = g.dyad_count();
  if (spec.m_edges < 0 || spec.m_edges > d)
    throw DomainError("m_edges = " + std::to_string(spec.m_edges) + " but the graph has " + std::to_string(d) +
                      " dyads");
  if (spec.m_edges == 0 || spec.m_edges == d) return all_dyads(g);
  const std::int64_t m = spec.m_edges;
  Rng rng(spec.seed);

  std::vector<std::vector<std::int64_t>> strata;
  std::vector<std::int64_t> take;
  switch (spec.strategy) {
    case EdgeSampling::Uniform: {
      std::vector<std::int64_t> all(static_cast<std::size_t>(d));
      std::iota(all.begin(), all.end(), 0);
      strata.push_back(std::move(all));
      take.push_back(m);
      break;
    }
    case EdgeSampling::TieNoTie: {
      std::vector<std::int64_t> ties, zeros;
      for (std::int64_t i = 0; i < d; ++i) {
        const Dyad dy = g.dyad(i);
        (g(dy.from, dy.to) > 0 ? ties : zeros).push_back(i);
      }
      const auto n_ties = static_cast<std::int64_t>(ties.size());
      const auto n_zeros = static_cast<std::int64_t>(zeros.size());
      std::int64_t t = std::min(n_ties, (m + 1) / 2);
      std::int64_t z = std::min(n_zeros, m - t);
      t = m - z;  // the tie stratum absorbs any shortfall of zeros
      strata = {std::move(ties), std::move(zeros)};
      take = {t, z};
      break;
    }
    case EdgeSampling::FlatValue: {
      std::map<EdgeValue, std::vector<std::int64_t>> by_value;
      for (std::int64_t i = 0; i < d; ++i) {
        const Dyad dy = g.dyad(i);
        by_value[g(dy.from, dy.to)].push_back(i);
      }
      for (auto& [v, members] : by_value) strata.push_back(std::move(members));
      take.assign(strata.size(), 0);
      // Equal allocation per distinct value, redistributing what small strata cannot absorb.
      std::int64_t remaining = m;
      while (remaining > 0) {
        std::vector<std::size_t> open;
        for (std::size_t s = 0; s < strata.size(); ++s)
          if (take[s] < static_cast<std::int64_t>(strata[s].size())) open.push_back(s);
        const auto share = remaining / static_cast<std::int64_t>(open.size());
        if (share == 0) {
          for (std::size_t i = 0; i < static_cast<std::size_t>(remaining); ++i) {
            const auto j = i + uniform_index(rng, open.size() - i);
            std::swap(open[i], open[j]);
            ++take[open[i]];
          }
          remaining = 0;
        } else {
          for (std::size_t s : open) {
            const std::int64_t add = std::min(share, static_cast<std::int64_t>(strata[s].size()) - take[s]);
            take[s] += add;
            remaining -= add;
          }
        }
      }
      break;
    }
  }
  return stratified(g, strata, take, rng);
}

// ---------------------------------------------------------------------------

std::size_t PseudolikCache::bytes() const {
  return dyads_.size() * (sizeof(Dyad) + sizeof(EdgeValue) + sizeof(std::size_t)) +
         values_.size() * sizeof(EdgeValue) + log_base_.size() * sizeof(double) + delta_.size() * sizeof(double);
}

std::size_t PseudolikCache::estimate_bytes(std::size_t dyads, std::size_t entries, int k) {
  return dyads * (sizeof(Dyad) + sizeof(EdgeValue) + sizeof(std::size_t)) +
         entries * (sizeof(EdgeValue) + sizeof(double) * (1 + static_cast<std::size_t>(k)));
}

std::span<const EdgeValue> PseudolikCache::window_values(std::size_t d) const {
  return {values_.data() + offsets_[d], offsets_[d + 1] - offsets_[d]};
}

std::span<const double> PseudolikCache::log_base(std::size_t d) const {
  return {log_base_.data() + offsets_[d], offsets_[d + 1] - offsets_[d]};
}

std::span<const double> PseudolikCache::delta(std::size_t d) const {
  const auto k = static_cast<std::size_t>(k_);
  return {delta_.data() + offsets_[d] * k, (offsets_[d + 1] - offsets_[d]) * k};
}

PseudolikCache build_cache(const CountGraph& g, const Model& model, std::span<const Dyad> dyads,
                           const WindowSpec& w, std::size_t memory_budget_bytes, int workers) {
  if (g.n() != model.n()) throw DomainError("graph and model node counts differ");
  validate(w);
  const EdgeValue y_max = g.max_value();
  const int k = model.k();

  std::vector<Window> windows(dyads.size());
  std::size_t entries = 0;
  for (std::size_t d = 0; d < dyads.size(); ++d) {
    const Dyad dy = dyads[d];
    if (dy.from == dy.to || dy.from < 0 || dy.to < 0 || dy.from >= g.n() || dy.to >= g.n())
      throw DomainError("invalid dyad in sample");
    windows[d] = build_window(g(dy.from, dy.to), model.support(), w, y_max);
    entries += windows[d].values.size();
  }
  const std::size_t need = PseudolikCache::estimate_bytes(dyads.size(), entries, k);
  if (need > memory_budget_bytes) throw BudgetError(need, memory_budget_bytes);

  PseudolikCache cache;
  cache.k_ = k;
  cache.dyads_.assign(dyads.begin(), dyads.end());
  cache.observed_.resize(dyads.size());
  cache.offsets_.resize(dyads.size() + 1);
  cache.offsets_[0] = 0;
  for (std::size_t d = 0; d < dyads.size(); ++d)
    cache.offsets_[d + 1] = cache.offsets_[d] + windows[d].values.size();
  cache.values_.resize(entries);
  cache.log_base_.resize(entries);
  cache.delta_.resize(entries * static_cast<std::size_t>(k));

  const std::size_t n_batches = (dyads.size() + kPseudolikBatch - 1) / kPseudolikBatch;
  parallel_for(n_batches, workers, [&](std::size_t b) {
    const std::size_t end = std::min(dyads.size(), (b + 1) * kPseudolikBatch);
    for (std::size_t d = b * kPseudolikBatch; d < end; ++d) {
      const Dyad dy = dyads[d];
      const EdgeValue y = g(dy.from, dy.to);
      cache.observed_[d] = y;
      const Window& win = windows[d];
      for (std::size_t e = 0; e < win.values.size(); ++e) {
        const std::size_t at = cache.offsets_[d] + e;
        const EdgeValue l = win.values[e];
        cache.values_[at] = l;
        cache.log_base_[at] = std::log(win.weights[e]) + model.log_reference_ratio(y, l);
        model.change_score(g, dy.from, dy.to, l,
                           std::span<double>(cache.delta_.data() + at * static_cast<std::size_t>(k),
                                             static_cast<std::size_t>(k)));
      }
    }
  });
  return cache;
}

namespace {

struct BatchSums {
  double value = 0.0;
  Eigen::VectorXd gradient;
  Eigen::MatrixXd hessian;
  Eigen::MatrixXd info_sq;
};

}  // namespace

PseudolikValue log_pseudolik(const PseudolikCache& cache, const Eigen::VectorXd& theta,
                             std::span<const double> weights, int workers) {
  const int k = cache.k();
  if (cache.dyad_count() == 0) throw DomainError("empty pseudo-likelihood cache");
  if (theta.size() != k) throw DomainError("theta has the wrong length");
  if (!theta.allFinite()) throw DomainError("non-finite theta");
  if (!weights.empty() && weights.size() != cache.dyad_count())
    throw DomainError("weights do not match the cached dyads");

  const std::size_t n_dyads = cache.dyad_count();
  const std::size_t n_batches = (n_dyads + kPseudolikBatch - 1) / kPseudolikBatch;
  std::vector<BatchSums> partial(n_batches);

  parallel_for(n_batches, workers, [&](std::size_t b) {
    BatchSums& acc = partial[b];
    acc.gradient = Eigen::VectorXd::Zero(k);
    acc.hessian = Eigen::MatrixXd::Zero(k, k);
    acc.info_sq = Eigen::MatrixXd::Zero(k, k);
    std::vector<double> eta;
    Eigen::VectorXd mean(k);
    Eigen::MatrixXd cov(k, k);
    Eigen::VectorXd centred(k);
    const std::size_t end = std::min(n_dyads, (b + 1) * kPseudolikBatch);
    for (std::size_t d = b * kPseudolikBatch; d < end; ++d) {
      const std::span<const double> base = cache.log_base(d);
      const std::span<const double> delta = cache.delta(d);
      const std::size_t len = base.size();
      eta.resize(len);
      for (std::size_t e = 0; e < len; ++e) {
        double s = base[e];
        for (int t = 0; t < k; ++t) s += theta[t] * delta[e * k + t];
        eta[e] = s;
      }
      const double lse = logsumexp(eta);
      mean.setZero();
      for (std::size_t e = 0; e < len; ++e) {
        eta[e] = std::exp(eta[e] - lse);  // now the conditional probability
        for (int t = 0; t < k; ++t) mean[t] += eta[e] * delta[e * k + t];
      }
      cov.setZero();
      for (std::size_t e = 0; e < len; ++e) {
        for (int t = 0; t < k; ++t) centred[t] = delta[e * k + t] - mean[t];
        cov.noalias() += eta[e] * centred * centred.transpose();
      }
      const double w = weights.empty() ? 1.0 : weights[d];
      // The observed value contributes eta = 0 (zero change score, unit weight).
      acc.value -= w * lse;
      acc.gradient -= w * mean;
      acc.hessian -= w * cov;
      acc.info_sq += (w * w) * cov;
    }
  });

  PseudolikValue out;
  out.gradient = Eigen::VectorXd::Zero(k);
  out.hessian = Eigen::MatrixXd::Zero(k, k);
  out.weighted_info_sq = Eigen::MatrixXd::Zero(k, k);
  for (const BatchSums& p : partial) {
    out.value += p.value;
    out.gradient += p.gradient;
    out.hessian += p.hessian;
    out.weighted_info_sq += p.info_sq;
  }
  return out;
}

std::vector<double> conditional_logprob(const PseudolikCache& cache, std::size_t d, const Eigen::VectorXd& theta) {
  if (d >= cache.dyad_count()) throw DomainError("dyad index out of range");
  if (theta.size() != cache.k() || !theta.allFinite()) throw DomainError("invalid theta");
  const int k = cache.k();
  const std::span<const double> base = cache.log_base(d);
  const std::span<const double> delta = cache.delta(d);
  std::vector<double> eta(base.size());
  for (std::size_t e = 0; e < base.size(); ++e) {
    double s = base[e];
    for (int t = 0; t < k; ++t) s += theta[t] * delta[e * k + t];
    eta[e] = s;
  }
  const double lse = logsumexp(eta);
  for (double& v : eta) v -= lse;
  return eta;
}

Eigen::VectorXd mple_start(const CountGraph& g, const Model& model) {
  Eigen::VectorXd theta = Eigen::VectorXd::Zero(model.k());
  const int s = model.sum_term_index();
  if (s >= 0 && g.nonzero_count() > 0)
    theta[s] = std::log(static_cast<double>(g.total()) / static_cast<double>(g.nonzero_count()) + 1.0);
  return theta;
}

Estimate fit_mple(const CountGraph& g, const Model& model, const EdgeSampleSpec& sample, const WindowSpec& window,
                  const MpleOptions& options) {
  const auto t0 = std::chrono::steady_clock::now();
  const DyadSample ds = sample_edges(g, sample);
  Estimate est = fit_mple(g, model, ds, window, options);
  est.wallclock_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return est;
}

Estimate fit_mple(const CountGraph& g, const Model& model, const DyadSample& sample, const WindowSpec& window,
                  const MpleOptions& options) {
  const auto t0 = std::chrono::steady_clock::now();
  if (sample.dyads.size() != sample.weights.size()) throw DomainError("dyad sample weights mismatch");
  const PseudolikCache cache =
      build_cache(g, model, sample.dyads, window, options.memory_budget_bytes, options.workers);
  const bool unit = std::all_of(sample.weights.begin(), sample.weights.end(), [](double w) { return w == 1.0; });
  const std::span<const double> weights = unit ? std::span<const double>{} : std::span<const double>(sample.weights);

  Estimate est;
  est.method_tag = "mple";
  Eigen::VectorXd theta = mple_start(g, model);
  PseudolikValue cur = log_pseudolik(cache, theta, weights, options.workers);
  Eigen::MatrixXd cov;

  for (int iter = 1; iter <= options.max_iterations; ++iter) {
    est.iterations = iter;
    if (!invert_spd(-cur.hessian, cov))
      throw EstimationError("pseudo-likelihood Hessian singular; check for collinear terms");
    const Eigen::VectorXd step = cov * cur.gradient;
    if (max_abs(cur.gradient) < options.gradient_tolerance && max_abs(step) < options.step_tolerance) {
      est.converged = true;
      break;
    }
    // Far from the optimum a coefficient can have almost no curvature (e.g. Nonzero when
    // zeros are improbable), so the raw Newton step is capped before the line search.
    double t = std::min(1.0, kMaxNewtonStep / max_abs(step));
    bool moved = false;
    for (int ls = 0; ls < 60; ++ls) {
      const Eigen::VectorXd trial = theta + t * step;
      PseudolikValue next = log_pseudolik(cache, trial, weights, options.workers);
      if (std::isfinite(next.value) && next.value >= cur.value - 1e-12 * std::abs(cur.value)) {
        theta = trial;
        cur = std::move(next);
        moved = true;
        break;
      }
      t *= 0.5;
    }
    if (!moved) break;
  }
  if (!est.converged) est.warnings.push_back("MPLE Newton iterations did not converge");

  est.theta = theta;
  if (invert_spd(-cur.hessian, cov)) {
    const Eigen::MatrixXd v = cov * cur.weighted_info_sq * cov;
    est.se = v.diagonal().cwiseMax(0.0).cwiseSqrt();
  } else {
    est.se = Eigen::VectorXd::Constant(model.k(), std::numeric_limits<double>::quiet_NaN());
    est.converged = false;
    est.warnings.push_back("pseudo-likelihood Hessian singular at the final iterate");
  }
  est.wallclock_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return est;
}

}  // namespace countergm
