#include "countergm/sampler.hpp"

#include <cmath>
#include <limits>

#include "countergm/errors.hpp"

namespace countergm {

namespace {

constexpr std::int64_t kRecomputeEvery = 1'000'000;

double log_add_exp(double a, double b) {
  if (a == -std::numeric_limits<double>::infinity()) return b;
  if (b == -std::numeric_limits<double>::infinity()) return a;
  const double m = std::max(a, b);
  return m + std::log1p(std::exp(-std::abs(a - b)));
}

// ln of the geometric pmf on {1, 2, ...}.
double log_geometric(std::int64_t s, double p) {
  return std::log(p) + static_cast<double>(s - 1) * std::log1p(-p);
}

// ln q(from -> to) up to the common factor 1/2.
double log_jump(EdgeValue from, EdgeValue to, double p) {
  double out = -std::numeric_limits<double>::infinity();
  if (to != from) out = log_geometric(std::abs(to - from), p);
  if (to > 0) out = log_add_exp(out, log_geometric(from + to, p));  // reflected at 0
  return out;
}

EdgeValue draw_jump(EdgeValue from, Rng& rng) {
  const std::int64_t s = geometric(rng, kJumpStepProbability);
  const EdgeValue cand = (rng() >> 63) ? from + s : from - s;
  return cand < 0 ? -cand : cand;
}

double accept_log_ratio(const Model& model, const CountGraph& g, const Eigen::VectorXd& theta,
                        const Move& move, std::vector<double>& delta) {
  model.change_score(g, move.from, move.to, move.proposed, delta);
  double eta = 0.0;
  for (int t = 0; t < model.k(); ++t) eta += theta[t] * delta[t];
  return eta + model.log_reference_ratio(move.current, move.proposed) + move.log_proposal_ratio;
}

bool accept(double log_ratio, Rng& rng) {
  if (log_ratio >= 0.0) return true;
  return std::log(1.0 - uniform01(rng)) < log_ratio;
}

}  // namespace

void validate(const ProposalKind& proposal) {
  if (const auto* tw = std::get_if<TieWeightedDyad>(&proposal)) {
    if (!(tw->p_nonzero > 0.0 && tw->p_nonzero < 1.0))
      throw DomainError("tie-weighted proposal needs 0 < p_nonzero < 1");
  }
}

SamplerConfig SamplerConfig::with_interval(std::int64_t interval, std::int64_t n_samples,
                                           std::uint64_t seed, ProposalKind proposal) {
  SamplerConfig cfg;
  cfg.proposal = proposal;
  cfg.interval = interval;
  cfg.burnin = 16 * interval;
  cfg.n_samples = n_samples;
  cfg.seed = seed;
  return cfg;
}

void SamplerConfig::validate() const {
  if (interval < 1) throw DomainError("sampler interval must be >= 1");
  if (n_samples < 1) throw DomainError("sampler n_samples must be >= 1");
  if (burnin < 0) throw DomainError("sampler burnin must be >= 0");
  countergm::validate(proposal);
}

double jump_log_proposal_ratio(EdgeValue y, EdgeValue l, double p_step) {
  return log_jump(l, y, p_step) - log_jump(y, l, p_step);
}

MetropolisChain::MetropolisChain(const Model& model, Eigen::VectorXd theta, CountGraph start,
                                 ProposalKind proposal, std::uint64_t seed)
    : model_(&model),
      theta_(std::move(theta)),
      state_(std::move(start)),
      proposal_(proposal),
      rng_(seed),
      delta_(static_cast<std::size_t>(model.k())) {
  countergm::validate(proposal_);
  if (theta_.size() != model.k()) throw DomainError("theta has wrong dimension");
  if (state_.n() != model.n()) throw DomainError("start graph does not match the model's node count");
  for (int i = 0; i < state_.n(); ++i)
    for (int j = 0; j < state_.n(); ++j)
      if (i != j && !model.in_support(state_(i, j)))
        throw DomainError("start graph has an edge value outside the support");
  stats_ = model.suff_stats(state_);
  rebuild_nonzero_index();
}

void MetropolisChain::set_theta(const Eigen::VectorXd& theta) {
  if (theta.size() != model_->k()) throw DomainError("theta has wrong dimension");
  theta_ = theta;
}

void MetropolisChain::reset(const CountGraph& start) {
  state_ = start;
  stats_ = model_->suff_stats(state_);
  since_recompute_ = 0;
  rebuild_nonzero_index();
}

void MetropolisChain::rebuild_nonzero_index() {
  nonzero_dyads_.clear();
  nonzero_pos_.clear();
  if (!std::holds_alternative<TieWeightedDyad>(proposal_)) return;
  nonzero_pos_.assign(static_cast<std::size_t>(state_.dyad_count()), -1);
  for (std::int64_t d = 0; d < state_.dyad_count(); ++d) {
    const Dyad dy = state_.dyad(d);
    if (state_(dy.from, dy.to) > 0) track_nonzero(d, true);
  }
}

void MetropolisChain::track_nonzero(std::int64_t dyad, bool now_nonzero) {
  std::int64_t& pos = nonzero_pos_[static_cast<std::size_t>(dyad)];
  if (now_nonzero && pos < 0) {
    pos = static_cast<std::int64_t>(nonzero_dyads_.size());
    nonzero_dyads_.push_back(dyad);
  } else if (!now_nonzero && pos >= 0) {
    const std::int64_t last = nonzero_dyads_.back();
    nonzero_dyads_[static_cast<std::size_t>(pos)] = last;
    nonzero_pos_[static_cast<std::size_t>(last)] = pos;
    nonzero_dyads_.pop_back();
    pos = -1;
  }
}

double MetropolisChain::dyad_selection_probability(EdgeValue value_at_dyad, std::int64_t nonzero) const {
  const double all = static_cast<double>(state_.dyad_count());
  if (nonzero == 0) return 1.0 / all;
  const double p = std::get<TieWeightedDyad>(proposal_).p_nonzero;
  return (value_at_dyad > 0 ? p / static_cast<double>(nonzero) : 0.0) + (1.0 - p) / all;
}

std::optional<Move> MetropolisChain::propose() {
  const auto n_dyads = static_cast<std::uint64_t>(state_.dyad_count());
  std::int64_t d = 0;
  const auto* tw = std::get_if<TieWeightedDyad>(&proposal_);
  if (tw && !nonzero_dyads_.empty() && uniform01(rng_) < tw->p_nonzero) {
    d = nonzero_dyads_[uniform_index(rng_, nonzero_dyads_.size())];
  } else {
    d = static_cast<std::int64_t>(uniform_index(rng_, n_dyads));
  }
  const Dyad dy = state_.dyad(d);
  Move move;
  move.from = dy.from;
  move.to = dy.to;
  move.current = state_(dy.from, dy.to);
  move.proposed = draw_jump(move.current, rng_);
  if (!model_->in_support(move.proposed)) return std::nullopt;
  move.log_proposal_ratio = jump_log_proposal_ratio(move.current, move.proposed);
  if (tw) {
    const auto e = static_cast<std::int64_t>(nonzero_dyads_.size());
    const std::int64_t e_after = e + static_cast<int>(move.proposed > 0) - static_cast<int>(move.current > 0);
    move.log_proposal_ratio += std::log(dyad_selection_probability(move.proposed, e_after)) -
                               std::log(dyad_selection_probability(move.current, e));
  }
  return move;
}

bool MetropolisChain::apply(const Move& move) {
  if (move.proposed == move.current) {
    ++accepted_;
    return true;
  }
  const double log_ratio = accept_log_ratio(*model_, state_, theta_, move, delta_);
  if (!accept(log_ratio, rng_)) return false;
  for (int t = 0; t < model_->k(); ++t) stats_[t] += delta_[static_cast<std::size_t>(t)];
  state_.set(move.from, move.to, move.proposed);
  if (!nonzero_pos_.empty() && (move.current > 0) != (move.proposed > 0))
    track_nonzero(state_.dyad_index(move.from, move.to), move.proposed > 0);
  ++accepted_;
  return true;
}

bool MetropolisChain::step() {
  ++steps_;
  if (++since_recompute_ >= kRecomputeEvery) {
    stats_ = model_->suff_stats(state_);
    since_recompute_ = 0;
  }
  const auto move = propose();
  if (!move) return false;
  return apply(*move);
}

void MetropolisChain::run(std::int64_t steps) {
  for (std::int64_t s = 0; s < steps; ++s) step();
}

bool mh_step(CountGraph& state, const Eigen::VectorXd& theta, const Model& model,
             const ProposalKind& proposal, Rng& rng) {
  validate(proposal);
  const std::int64_t n_dyads = state.dyad_count();
  const auto* tw = std::get_if<TieWeightedDyad>(&proposal);
  const std::int64_t e = state.nonzero_count();

  std::int64_t d = 0;
  if (tw && e > 0 && uniform01(rng) < tw->p_nonzero) {
    auto pick = static_cast<std::int64_t>(uniform_index(rng, static_cast<std::uint64_t>(e)));
    for (d = 0; d < n_dyads; ++d) {
      const Dyad dy = state.dyad(d);
      if (state(dy.from, dy.to) > 0 && pick-- == 0) break;
    }
  } else {
    d = static_cast<std::int64_t>(uniform_index(rng, static_cast<std::uint64_t>(n_dyads)));
  }
  const Dyad dy = state.dyad(d);
  Move move{dy.from, dy.to, state(dy.from, dy.to), 0, 0.0};
  move.proposed = draw_jump(move.current, rng);
  if (!model.in_support(move.proposed)) return false;
  if (move.proposed == move.current) return true;
  move.log_proposal_ratio = jump_log_proposal_ratio(move.current, move.proposed);
  if (tw) {
    const double all = static_cast<double>(n_dyads);
    const std::int64_t e_after = e + static_cast<int>(move.proposed > 0) - static_cast<int>(move.current > 0);
    auto sel = [&](EdgeValue v, std::int64_t nz) {
      if (nz == 0) return 1.0 / all;
      return (v > 0 ? tw->p_nonzero / static_cast<double>(nz) : 0.0) + (1.0 - tw->p_nonzero) / all;
    };
    move.log_proposal_ratio += std::log(sel(move.proposed, e_after)) - std::log(sel(move.current, e));
  }
  std::vector<double> delta(static_cast<std::size_t>(model.k()));
  if (!accept(accept_log_ratio(model, state, theta, move, delta), rng)) return false;
  state.set(move.from, move.to, move.proposed);
  return true;
}

SimulationResult simulate(const Model& model, const Eigen::VectorXd& theta, const CountGraph& start,
                          const SamplerConfig& cfg, bool keep_graphs) {
  cfg.validate();
  MetropolisChain chain(model, theta, start, cfg.proposal, cfg.seed);
  chain.run(cfg.burnin);
  SimulationResult out;
  out.stat_traces.resize(cfg.n_samples, model.k());
  if (keep_graphs) out.samples.reserve(static_cast<std::size_t>(cfg.n_samples));
  const std::int64_t accepted_before = chain.accepted();
  for (std::int64_t s = 0; s < cfg.n_samples; ++s) {
    chain.run(cfg.interval);
    out.stat_traces.row(s) = chain.stats().transpose();
    if (keep_graphs) out.samples.push_back(chain.state());
  }
  out.acceptance_rate = static_cast<double>(chain.accepted() - accepted_before) /
                        static_cast<double>(cfg.n_samples * cfg.interval);
  out.final_state = chain.state();
  return out;
}

}  // namespace countergm
