#include <cmath>

#include <gtest/gtest.h>

#include "countergm/errors.hpp"
#include "countergm/oracle.hpp"
#include "countergm/sampler.hpp"
#include "support.hpp"

using namespace countergm;
using countergm::testing::spec_of;

namespace {

// q(y -> l) of the reflected symmetric geometric walk, summed term by term.
double jump_probability(EdgeValue y, EdgeValue l, double p) {
  double total = 0.0;
  for (EdgeValue s = 1; s < 4000; ++s) {
    const double ps = 0.5 * p * std::pow(1.0 - p, static_cast<double>(s - 1));
    if (y + s == l) total += ps;
    if (std::llabs(y - s) == l) total += ps;
  }
  return total;
}

// Per-state frequency standard errors by non-overlapping batch means.
Eigen::VectorXd batch_means_se(const std::vector<std::int64_t>& states, std::int64_t n_states, int batches) {
  const std::size_t len = states.size() / static_cast<std::size_t>(batches);
  Eigen::MatrixXd freq = Eigen::MatrixXd::Zero(batches, n_states);
  for (int b = 0; b < batches; ++b)
    for (std::size_t t = 0; t < len; ++t) freq(b, states[b * len + t]) += 1.0 / static_cast<double>(len);
  const Eigen::RowVectorXd mean = freq.colwise().mean();
  const Eigen::MatrixXd c = freq.rowwise() - mean;
  return (c.array().square().colwise().sum() / (batches - 1) / batches).sqrt();
}

}  // namespace

TEST(SamplerConfig, Validation) {
  SamplerConfig c;
  EXPECT_NO_THROW(c.validate());
  EXPECT_EQ(c.burnin, 16 * c.interval);
  c.interval = 0;
  EXPECT_THROW(c.validate(), DomainError);
  c = SamplerConfig{};
  c.burnin = -1;
  EXPECT_THROW(c.validate(), DomainError);
  EXPECT_THROW(validate(ProposalKind{TieWeightedDyad{0.0}}), DomainError);
  EXPECT_THROW(validate(ProposalKind{TieWeightedDyad{1.0}}), DomainError);
  EXPECT_EQ(SamplerConfig::with_interval(10000, 5, 1).burnin, 160000);
}

TEST(JumpKernel, HastingsRatioMatchesExplicitKernel) {
  for (EdgeValue y = 0; y < 12; ++y)
    for (EdgeValue l = 0; l < 30; ++l) {
      if (y == 0 && l == 0) continue;  // the reflected walk never proposes 0 from 0
      const double want = std::log(jump_probability(l, y, kJumpStepProbability)) -
                          std::log(jump_probability(y, l, kJumpStepProbability));
      EXPECT_NEAR(jump_log_proposal_ratio(y, l), want, 1e-9) << y << " -> " << l;
    }
}

TEST(JumpKernel, ExplicitKernelIsNormalized) {
  for (EdgeValue y : {0, 1, 5, 40}) {
    double total = 0.0;
    for (EdgeValue l = 0; l < 400; ++l) total += jump_probability(y, l, kJumpStepProbability);
    EXPECT_NEAR(total, 1.0, 1e-9);
  }
}

TEST(MetropolisChain, SelfMoveIsAcceptedAndChangesNothing) {
  const Model m(spec_of({"sum", "mutual"}), 3);
  Rng rng(1);
  const CountGraph g = countergm::testing::random_graph(3, 5, rng, 0.0);
  MetropolisChain chain(m, Eigen::Vector2d(-3.0, 1.0), g, RandomDyad{}, 9);
  const Eigen::VectorXd before = chain.stats();
  EXPECT_TRUE(chain.apply(Move{0, 1, g(0, 1), g(0, 1), 0.0}));
  EXPECT_EQ(chain.state(), g);
  EXPECT_EQ(chain.stats(), before);
}

TEST(MetropolisChain, IncreasesRejectedAtVeryNegativeTheta) {
  const Model m(spec_of({"sum"}), 4);
  MetropolisChain chain(m, Eigen::VectorXd::Constant(1, -60.0), CountGraph(4), RandomDyad{}, 3);
  chain.run(20000);
  EXPECT_EQ(chain.state(), CountGraph(4));
}

TEST(MetropolisChain, IncrementalStatsMatchRecompute) {
  Rng rng(21);
  const Model m(countergm::testing::all_terms_spec(5, rng), 5);
  Eigen::VectorXd theta(7);
  theta << 0.2, -0.5, 0.1, -0.1, 0.2, 0.3, -0.05;
  for (ProposalKind prop : {ProposalKind{RandomDyad{}}, ProposalKind{TieWeightedDyad{}}}) {
    MetropolisChain chain(m, theta, countergm::testing::random_graph(5, 6, rng), prop, 5);
    for (int block = 0; block < 200; ++block) {
      chain.run(97);
      const Eigen::VectorXd fresh = m.suff_stats(chain.state());
      ASSERT_LT((chain.stats() - fresh).cwiseAbs().maxCoeff(), 1e-8);
    }
  }
}

TEST(MhStep, FreeFunctionMatchesStationaryMean) {
  // Sum-only at theta = 0 with a Poisson reference: every edge is Poisson(1).
  const Model m(spec_of({"sum"}), 2);
  CountGraph g(2);
  Rng rng(77);
  double total = 0.0;
  const int steps = 400000;
  for (int s = 0; s < steps; ++s) {
    mh_step(g, Eigen::VectorXd::Zero(1), m, RandomDyad{}, rng);
    total += static_cast<double>(g.total()) / 2.0;
  }
  EXPECT_NEAR(total / steps, 1.0, 0.03);
}

TEST(Simulate, SingleStepIsReproducible) {
  const Model m(spec_of({"sum", "nonzero"}), 4);
  const SamplerConfig cfg{RandomDyad{}, 0, 1, 1, 42};
  const auto a = simulate(m, Eigen::Vector2d(0.1, -0.2), CountGraph(4), cfg);
  const auto b = simulate(m, Eigen::Vector2d(0.1, -0.2), CountGraph(4), cfg);
  ASSERT_EQ(a.samples.size(), 1u);
  EXPECT_EQ(a.samples[0], b.samples[0]);
  EXPECT_EQ(a.stat_traces, b.stat_traces);
  EXPECT_LE(a.samples[0].total(), 1000);
  EXPECT_LE(a.samples[0].nonzero_count(), 1);
}

TEST(Simulate, SameSeedIsBitIdentical) {
  Rng rng(2);
  const Model m(countergm::testing::all_terms_spec(5, rng), 5);
  Eigen::VectorXd theta = Eigen::VectorXd::Constant(7, 0.05);
  theta[1] = -0.5;
  for (ProposalKind prop : {ProposalKind{RandomDyad{}}, ProposalKind{TieWeightedDyad{0.3}}}) {
    const SamplerConfig cfg{prop, 500, 50, 40, 1234};
    const auto a = simulate(m, theta, CountGraph(5), cfg);
    const auto b = simulate(m, theta, CountGraph(5), cfg);
    EXPECT_EQ(a.samples, b.samples);
    EXPECT_EQ(a.stat_traces, b.stat_traces);
    EXPECT_EQ(a.final_state, b.final_state);
    for (std::size_t s = 0; s < a.samples.size(); ++s) {
      const Eigen::VectorXd row = a.stat_traces.row(static_cast<Eigen::Index>(s));
      EXPECT_LT((row - m.suff_stats(a.samples[s])).cwiseAbs().maxCoeff(), 1e-9);
    }
  }
}

TEST(Simulate, PoissonMeanAtZeroAndHalf) {
  const Model m(spec_of({"sum"}), 4);
  for (double theta : {0.0, 0.5}) {
    const SamplerConfig cfg{RandomDyad{}, 5000, 40, 20000, 99};
    const auto res = simulate(m, Eigen::VectorXd::Constant(1, theta), CountGraph(4), cfg, false);
    const Eigen::VectorXd per_edge = res.stat_traces.col(0) / 12.0;
    const double mean = per_edge.mean();
    const double var = (per_edge.array() - mean).square().sum() / (per_edge.size() - 1);
    const auto diag = mcmc_diagnostics(res.stat_traces);
    const double se = std::sqrt(var / *diag[0].effective_sample_size);
    EXPECT_NEAR(mean, std::exp(theta), 3.0 * se) << "theta " << theta << " se " << se;
  }
}

TEST(Simulate, TwoNodeCappedStateFrequencies) {
  // Sum-only, theta = 0, Poisson reference, cap 2: per-state frequencies within 3 standard errors.
  ModelSpec spec = spec_of({"sum"});
  spec.support.cap = 2;
  const Model m(spec, 2);
  const EnumSpec es{2, 2};
  const ExactFamily fam(m, es);
  const Eigen::VectorXd p = fam.probabilities(Eigen::VectorXd::Zero(1));

  MetropolisChain chain(m, Eigen::VectorXd::Zero(1), CountGraph(2), RandomDyad{}, 2718);
  const std::int64_t steps = 1'000'000;
  std::vector<std::int64_t> states(static_cast<std::size_t>(steps));
  for (std::int64_t s = 0; s < steps; ++s) {
    chain.step();
    states[static_cast<std::size_t>(s)] = state_index(chain.state(), es);
  }
  Eigen::VectorXd freq = Eigen::VectorXd::Zero(fam.size());
  for (auto s : states) freq[s] += 1.0 / static_cast<double>(steps);
  const Eigen::VectorXd se = batch_means_se(states, fam.size(), 100);
  for (Eigen::Index s = 0; s < fam.size(); ++s) EXPECT_NEAR(freq[s], p[s], 3.0 * se[s]) << "state " << s;
}

TEST(McmcDiagnostics, IidNormal) {
  Rng rng(6);
  Eigen::MatrixXd x(10000, 1);
  for (Eigen::Index i = 0; i < x.rows(); ++i) x(i, 0) = standard_normal(rng);
  const auto d = mcmc_diagnostics(x);
  ASSERT_TRUE(d[0].lag1_autocorrelation);
  EXPECT_NEAR(*d[0].lag1_autocorrelation, 0.0, 0.05);
  EXPECT_GT(*d[0].effective_sample_size, 5000.0);
}

TEST(McmcDiagnostics, PerfectCopyTrace) {
  // Piecewise constant with long runs: lag-1 autocorrelation close to 1.
  Eigen::MatrixXd x(10000, 1);
  Rng rng(7);
  double v = 0.0;
  for (Eigen::Index i = 0; i < x.rows(); ++i) {
    if (i % 1000 == 0) v = standard_normal(rng);
    x(i, 0) = v;
  }
  EXPECT_GT(*mcmc_diagnostics(x)[0].lag1_autocorrelation, 0.99);
}

TEST(McmcDiagnostics, Ar1) {
  Rng rng(8);
  Eigen::MatrixXd x(100000, 1);
  double v = 0.0;
  for (Eigen::Index i = 0; i < x.rows(); ++i) {
    v = 0.5 * v + standard_normal(rng);
    x(i, 0) = v;
  }
  const auto d = mcmc_diagnostics(x);
  EXPECT_NEAR(*d[0].lag1_autocorrelation, 0.5, 0.02);
  // ESS of an AR(1) is n (1 - rho) / (1 + rho).
  EXPECT_NEAR(*d[0].effective_sample_size / (100000.0 / 3.0), 1.0, 0.1);
}

TEST(McmcDiagnostics, ConstantTraceIsFlaggedNotNaN) {
  Eigen::MatrixXd x = Eigen::MatrixXd::Constant(50, 2, 3.0);
  x.col(1).setLinSpaced(50, 0.0, 1.0);
  const auto d = mcmc_diagnostics(x);
  EXPECT_FALSE(d[0].lag1_autocorrelation.has_value());
  EXPECT_FALSE(d[0].effective_sample_size.has_value());
  EXPECT_TRUE(d[1].lag1_autocorrelation.has_value());
  EXPECT_THROW(mcmc_diagnostics(Eigen::MatrixXd::Zero(9, 1)), DomainError);
}
