#include <cmath>
#include <map>
#include <random>

#include <gtest/gtest.h>

#include "countergm/cd.hpp"
#include "countergm/errors.hpp"
#include "countergm/numeric.hpp"
#include "countergm/oracle.hpp"
#include "support.hpp"

using namespace countergm;
using countergm::testing::spec_of;

namespace {

// q(y -> l) of the reflected geometric jump, summed term by term.
double jump_probability(EdgeValue y, EdgeValue l) {
  const double p = kJumpStepProbability;
  double total = 0.0;
  for (EdgeValue s = 1; s < 2000; ++s) {
    const double ps = 0.5 * p * std::pow(1.0 - p, static_cast<double>(s - 1));
    if (y + s == l) total += ps;
    if (std::llabs(y - s) == l) total += ps;
  }
  return total;
}

// One-step Metropolis-Hastings transition matrix on the enumerated support, built from the
// proposal and acceptance rule directly (uniform dyad, jump kernel, out-of-support stays put).
Eigen::MatrixXd transition_matrix(const Model& m, const Eigen::VectorXd& theta, const EnumSpec& es) {
  const auto states = enumerate_support(es);
  const Eigen::Index s_count = static_cast<Eigen::Index>(states.size());
  Eigen::MatrixXd p = Eigen::MatrixXd::Zero(s_count, s_count);
  for (Eigen::Index s = 0; s < s_count; ++s) {
    const CountGraph& g = states[static_cast<std::size_t>(s)];
    const double pick = 1.0 / static_cast<double>(g.dyad_count());
    for (std::int64_t d = 0; d < g.dyad_count(); ++d) {
      const Dyad dy = g.dyad(d);
      const EdgeValue y = g(dy.from, dy.to);
      for (EdgeValue l = 0; l <= es.cap; ++l) {
        if (l == y) continue;
        const double q = jump_probability(y, l);
        CountGraph h = g;
        h.set(dy.from, dy.to, l);
        const double log_target = m.log_potential(h, theta) - m.log_potential(g, theta);
        const double a = std::min(1.0, std::exp(log_target) * jump_probability(l, y) / q);
        p(s, state_index(h, es)) += pick * q * a;
      }
    }
    p(s, s) = 1.0 - p.row(s).sum();
  }
  return p;
}

}  // namespace

TEST(CDConfig, Validation) {
  CDConfig c;
  EXPECT_NO_THROW(c.validate());
  EXPECT_EQ(c.steps, 8);
  EXPECT_EQ(c.multiplicity, 1);
  c.steps = 0;
  EXPECT_THROW(c.validate(), DomainError);
  c = CDConfig{};
  c.multiplicity = 0;
  EXPECT_THROW(c.validate(), DomainError);
  c = CDConfig{};
  c.n_chains = 1;
  EXPECT_THROW(c.validate(), DomainError);
}

TEST(CdSample, AllMovesRejectedLeavesObservedStats) {
  // From the empty graph every proposal is an increase, which Sum = -200 rejects.
  const Model m(spec_of({"sum", "nonzero"}), 4);
  CDConfig cfg;
  cfg.n_chains = 64;
  const Eigen::MatrixXd stats = cd_sample(CountGraph(4), m, Eigen::Vector2d(-200.0, 0.0), cfg);
  ASSERT_EQ(stats.rows(), 64);
  ASSERT_EQ(stats.cols(), 2);
  EXPECT_TRUE(stats.isZero());
}

TEST(CdSample, SeededAndWorkerInvariant) {
  Rng rng(4);
  const Model m(countergm::testing::all_terms_spec(5, rng), 5);
  const CountGraph g = countergm::testing::random_graph(5, 6, rng);
  const Eigen::VectorXd theta = Eigen::VectorXd::Constant(7, -0.05);
  CDConfig cfg;
  cfg.seed = 17;
  const Eigen::MatrixXd a = cd_sample(g, m, theta, cfg, 3);
  const Eigen::MatrixXd b = cd_sample(g, m, theta, cfg, 3);
  cfg.workers = 3;
  const Eigen::MatrixXd c = cd_sample(g, m, theta, cfg, 3);
  EXPECT_EQ(a, b);
  EXPECT_EQ(a, c);
  EXPECT_NE(a, cd_sample(g, m, theta, cfg, 4));
}

TEST(CdSample, SingleProposalChainsStayOneMoveFromData) {
  Rng rng(5);
  const Model m(spec_of({"sum", "nonzero"}), 6);
  const CountGraph g = countergm::testing::random_graph(6, 4, rng);
  CDConfig cfg;
  cfg.steps = 1;
  cfg.n_chains = 500;
  const Eigen::MatrixXd stats = cd_sample(g, m, Eigen::Vector2d(0.2, 0.1), cfg);
  const Eigen::Vector2d obs = m.suff_stats(g);
  for (Eigen::Index r = 0; r < stats.rows(); ++r) EXPECT_LE(std::abs(stats(r, 1) - obs[1]), 1.0);
}

TEST(CdSample, ChainEndDistributionMatchesExactKernelPower) {
  // Sum + Nonzero on 2 nodes, cap 2: chain-end (sum, nonzero) frequencies after 50 steps from
  // the observed graph against row `start` of P^50.
  ModelSpec spec = spec_of({"sum", "nonzero"});
  spec.support.cap = 2;
  const Model m(spec, 2);
  const EnumSpec es{2, 2};
  const Eigen::Vector2d theta(0.3, -0.6);
  const CountGraph g_obs = CountGraph::from_matrix({{0, 2}, {0, 0}});

  Eigen::MatrixXd p50 = Eigen::MatrixXd::Identity(9, 9);
  const Eigen::MatrixXd p1 = transition_matrix(m, theta, es);
  for (int s = 0; s < 50; ++s) p50 *= p1;
  const Eigen::RowVectorXd exact = p50.row(state_index(g_obs, es));

  std::map<std::pair<int, int>, double> want;
  const auto states = enumerate_support(es);
  for (std::size_t s = 0; s < states.size(); ++s) {
    const Eigen::Vector2d st = m.suff_stats(states[s]);
    want[{static_cast<int>(st[0]), static_cast<int>(st[1])}] += exact[static_cast<Eigen::Index>(s)];
  }

  for (auto [steps, mult] : {std::pair{50, 1}, std::pair{25, 2}}) {
    CDConfig cfg;
    cfg.steps = steps;
    cfg.multiplicity = mult;
    cfg.n_chains = 40000;
    cfg.seed = 99;
    const Eigen::MatrixXd stats = cd_sample(g_obs, m, theta, cfg);
    std::map<std::pair<int, int>, double> got;
    for (Eigen::Index r = 0; r < stats.rows(); ++r)
      got[{static_cast<int>(stats(r, 0)), static_cast<int>(stats(r, 1))}] += 1.0 / cfg.n_chains;
    for (const auto& [key, pw] : want) {
      const double se = std::sqrt(pw * (1 - pw) / cfg.n_chains);
      EXPECT_NEAR(got[key], pw, 4 * se + 1e-12) << "sum " << key.first << " nonzero " << key.second;
    }
  }
}

TEST(FitCd, SumOnlyPoissonCoverage) {
  const Model m(spec_of({"sum"}), 6);
  const double theta_star = 0.7;
  std::poisson_distribution<EdgeValue> draw(std::exp(theta_star));
  int covered = 0, fitted = 0;
  Rng rng(2025);
  for (int rep = 0; rep < 100; ++rep) {
    CountGraph g(6);
    for (std::int64_t d = 0; d < g.dyad_count(); ++d) g.set(g.dyad(d).from, g.dyad(d).to, draw(rng));
    CDConfig cfg;
    cfg.seed = static_cast<std::uint64_t>(rep);
    cfg.n_chains = 128;
    const Estimate e = fit_cd(g, m, cfg);
    ++fitted;
    if (std::abs(e.theta[0] - theta_star) <= 3.0 * e.se[0]) ++covered;
  }
  EXPECT_GE(covered, 90) << "of " << fitted;
}

TEST(FitCd, SameSeedSameEstimate) {
  Rng rng(6);
  const Model m(spec_of({"sum", "nonzero", "mutual"}), 6);
  const CountGraph g = countergm::testing::random_graph(6, 5, rng);
  CDConfig cfg;
  cfg.seed = 5;
  cfg.max_rounds = 40;
  const Estimate a = fit_cd(g, m, cfg);
  const Estimate b = fit_cd(g, m, cfg);
  EXPECT_EQ(a.theta, b.theta);
  EXPECT_EQ(a.se, b.se);
  EXPECT_EQ(a.iterations, b.iterations);
  EXPECT_EQ(a.method_tag, "cd");
  cfg.workers = 2;
  EXPECT_EQ(fit_cd(g, m, cfg).theta, a.theta);
}

TEST(FitCd, RoundLimitReportsIterateMeanWithWarning) {
  Rng rng(7);
  const Model m(spec_of({"sum", "nonzero"}), 5);
  const CountGraph g = countergm::testing::random_graph(5, 5, rng);
  CDConfig cfg;
  cfg.max_rounds = 3;
  cfg.tolerance = 1e-300;
  const Estimate e = fit_cd(g, m, cfg);
  EXPECT_EQ(e.iterations, 3);
  EXPECT_FALSE(e.warnings.empty());
  EXPECT_TRUE(e.theta.allFinite());
}

TEST(FitCd, DegenerateCovarianceIsFlagged) {
  // Nonzero cannot move when the Sum coefficient forbids every change, so the chain-end
  // covariance is singular.
  const Model m(spec_of({"sum", "nonzero"}), 3);
  CDConfig cfg;
  cfg.max_rounds = 2;
  const Estimate e = fit_cd(CountGraph(3), m, cfg, Eigen::Vector2d(-300.0, 0.0));
  EXPECT_FALSE(e.converged);
  EXPECT_FALSE(e.warnings.empty());
}

TEST(FitCd, LongChainsApproachExactMle) {
  ModelSpec spec = spec_of({"sum", "nonzero"});
  spec.support.cap = 3;
  const Model m(spec, 2);
  const EnumSpec es{2, 3};
  const CountGraph g = CountGraph::from_matrix({{0, 2}, {0, 0}});
  const ExactMle mle = exact_mle(g, m, es);
  CDConfig cfg;
  cfg.steps = 200;
  cfg.n_chains = 4096;
  cfg.seed = 11;
  cfg.max_rounds = 60;
  const Estimate e = fit_cd(g, m, cfg);
  EXPECT_LT((e.theta - mle.theta).cwiseAbs().maxCoeff(), 0.05) << e.theta.transpose() << " vs " << mle.theta.transpose();
}
