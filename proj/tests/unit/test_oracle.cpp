#include <cmath>
#include <set>

#include <gmock/gmock.h>
#include <gtest/gtest.h>

#include "countergm/errors.hpp"
#include "countergm/mple.hpp"
#include "countergm/oracle.hpp"
#include "support.hpp"

using namespace countergm;
using countergm::testing::spec_of;
using ::testing::HasSubstr;

namespace {

Model capped(ModelSpec spec, int n, EdgeValue cap, ReferenceMeasure ref = ReferenceMeasure::Poisson) {
  spec.support.cap = cap;
  spec.reference = ref;
  return Model(spec, n);
}

}  // namespace

TEST(Enumeration, SupportSizes) {
  EXPECT_EQ(enumerate_support({2, 1}).size(), 4u);
  EXPECT_EQ(enumerate_support({2, 3}).size(), 16u);
  EXPECT_EQ(enumerate_support({3, 2}).size(), 729u);
  EXPECT_EQ(support_size({3, 5}), 46656);
}

TEST(Enumeration, EachGraphExactlyOnceInIndexOrder) {
  const EnumSpec spec{3, 2};
  std::set<std::vector<EdgeValue>> seen;
  std::int64_t expected = 0;
  for_each_graph(spec, [&](std::int64_t idx, const CountGraph& g) {
    EXPECT_EQ(idx, expected++);
    EXPECT_EQ(state_index(g, spec), idx);
    std::vector<EdgeValue> v;
    for (std::int64_t d = 0; d < g.dyad_count(); ++d) v.push_back(g(g.dyad(d).from, g.dyad(d).to));
    seen.insert(v);
  });
  EXPECT_EQ(seen.size(), 729u);
}

TEST(Enumeration, GuardsRefuseLargeSupports) {
  EXPECT_THROW(support_size({4, 1}), DomainError);
  EXPECT_THROW(support_size({3, 6}), DomainError);
  EXPECT_THROW(support_size({2, 0}), DomainError);
}

TEST(ExactNormalizer, Examples) {
  const Model constant = capped(spec_of({"sum"}), 2, 1, ReferenceMeasure::ConstantCapped);
  for (double th : {-1.3, 0.0, 0.7})
    EXPECT_NEAR(exact_log_normalizer(constant, Eigen::VectorXd::Constant(1, th), {2, 1}), 2 * std::log1p(std::exp(th)), 1e-12);

  const Model constant3 = capped(spec_of({"sum", "mutual"}), 3, 2, ReferenceMeasure::ConstantCapped);
  EXPECT_NEAR(exact_log_normalizer(constant3, Eigen::Vector2d::Zero(), {3, 2}), std::log(729.0), 1e-12);

  const Model poisson = capped(spec_of({"sum"}), 2, 3);
  EXPECT_NEAR(exact_log_normalizer(poisson, Eigen::VectorXd::Zero(1), {2, 3}), 2 * std::log(8.0 / 3.0), 1e-12);
}

TEST(ExactMle, BoundaryObservationHasNoMle) {
  const Model m = capped(spec_of({"sum"}), 2, 3);
  try {
    exact_mle(CountGraph::from_matrix({{0, 3}, {3, 0}}), m, {2, 3});
    FAIL();
  } catch (const EstimationError& e) {
    EXPECT_THAT(e.what(), HasSubstr("does not exist"));
  }
}

TEST(ExactMle, LogitClosedForm) {
  const Model m = capped(spec_of({"sum"}), 3, 1, ReferenceMeasure::ConstantCapped);
  const CountGraph g = CountGraph::from_matrix({{0, 1, 0}, {0, 0, 0}, {1, 0, 0}});
  const double d = 2.0 / 6.0;
  EXPECT_NEAR(exact_mle(g, m, {3, 1}).theta[0], std::log(d / (1 - d)), 1e-9);
}

TEST(ExactMle, SumMutualOnCapTwoNeverExists) {
  // Every attainable (sum, mutual) point lies on the triangle (0,0), (2,0), (4,2).
  const Model m = capped(spec_of({"sum", "mutual"}), 2, 2);
  for (const CountGraph& g : enumerate_support({2, 2})) EXPECT_THROW(exact_mle(g, m, {2, 2}), EstimationError);
}

TEST(ExactMle, SumMutualMatchesGridSearch) {
  const Model m = capped(spec_of({"sum", "mutual"}), 2, 3);
  const EnumSpec es{2, 3};
  const CountGraph g = CountGraph::from_matrix({{0, 1}, {2, 0}});
  const ExactMle mle = exact_mle(g, m, es);

  const ExactFamily fam(m, es);
  const Eigen::VectorXd g_obs = m.suff_stats(g);
  const double log_h = m.log_reference(g);
  auto best_on = [&](double lo0, double hi0, double lo1, double hi1, double step) {
    Eigen::Vector2d best(0, 0);
    double best_ll = -INFINITY;
    for (double a = lo0; a <= hi0; a += step)
      for (double b = lo1; b <= hi1; b += step) {
        const double ll = fam.log_likelihood(Eigen::Vector2d(a, b), g_obs, log_h);
        if (ll > best_ll) {
          best_ll = ll;
          best = {a, b};
        }
      }
    return best;
  };
  const Eigen::Vector2d coarse = best_on(-4, 4, -4, 4, 0.01);
  const Eigen::Vector2d fine = best_on(coarse[0] - 0.02, coarse[0] + 0.02, coarse[1] - 0.02, coarse[1] + 0.02, 1e-3);
  EXPECT_NEAR(mle.theta[0], fine[0], 2e-3);
  EXPECT_NEAR(mle.theta[1], fine[1], 2e-3);
}

TEST(ExactMle, MomentsMatchAtMle) {
  Rng rng(12);
  ModelSpec spec = spec_of({"sum", "nonzero", "edgecov(d)", "mutual"});
  spec.covariates.dyad["d"] = countergm::testing::random_dyad_matrix(3, rng);
  const Model m = capped(spec, 3, 3);
  const EnumSpec es{3, 3};
  const ExactFamily fam(m, es);
  int checked = 0;
  for (int rep = 0; rep < 10; ++rep) {
    const CountGraph g = countergm::testing::random_graph(3, 3, rng, 0.3);
    ExactMle mle;
    try {
      mle = exact_mle(g, m, es);
    } catch (const EstimationError&) {
      continue;
    }
    ++checked;
    EXPECT_LT((fam.mean(mle.theta) - m.suff_stats(g)).cwiseAbs().maxCoeff(), 1e-8);
    EXPECT_LT((fam.covariance(mle.theta) - mle.fisher_information).cwiseAbs().maxCoeff(), 1e-10);
  }
  EXPECT_GE(checked, 5);
}

TEST(ExactConditional, NormalizedAndPoissonShape) {
  const Model m = capped(spec_of({"sum"}), 2, 3);
  const auto p = exact_conditional(CountGraph(2), m, Eigen::VectorXd::Zero(1), 0, 1, {2, 3});
  ASSERT_EQ(p.size(), 4u);
  const double z = 1 + 1 + 0.5 + 1.0 / 6;
  const std::vector<double> want{1 / z, 1 / z, 0.5 / z, 1.0 / 6 / z};
  double total = 0;
  for (int l = 0; l < 4; ++l) {
    EXPECT_NEAR(p[l], want[l], 1e-14);
    total += p[l];
  }
  EXPECT_NEAR(total, 1.0, 1e-12);
}

TEST(ExactConditional, AgreesWithJointProbabilityRatios) {
  Rng rng(31);
  ModelSpec spec = countergm::testing::all_terms_spec(3, rng);
  const Model m = capped(spec, 3, 2);
  const EnumSpec es{3, 2};
  const ExactFamily fam(m, es);
  for (int rep = 0; rep < 20; ++rep) {
    Eigen::VectorXd theta(7);
    for (int t = 0; t < 7; ++t) theta[t] = 0.6 * standard_normal(rng);
    const Eigen::VectorXd joint = fam.probabilities(theta);
    CountGraph g = countergm::testing::random_graph(3, 2, rng);
    const Dyad d = g.dyad(static_cast<std::int64_t>(uniform_index(rng, 6)));
    const auto cond = exact_conditional(g, m, theta, d.from, d.to, es);
    double fiber = 0;
    std::vector<double> pj(3);
    for (EdgeValue l = 0; l <= 2; ++l) {
      g.set(d.from, d.to, l);
      pj[l] = joint[state_index(g, es)];
      fiber += pj[l];
    }
    double total = 0;
    for (EdgeValue l = 0; l <= 2; ++l) {
      EXPECT_NEAR(cond[l], pj[l] / fiber, 1e-12);
      total += cond[l];
    }
    EXPECT_NEAR(total, 1.0, 1e-12);
  }
}

TEST(ExactMle, DyadIndependentEqualsFullMple) {
  Rng rng(5);
  ModelSpec spec = spec_of({"sum", "nonzero", "edgecov(d)"});
  spec.covariates.dyad["d"] = countergm::testing::random_dyad_matrix(3, rng);
  const Model m = capped(spec, 3, 4);
  int checked = 0;
  for (int rep = 0; rep < 8; ++rep) {
    const CountGraph g = countergm::testing::random_graph(3, 4, rng, 0.3);
    ExactMle mle;
    try {
      mle = exact_mle(g, m, {3, 4});
    } catch (const EstimationError&) {
      continue;
    }
    ++checked;
    const Estimate est = fit_mple(g, m, all_dyads(g), GlobalTruncation{100.0});
    EXPECT_TRUE(est.converged);
    EXPECT_LT((est.theta - mle.theta).cwiseAbs().maxCoeff(), 1e-4);
  }
  EXPECT_GE(checked, 4);
}
