#include <gtest/gtest.h>

#include <sstream>

#include "slaterec/mdp/evaluate.hpp"
#include "slaterec/mdp/rollin.hpp"
#include "slaterec/oracle/tabular.hpp"
#include "slaterec/oracle/tabular_backend.hpp"

using namespace slaterec;
using namespace slaterec::oracle;

namespace {

TabularLowRankMDP make(std::uint64_t seed, std::size_t s, std::size_t i, std::size_t d, std::size_t k,
                       double gamma) {
  Rng rng(seed);
  return make_tabular(rng, s, i, d, k, gamma);
}

// Two states; state 1 absorbs and pays 1 - gamma whatever is shown.
TabularLowRankMDP absorbing(double gamma) {
  TabularProblem p;
  p.num_states = 2;
  p.num_items = 1;
  p.slate_size = 1;
  p.discount = gamma;
  p.initial = Eigen::Vector2d(0.0, 1.0);
  p.logits = Eigen::MatrixXd::Constant(2, 1, 800.0);
  p.reward = Eigen::MatrixXd::Constant(2, 1, 1.0 - gamma);
  Eigen::MatrixXd phi(4, 1);
  phi << 1, 1, 1, 1;
  Eigen::MatrixXd mu(2, 1);
  mu << 0, 1;
  return TabularLowRankMDP(p, TabularLowRankModel(2, 1, phi, mu));
}

}  // namespace

TEST(MakeTabular, RankOneSharesNextStateDistribution) {
  const auto mdp = make(1, 5, 3, 1, 2, 0.9);
  const Eigen::VectorXd ref = mdp.truth().next_state_distribution(0, 0);
  for (std::size_t s = 0; s < 5; ++s) {
    for (ItemId i = 0; i <= 3; ++i) {
      EXPECT_LE((mdp.truth().next_state_distribution(s, i) - ref).cwiseAbs().maxCoeff(), 1e-15);
    }
  }
}

TEST(MakeTabular, AllItemTransitionsAreDistributions) {
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    const auto mdp = make(seed, 7, 4, 3, 2, 0.9);
    for (std::size_t s = 0; s < 7; ++s) {
      for (ItemId i = 0; i <= 4; ++i) {
        const Eigen::VectorXd p = mdp.truth().next_state_distribution(s, i);
        EXPECT_NEAR(p.sum(), 1.0, 1e-12);
        EXPECT_GE(p.minCoeff(), 0.0);
        EXPECT_LE(mdp.truth().feature(s, i).norm(), 1.0 + 1e-12);
      }
    }
    EXPECT_TRUE(check_normalization(mdp.truth()).valid(3, 1e-12));
    EXPECT_GE(mdp.problem().reward.minCoeff(), 0.0);
    EXPECT_LE(mdp.problem().reward.maxCoeff(), 0.1);
  }
}

TEST(MakeTabular, SeedDeterminism) {
  const auto a = make(3, 4, 3, 2, 2, 0.9), b = make(3, 4, 3, 2, 2, 0.9);
  EXPECT_EQ(a.truth().phi(), b.truth().phi());
  EXPECT_EQ(a.truth().mu(), b.truth().mu());
  EXPECT_EQ(a.problem().logits, b.problem().logits);
}

TEST(MakeTabular, InfeasibleDimensionsRejected) {
  Rng rng(1);
  EXPECT_THROW(make_tabular(rng, 2, 3, 3, 2, 0.9), ConfigError);
  EXPECT_THROW(make_tabular(rng, 4, 2, 2, 3, 0.9), ConfigError);
  EXPECT_THROW(make_tabular(rng, 4, 3, 2, 2, 1.0), ConfigError);
}

TEST(ValueIteration, ZeroRewardZeroValue) {
  TabularProblem p = make(2, 4, 3, 2, 2, 0.9).problem();
  p.reward.setZero();
  const TabularLowRankMDP mdp(p, make(2, 4, 3, 2, 2, 0.9).truth());
  const auto vi = exact_value_iteration(mdp, 1e-12);
  EXPECT_LE(vi.values.cwiseAbs().maxCoeff(), 1e-15);
}

TEST(ValueIteration, AbsorbingStateWorthOne) {
  const auto mdp = absorbing(0.9);
  const auto vi = exact_value_iteration(mdp, 1e-12);
  EXPECT_NEAR(vi.values[1], 1.0, 1e-10);
}

TEST(ValueIteration, ResidualContractsByGamma) {
  const auto mdp = make(4, 6, 4, 3, 2, 0.9);
  const auto vi = exact_value_iteration(mdp, 1e-12);
  ASSERT_GT(vi.residuals.size(), 2u);
  for (std::size_t t = 1; t < vi.residuals.size(); ++t) {
    EXPECT_LE(vi.residuals[t], 0.9 * vi.residuals[t - 1] + 1e-15);
  }
  EXPECT_LE(vi.residuals.back(), 1e-12);
  EXPECT_GE(vi.values.minCoeff(), 0.0);
  EXPECT_LE(vi.values.maxCoeff(), 1.0);
}

TEST(ValueIteration, GreedyValueMatchesMonteCarlo) {
  const auto mdp = make(5, 6, 4, 3, 2, 0.9);
  const auto vi = exact_value_iteration(mdp, 1e-12);
  const auto pi = TabularPolicy::deterministic(mdp.action_set(), vi.greedy);
  Rng rng(6);
  const PolicyValue mc = policy_evaluate(mdp, pi, EvalMode::monte_carlo, &rng, 20000);
  EXPECT_LE(std::abs(mc.value - mdp.initial().dot(vi.values)), 3.0 * mc.std_error);
}

TEST(PolicyValues, FixedPointAgreesWithLinearSolve) {
  const auto mdp = make(7, 8, 5, 3, 2, 0.9);
  Rng rng(1);
  const TabularPolicy pi(mdp.action_set(), sample_simplex_rows(rng, 8, mdp.num_actions(), 1.0));
  EXPECT_LE((exact_policy_values(mdp, pi) - exact_state_values(mdp, pi)).cwiseAbs().maxCoeff(), 1e-10);
}

TEST(Occupancy, ZeroDiscountIsInitialTimesPolicy) {
  const auto mdp = make(8, 4, 3, 2, 2, 0.0);
  Rng rng(2);
  const TabularPolicy pi(mdp.action_set(), sample_simplex_rows(rng, 4, mdp.num_actions(), 1.0));
  const Eigen::MatrixXd d = exact_occupancy(pi, mdp);
  for (Eigen::Index s = 0; s < 4; ++s) {
    for (Eigen::Index a = 0; a < d.cols(); ++a) EXPECT_NEAR(d(s, a), mdp.initial()[s] * pi.probs()(s, a), 1e-15);
  }
}

TEST(Occupancy, SymmetricTwoStateIsUniform) {
  TabularProblem p;
  p.num_states = 2;
  p.num_items = 2;
  p.slate_size = 1;
  p.discount = 0.9;
  p.initial = Eigen::Vector2d(0.5, 0.5);
  p.logits = Eigen::MatrixXd::Zero(2, 2);
  p.reward = Eigen::MatrixXd::Zero(2, 2);
  const TabularLowRankMDP mdp(p, TabularLowRankModel(2, 2, Eigen::MatrixXd::Ones(6, 1),
                                                     Eigen::MatrixXd::Constant(2, 1, 0.5)));
  const auto pi = TabularPolicy::uniform(mdp.action_set(), 2);
  const Eigen::MatrixXd d = exact_occupancy(pi, mdp);
  EXPECT_LE((d.array() - 0.25).abs().maxCoeff(), 1e-12);
}

TEST(Occupancy, NonnegativeAndSumsToOne) {
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    const auto mdp = make(seed, 6, 4, 3, 2, 0.9);
    Rng rng(seed);
    const TabularPolicy pi(mdp.action_set(), sample_simplex_rows(rng, 6, mdp.num_actions(), 1.0));
    const Eigen::MatrixXd d = exact_occupancy(pi, mdp);
    EXPECT_GE(d.minCoeff(), -1e-15);
    EXPECT_NEAR(d.sum(), 1.0, 1e-10);
  }
}

TEST(Occupancy, RewardIdentityLinksTheSolvers) {
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    const auto mdp = make(seed + 20, 6, 4, 3, 2, 0.9);
    Rng rng(seed);
    const TabularPolicy pi(mdp.action_set(), sample_simplex_rows(rng, 6, mdp.num_actions(), 1.0));
    const Eigen::MatrixXd d = exact_occupancy(pi, mdp);
    double lhs = 0.0;
    for (std::size_t s = 0; s < 6; ++s) {
      for (std::size_t a = 0; a < mdp.num_actions(); ++a) lhs += d(Eigen::Index(s), Eigen::Index(a)) * mdp.reward(s, a);
    }
    EXPECT_NEAR(lhs / (1.0 - 0.9), exact_policy_value(mdp, pi), 1e-8);
  }
}

TEST(Occupancy, MatchesRollInFrequencies) {
  const auto mdp = std::make_shared<const TabularLowRankMDP>(make(31, 5, 4, 2, 2, 0.8));
  Rng rng(4);
  const TabularPolicy pi(mdp->action_set(), sample_simplex_rows(rng, 5, mdp->num_actions(), 1.0));
  const Eigen::VectorXd exact = exact_occupancy(pi, *mdp).rowwise().sum();
  TabularBackend backend(mdp);
  Eigen::VectorXd freq = Eigen::VectorXd::Zero(5);
  for (int t = 0; t < 20000; ++t) freq[Eigen::Index(rollin_sample(backend, pi, rng).state)] += 1.0 / 20000.0;
  EXPECT_LE((freq - exact).cwiseAbs().maxCoeff(), 0.02);
}

TEST(Suboptimality, OptimalPolicyIsZero) {
  const auto mdp = make(9, 6, 4, 3, 2, 0.9);
  const auto vi = exact_value_iteration(mdp, 1e-12);
  const auto star = TabularPolicy::deterministic(mdp.action_set(), vi.greedy);
  EXPECT_NEAR(suboptimality({star}, mdp, optimal_value(mdp)), 0.0, 1e-8);
}

TEST(Suboptimality, WorstGreedyIsNonnegative) {
  const auto mdp = make(10, 6, 4, 3, 2, 0.9);
  std::vector<std::size_t> worst(6, 0);
  for (std::size_t s = 0; s < 6; ++s) {
    for (std::size_t a = 1; a < mdp.num_actions(); ++a) {
      if (mdp.reward(s, a) < mdp.reward(s, worst[s])) worst[s] = a;
    }
  }
  const auto pi = TabularPolicy::deterministic(mdp.action_set(), worst);
  EXPECT_GE(suboptimality({pi}, mdp, optimal_value(mdp)), 0.0);
}

TEST(Suboptimality, RandomPoliciesDominated) {
  const auto mdp = make(11, 6, 4, 3, 2, 0.9);
  const double vstar = optimal_value(mdp);
  Rng rng(3);
  for (int t = 0; t < 20; ++t) {
    const TabularPolicy pi(mdp.action_set(), sample_simplex_rows(rng, 6, mdp.num_actions(), 0.5));
    EXPECT_GE(suboptimality({pi}, mdp, vstar), -1e-8);
  }
}

TEST(ModelClass, ContainsTruthOnce) {
  Rng rng(12);
  const auto mdp = make_tabular(rng, 6, 4, 3, 2, 0.9);
  std::size_t ti = 99;
  const auto members = make_model_class(rng, mdp.truth(), 8, &ti);
  ASSERT_EQ(members.size(), 8u);
  ASSERT_LT(ti, 8u);
  std::size_t hits = 0;
  for (const auto& m : members) {
    hits += m.phi() == mdp.truth().phi() && m.mu() == mdp.truth().mu();
    EXPECT_TRUE(check_normalization(m).valid(3, 1e-12));
  }
  EXPECT_EQ(hits, 1u);
}

TEST(Fixtures, InstanceRoundTrip) {
  const auto mdp = make(13, 5, 3, 2, 2, 0.85);
  std::stringstream ss;
  write_instance(ss, mdp);
  const auto back = read_instance(ss);
  EXPECT_EQ(back.truth().phi(), mdp.truth().phi());
  EXPECT_EQ(back.truth().mu(), mdp.truth().mu());
  EXPECT_EQ(back.problem().logits, mdp.problem().logits);
  EXPECT_EQ(back.problem().reward, mdp.problem().reward);
  EXPECT_EQ(back.initial(), mdp.initial());
  EXPECT_EQ(back.discount(), mdp.discount());
  EXPECT_EQ(optimal_value(back), optimal_value(mdp));
}

TEST(Fixtures, ModelClassRoundTrip) {
  Rng rng(14);
  const auto mdp = make_tabular(rng, 4, 3, 2, 2, 0.9);
  const auto members = make_model_class(rng, mdp.truth(), 3, nullptr);
  std::stringstream ss;
  write_model_class(ss, members);
  const auto back = read_model_class(ss);
  ASSERT_EQ(back.size(), 3u);
  for (std::size_t m = 0; m < 3; ++m) {
    EXPECT_EQ(back[m].phi(), members[m].phi());
    EXPECT_EQ(back[m].mu(), members[m].mu());
  }
}

TEST(Fixtures, MalformedInputRejected) {
  std::stringstream ss("not-a-fixture 1");
  EXPECT_THROW(read_instance(ss), Error);
}
