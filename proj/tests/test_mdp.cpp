#include <gtest/gtest.h>

#include <map>
#include <set>

#include "slaterec/env/catalog.hpp"
#include "slaterec/env/environment.hpp"
#include "slaterec/mdp/evaluate.hpp"
#include "slaterec/mdp/factored.hpp"
#include "slaterec/mdp/history.hpp"
#include "slaterec/mdp/low_rank.hpp"
#include "slaterec/mdp/policy.hpp"
#include "slaterec/mdp/rollin.hpp"
#include "slaterec/mdp/simulator_backend.hpp"
#include "slaterec/mdp/uniform_slate.hpp"
#include "slaterec/oracle/tabular.hpp"
#include "slaterec/oracle/tabular_backend.hpp"

using namespace slaterec;

namespace {

std::shared_ptr<const oracle::TabularLowRankMDP> instance(std::uint64_t seed, std::size_t s, std::size_t i,
                                                          std::size_t d, std::size_t k, double gamma) {
  Rng rng(seed);
  return std::make_shared<const oracle::TabularLowRankMDP>(oracle::make_tabular(rng, s, i, d, k, gamma));
}

}  // namespace

// ---- factored transition / reward ----------------------------------------

TEST(FactoredTransition, TwoPointMixture) {
  const std::vector<double> choice{0.6, 0.4};
  const std::vector<std::vector<double>> next{{1.0, 0.0}, {0.0, 1.0}};
  const auto p = factored_transition(choice, next);
  EXPECT_NEAR(p[0], 0.6, 1e-15);
  EXPECT_NEAR(p[1], 0.4, 1e-15);
}

TEST(FactoredTransition, SharedComponentIsReturned) {
  const std::vector<double> choice{0.1, 0.7, 0.2};
  const std::vector<double> common{0.25, 0.5, 0.25};
  const std::vector<std::vector<double>> next(3, common);
  const auto p = factored_transition(choice, next);
  for (std::size_t t = 0; t < 3; ++t) EXPECT_NEAR(p[t], common[t], 1e-15);
}

TEST(FactoredTransition, MatchesBruteForceOnTabularInstance) {
  const auto mdp = instance(4, 4, 4, 2, 2, 0.9);
  const auto& truth = mdp->truth();
  for (std::size_t s = 0; s < 4; ++s) {
    for (std::size_t a = 0; a < mdp->num_actions(); ++a) {
      const Slate& slate = mdp->actions()[a];
      const auto choice = mdp->problem().choice(s, slate);
      std::vector<std::vector<double>> next;
      for (std::size_t j = 0; j <= slate.size(); ++j) {
        const ItemId id = j < slate.size() ? slate[j] : truth.null_id();
        const Eigen::VectorXd d = truth.next_state_distribution(s, id);
        next.emplace_back(d.data(), d.data() + d.size());
      }
      const auto p = factored_transition(choice, next);
      double total = 0.0;
      for (std::size_t t = 0; t < 4; ++t) {
        double brute = 0.0;
        for (std::size_t j = 0; j <= slate.size(); ++j) {
          const ItemId id = j < slate.size() ? slate[j] : truth.null_id();
          brute += choice[j] * truth.transition_prob(s, id, t);
        }
        EXPECT_NEAR(p[t], brute, 1e-14);
        EXPECT_NEAR(p[t], mdp->transition(s, a)[Eigen::Index(t)], 1e-14);
        total += p[t];
      }
      EXPECT_NEAR(total, 1.0, 1e-10);
    }
  }
}

TEST(FactoredTransition, InvalidItemDistributionIsModelError) {
  const std::vector<double> choice{0.5, 0.5};
  const std::vector<std::vector<double>> next{{0.5, 0.6}, {0.0, 1.0}};
  EXPECT_THROW(factored_transition(choice, next), ModelError);
}

TEST(FactoredReward, DeterministicChoice) {
  EXPECT_NEAR(factored_reward(std::vector<double>{1.0, 0.0}, std::vector<double>{0.05}), 0.05, 1e-15);
}

TEST(FactoredReward, TwoPointAverage) {
  EXPECT_NEAR(factored_reward(std::vector<double>{0.5, 0.5, 0.0}, std::vector<double>{0.0, 0.1}), 0.05, 1e-15);
}

TEST(FactoredReward, MatchesBruteForceOnTabularInstance) {
  const auto mdp = instance(8, 5, 4, 2, 2, 0.9);
  for (std::size_t s = 0; s < 5; ++s) {
    for (std::size_t a = 0; a < mdp->num_actions(); ++a) {
      const Slate& slate = mdp->actions()[a];
      const auto choice = mdp->problem().choice(s, slate);
      std::vector<double> r;
      for (ItemId id : slate.items) r.push_back(mdp->problem().item_reward(s, id));
      const double got = factored_reward(choice, r);
      EXPECT_NEAR(got, mdp->reward(s, a), 1e-15);
      EXPECT_GE(got, 0.0);
      EXPECT_LE(got, 0.1);
    }
  }
}

// ---- uniform slate ------------------------------------------------------

TEST(UniformSlate, WholeCatalogWhenKEqualsItems) {
  Rng rng(1);
  const std::vector<double> prop{0.3, 0.9, 0.1};
  std::map<ItemId, int> targets;
  for (int t = 0; t < 3000; ++t) {
    const Slate s = uniform_slate(prop, 3, rng);
    EXPECT_EQ(s, (Slate{{0, 1, 2}}));
    ++targets[s[0]];
  }
  for (const auto& [id, n] : targets) EXPECT_NEAR(n / 3000.0, 1.0 / 3.0, 0.03);
}

TEST(UniformSlate, HighestTargetGetsLowestFiller) {
  const std::vector<double> prop{0.5, 0.9, 0.2};
  const Slate s = slate_for_target(1, prop, 2);
  EXPECT_EQ(s[0], 1u);
  EXPECT_EQ(s[1], 2u);
}

TEST(UniformSlate, TiesBrokenByAscendingId) {
  const std::vector<double> prop{0.4, 0.4, 0.4, 0.1};
  EXPECT_EQ(slate_for_target(3, prop, 3), (Slate{{3, 0, 1}}));
  EXPECT_EQ(slate_for_target(0, prop, 3), (Slate{{0, 3, 1}}));
}

TEST(UniformSlate, TargetFrequencyUniform) {
  Rng rng(2);
  const std::vector<double> prop{0.1, 0.5, 0.2, 0.8, 0.3};
  std::vector<int> counts(5, 0);
  for (int t = 0; t < 10000; ++t) ++counts[uniform_slate(prop, 2, rng)[0]];
  for (int c : counts) EXPECT_NEAR(c / 10000.0, 0.2, 0.02);
}

TEST(UniformSlate, AtMostOneSlatePerTarget) {
  Rng rng(3);
  const std::vector<double> prop{0.1, 0.5, 0.2, 0.8, 0.3, 0.6};
  std::set<std::vector<ItemId>> seen;
  for (int t = 0; t < 2000; ++t) seen.insert(uniform_slate(prop, 3, rng).items);
  EXPECT_LE(seen.size(), prop.size());
}

TEST(UniformSlate, KLargerThanCatalogRejected) {
  Rng rng(1);
  EXPECT_THROW(uniform_slate(std::vector<double>{0.5}, 2, rng), ConfigError);
}

// Conditional target rate holds whenever the target outscores every filler.
TEST(UniformSlate, ConditionalRateWhenTargetDominatesFillers) {
  Rng rng(4);
  for (int trial = 0; trial < 2000; ++trial) {
    const std::size_t n = 2 + rng.index(5);
    const std::size_t k = 1 + rng.index(std::min<std::size_t>(3, n));
    std::vector<double> logits(n), prop(n);
    for (std::size_t i = 0; i < n; ++i) {
      logits[i] = rng.uniform(-2.0, 2.0);
      prop[i] = 1.0 / (1.0 + std::exp(-logits[i]));
    }
    const ItemId target = rng.index(n);
    const Slate s = slate_for_target(target, prop, k);
    bool dominates = true;
    std::vector<double> z;
    for (ItemId id : s.items) {
      z.push_back(logits[id]);
      dominates = dominates && logits[id] <= logits[target];
    }
    if (!dominates) continue;
    const auto p = env::mnl_with_null(z);
    EXPECT_GE(p[0] / (1.0 - p[k]), 1.0 / double(k) - 1e-12);
  }
}

// Counterexample to the unrestricted conditional claim: k = |I|, low-affinity target.
TEST(UniformSlate, ConditionalRateCanFallBelowOneOverK) {
  const std::vector<double> logits{1.0, -1.0};
  const std::vector<double> prop{1.0 / (1.0 + std::exp(-1.0)), 1.0 / (1.0 + std::exp(1.0))};
  const Slate s = slate_for_target(1, prop, 2);
  const auto p = env::mnl_with_null(std::vector<double>{logits[s[0]], logits[s[1]]});
  EXPECT_LT(p[0] / (1.0 - p[2]), 0.5);
}

// ---- history ------------------------------------------------------------

TEST(History, PaddedUntilFilled) {
  HistoryState h(3);
  EXPECT_EQ(h.window(), 3u);
  EXPECT_EQ(h.num_real(), 0u);
  h.push(Slate{{0, 1}}, UserResponse{0, 0.05});
  EXPECT_EQ(h.entries().size(), 3u);
  EXPECT_EQ(h.num_real(), 1u);
  EXPECT_FALSE(h.newest().padding);
  for (int t = 0; t < 5; ++t) h.push(Slate{{1, 2}}, UserResponse{2, 0.0});
  EXPECT_EQ(h.num_real(), 3u);
  EXPECT_EQ(h.entries().size(), 3u);
}

TEST(History, ZeroWindowRejected) { EXPECT_THROW(HistoryState(0), ConfigError); }

// ---- roll-in ------------------------------------------------------------

TEST(RollIn, ZeroDiscountReturnsInitialState) {
  const auto mdp = instance(5, 4, 3, 2, 2, 0.0);
  oracle::TabularBackend backend(mdp);
  const auto pi = TabularPolicy::uniform(mdp->action_set(), 4);
  Rng rng(1);
  std::vector<double> freq(4, 0.0);
  for (int t = 0; t < 20000; ++t) {
    const auto r = rollin_sample(backend, pi, rng);
    EXPECT_EQ(r.length, 0u);
    freq[r.state] += 1.0 / 20000.0;
  }
  for (std::size_t s = 0; s < 4; ++s) EXPECT_NEAR(freq[s], mdp->initial()[Eigen::Index(s)], 0.02);
}

TEST(RollIn, MeanLengthIsGeometric) {
  const auto mdp = instance(6, 4, 3, 2, 2, 0.9);
  oracle::TabularBackend backend(mdp);
  const auto pi = TabularPolicy::uniform(mdp->action_set(), 4);
  Rng rng(2);
  double total = 0.0;
  for (int t = 0; t < 20000; ++t) total += double(rollin_sample(backend, pi, rng).length) + 1.0;
  EXPECT_NEAR(total / 20000.0, 10.0, 0.3);
}

TEST(RollIn, ThreeStateChainMatchesExactOccupancy) {
  const auto mdp = instance(7, 3, 3, 2, 2, 0.5);
  oracle::TabularBackend backend(mdp);
  const auto pi = TabularPolicy::uniform(mdp->action_set(), 3);
  const Eigen::VectorXd exact = oracle::exact_occupancy(pi, *mdp).rowwise().sum();
  Rng rng(3);
  Eigen::VectorXd freq = Eigen::VectorXd::Zero(3);
  for (int t = 0; t < 20000; ++t) freq[Eigen::Index(rollin_sample(backend, pi, rng).state)] += 1.0 / 20000.0;
  for (Eigen::Index s = 0; s < 3; ++s) EXPECT_NEAR(freq[s], exact[s], 0.02);
}

// ---- low-rank model -----------------------------------------------------

TEST(LowRankModel, GeneratedModelsSatisfyNormalization) {
  Rng rng(8);
  for (int t = 0; t < 20; ++t) {
    const auto m = oracle::random_low_rank_model(rng, 6, 4, 3);
    const auto rep = check_normalization(m);
    EXPECT_TRUE(rep.valid(3, 1e-12));
    EXPECT_LE(rep.max_sum_error, 1e-12);
  }
}

TEST(LowRankModel, InvalidModelDetected) {
  Eigen::MatrixXd phi = Eigen::MatrixXd::Constant(2 * 2, 1, 2.0);
  Eigen::MatrixXd mu = Eigen::MatrixXd::Constant(2, 1, 0.5);
  const TabularLowRankModel m(2, 1, phi, mu);
  EXPECT_FALSE(check_normalization(m).valid(1, 1e-12));
}

// ---- policies and evaluation --------------------------------------------

TEST(Policy, RowsMustBeDistributions) {
  auto actions = std::make_shared<const ActionSet>(enumerate_slates(3, 2));
  EXPECT_THROW(TabularPolicy(actions, Eigen::MatrixXd::Constant(2, 3, 0.5)), InvalidDistribution);
}

TEST(Policy, UniformRandomSlatesAreValid) {
  Rng rng(1);
  const UniformRandomPolicy pi(6, 3);
  for (int t = 0; t < 200; ++t) EXPECT_NO_THROW(validate_slate(pi(0, rng), 6, 3));
}

namespace {

// One state, one item, k = 1, logit large enough that the item is always taken.
oracle::TabularLowRankMDP single_state(double item_reward, double gamma) {
  oracle::TabularProblem p;
  p.num_states = 1;
  p.num_items = 1;
  p.slate_size = 1;
  p.discount = gamma;
  p.initial = Eigen::VectorXd::Ones(1);
  p.logits = Eigen::MatrixXd::Constant(1, 1, 800.0);
  p.reward = Eigen::MatrixXd::Constant(1, 1, item_reward);
  return oracle::TabularLowRankMDP(p, TabularLowRankModel(1, 1, Eigen::MatrixXd::Ones(2, 1),
                                                          Eigen::MatrixXd::Ones(1, 1)));
}

}  // namespace

TEST(PolicyEvaluate, GeometricSeriesGivesOne) {
  const auto mdp = single_state(0.1, 0.9);
  const auto pi = TabularPolicy::uniform(mdp.action_set(), 1);
  EXPECT_NEAR(policy_evaluate(mdp, pi, EvalMode::exact).value, 1.0, 1e-10);
}

TEST(PolicyEvaluate, ZeroRewardGivesZero) {
  const auto mdp = single_state(0.0, 0.9);
  const auto pi = TabularPolicy::uniform(mdp.action_set(), 1);
  EXPECT_NEAR(policy_evaluate(mdp, pi, EvalMode::exact).value, 0.0, 1e-12);
}

TEST(PolicyEvaluate, ExactAgreesWithMonteCarlo) {
  const auto mdp = instance(10, 5, 4, 2, 2, 0.8);
  Rng rng(11);
  const Eigen::MatrixXd probs = oracle::sample_simplex_rows(rng, 5, mdp->num_actions(), 1.0);
  const TabularPolicy pi(mdp->action_set(), probs);
  const double exact = policy_evaluate(*mdp, pi, EvalMode::exact).value;
  const PolicyValue mc = policy_evaluate(*mdp, pi, EvalMode::monte_carlo, &rng, 4000);
  EXPECT_GT(mc.std_error, 0.0);
  EXPECT_LE(std::abs(mc.value - exact), 3.0 * mc.std_error);
}

TEST(PolicyEvaluate, BackendMonteCarloAgreesWithExact) {
  const auto mdp = instance(12, 5, 4, 2, 2, 0.8);
  oracle::TabularBackend backend(mdp);
  const auto pi = TabularPolicy::uniform(mdp->action_set(), 5);
  Rng rng(5);
  const PolicyValue mc = policy_evaluate(backend, pi, EvalMode::monte_carlo, rng, 4000);
  const double exact = policy_evaluate(*mdp, pi, EvalMode::exact).value;
  EXPECT_LE(std::abs(mc.value - exact), 3.0 * mc.std_error);
}

TEST(PolicyEvaluate, ExactModeUnsupportedOnSimulator) {
  Rng rng(1);
  auto cat = std::make_shared<const env::ItemCatalog>(env::sample_catalog(rng, 4, 2));
  SimulatorBackend backend(env::Environment(cat, env::DynamicsParams{}, 2, 0.9), 2);
  EXPECT_THROW(policy_evaluate(backend, UniformRandomPolicy(4, 2), EvalMode::exact, rng, 10), UnsupportedMode);
}

TEST(PolicyEvaluate, MonteCarloNeedsGenerator) {
  const auto mdp = single_state(0.1, 0.9);
  const auto pi = TabularPolicy::uniform(mdp.action_set(), 1);
  EXPECT_THROW(policy_evaluate(mdp, pi, EvalMode::monte_carlo), ConfigError);
}

// ---- simulator backend ---------------------------------------------------

TEST(SimulatorBackend, StepRecordsHistoryAndReward) {
  Rng rng(2);
  auto cat = std::make_shared<const env::ItemCatalog>(env::sample_catalog(rng, 5, 3));
  SimulatorBackend backend(env::Environment(cat, env::DynamicsParams{}, 2, 0.9), 3);
  backend.reset(rng);
  const auto step = backend.step(Slate{{1, 3}}, rng);
  EXPECT_EQ(step.next.num_real(), 1u);
  EXPECT_EQ(step.reward, step.response.engagement);
  EXPECT_TRUE(is_distribution(step.choice, 1e-12));
  const auto prop = backend.propensities();
  EXPECT_EQ(prop.size(), 5u);
  for (double p : prop) {
    EXPECT_GT(p, 0.0);
    EXPECT_LT(p, 1.0);
  }
}
